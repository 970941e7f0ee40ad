//! Chains, basic moves and homotopy traces.
//!
//! A chain at scale `eps` is a point sequence whose consecutive distances
//! are strictly below `eps`. A basic move inserts or removes one interior
//! point, keeping endpoints fixed and the chain valid. A trace is a start
//! chain plus a move list; [`verify_homotopy`] is the proof checker that
//! all Null/Refinable certificates in this crate ultimately reduce to.

use crate::space::FiniteMetricSpace;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    /// Point indices; length >= 1.
    pub points: Vec<usize>,
    /// The scale the chain is valid at (strict bound on hops).
    pub scale: f64,
}

impl Chain {
    /// Build and check the strict hop bound.
    pub fn new(space: &FiniteMetricSpace, points: Vec<usize>, scale: f64) -> Option<Chain> {
        let c = Chain { points, scale };
        if c.is_valid(space) {
            Some(c)
        } else {
            None
        }
    }

    pub fn is_valid(&self, space: &FiniteMetricSpace) -> bool {
        if self.points.is_empty() || !(self.scale > 0.0) {
            return false;
        }
        if self.points.iter().any(|&p| p >= space.n()) {
            return false;
        }
        self.points
            .windows(2)
            .all(|w| space.dist(w[0], w[1]) < self.scale)
    }

    pub fn start(&self) -> usize {
        self.points[0]
    }

    pub fn end(&self) -> usize {
        *self.points.last().unwrap()
    }

    pub fn is_loop(&self) -> bool {
        self.start() == self.end()
    }

    pub fn reverse(&self) -> Chain {
        let mut points = self.points.clone();
        points.reverse();
        Chain { points, scale: self.scale }
    }

    /// Concatenation; requires `self.end() == other.start()` and equal scales.
    pub fn concat(&self, other: &Chain) -> Chain {
        assert_eq!(self.end(), other.start());
        assert_eq!(self.scale, other.scale);
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points[1..]);
        Chain { points, scale: self.scale }
    }
}

/// Sum of consecutive distances, `L(alpha)`. Reversal-invariant and
/// additive under concatenation.
pub fn chain_length(space: &FiniteMetricSpace, chain: &Chain) -> f64 {
    chain
        .points
        .windows(2)
        .map(|w| space.dist(w[0], w[1]))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BasicMove {
    /// Insert `point` so that it becomes index `pos` (1 <= pos <= len-1:
    /// strictly interior, endpoints fixed).
    Insert { pos: usize, point: usize },
    /// Remove the interior point at index `pos` (1 <= pos <= len-2).
    Remove { pos: usize },
}

impl BasicMove {
    /// Inverse move, valid on the chain the move produced.
    pub fn inverse(&self, chain_before: &Chain) -> BasicMove {
        match *self {
            BasicMove::Insert { pos, .. } => BasicMove::Remove { pos },
            BasicMove::Remove { pos } => BasicMove::Insert {
                pos,
                point: chain_before.points[pos],
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyTrace {
    pub start: Chain,
    pub moves: Vec<BasicMove>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedMove {
    pub step: usize,
    pub reason: String,
}

/// Apply one move in place. Returns an error message when the move breaks
/// validity, endpoint fixity or the index range; the chain is untouched then.
pub fn apply_move(
    space: &FiniteMetricSpace,
    points: &mut Vec<usize>,
    scale: f64,
    mv: BasicMove,
) -> Result<(), String> {
    match mv {
        BasicMove::Insert { pos, point } => {
            if point >= space.n() {
                return Err(format!("point {point} out of range"));
            }
            if pos == 0 || pos > points.len() - 1 {
                return Err(format!(
                    "insert position {pos} not interior (len {})",
                    points.len()
                ));
            }
            let (a, b) = (points[pos - 1], points[pos]);
            if space.dist(a, point) >= scale {
                return Err(format!(
                    "distance bound: d({a},{point}) = {} >= {scale}",
                    space.dist(a, point)
                ));
            }
            if space.dist(point, b) >= scale {
                return Err(format!(
                    "distance bound: d({point},{b}) = {} >= {scale}",
                    space.dist(point, b)
                ));
            }
            points.insert(pos, point);
            Ok(())
        }
        BasicMove::Remove { pos } => {
            if points.len() < 3 || pos == 0 || pos >= points.len() - 1 {
                return Err(format!(
                    "remove position {pos} not interior (len {})",
                    points.len()
                ));
            }
            let (a, b) = (points[pos - 1], points[pos + 1]);
            if space.dist(a, b) >= scale {
                return Err(format!(
                    "distance bound: d({a},{b}) = {} >= {scale}",
                    space.dist(a, b)
                ));
            }
            points.remove(pos);
            Ok(())
        }
    }
}

/// Check a trace move by move: every intermediate chain must be valid at
/// the common scale with endpoints unchanged. Returns the final chain.
pub fn verify_homotopy(
    space: &FiniteMetricSpace,
    trace: &HomotopyTrace,
) -> Result<Chain, RejectedMove> {
    if !trace.start.is_valid(space) {
        return Err(RejectedMove {
            step: 0,
            reason: "start chain invalid".to_string(),
        });
    }
    let scale = trace.start.scale;
    let mut points = trace.start.points.clone();
    for (step, &mv) in trace.moves.iter().enumerate() {
        apply_move(space, &mut points, scale, mv).map_err(|reason| RejectedMove { step, reason })?;
    }
    Ok(Chain { points, scale })
}

/// Reverse a verified trace: runs from the trace's final chain back to its
/// start chain.
pub fn reverse_trace(space: &FiniteMetricSpace, trace: &HomotopyTrace) -> HomotopyTrace {
    let scale = trace.start.scale;
    let mut points = trace.start.points.clone();
    let mut inverses = Vec::with_capacity(trace.moves.len());
    for &mv in &trace.moves {
        let before = Chain { points: points.clone(), scale };
        inverses.push(mv.inverse(&before));
        apply_move(space, &mut points, scale, mv).expect("reverse_trace needs a verified trace");
    }
    inverses.reverse();
    HomotopyTrace {
        start: Chain { points, scale },
        moves: inverses,
    }
}

/// Drop adjacent insert/remove pairs that cancel exactly. Keeps the trace
/// verifiable while shrinking machine-generated certificates.
pub fn compress_trace(space: &FiniteMetricSpace, trace: &HomotopyTrace) -> HomotopyTrace {
    let mut moves: Vec<BasicMove> = Vec::with_capacity(trace.moves.len());
    for &mv in &trace.moves {
        let cancel = match (moves.last(), mv) {
            (Some(&BasicMove::Insert { pos: p, .. }), BasicMove::Remove { pos: q }) => p == q,
            _ => false,
        };
        if cancel {
            moves.pop();
        } else {
            moves.push(mv);
        }
    }
    let out = HomotopyTrace { start: trace.start.clone(), moves };
    debug_assert!(verify_homotopy(space, &out).is_ok());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_point_space() -> FiniteMetricSpace {
        // Collinear points at 0, 1, 2 with Euclidean distances.
        FiniteMetricSpace::validate_metric(
            &[
                vec![0.0, 1.0, 2.0],
                vec![1.0, 0.0, 1.0],
                vec![2.0, 1.0, 0.0],
            ],
            None,
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn chain_length_examples() {
        let s = three_point_space();
        let single = Chain::new(&s, vec![1], 1.0).unwrap();
        assert_eq!(chain_length(&s, &single), 0.0);
        let c = Chain::new(&s, vec![0, 1, 2], 1.5).unwrap();
        assert_eq!(chain_length(&s, &c), 2.0);
        assert_eq!(chain_length(&s, &c.reverse()), 2.0);
        let d = Chain::new(&s, vec![2, 1], 1.5).unwrap();
        assert_eq!(
            chain_length(&s, &c.concat(&d)),
            chain_length(&s, &c) + chain_length(&s, &d)
        );
    }

    #[test]
    fn empty_trace_accepted() {
        let s = three_point_space();
        let t = HomotopyTrace {
            start: Chain::new(&s, vec![0, 1, 0], 1.5).unwrap(),
            moves: vec![],
        };
        assert!(verify_homotopy(&s, &t).is_ok());
    }

    #[test]
    fn triangle_removal_respects_strict_bound() {
        let s = three_point_space();
        // Remove middle point of {0,1,2}: needs d(0,2) = 2 < scale.
        let start = Chain::new(&s, vec![0, 1, 2], 2.5).unwrap();
        let t = HomotopyTrace {
            start: start.clone(),
            moves: vec![BasicMove::Remove { pos: 1 }],
        };
        assert!(verify_homotopy(&s, &t).is_ok());

        let tight = HomotopyTrace {
            start: Chain::new(&s, vec![0, 1, 2], 2.0).unwrap(),
            moves: vec![BasicMove::Remove { pos: 1 }],
        };
        let err = verify_homotopy(&s, &tight).unwrap_err();
        assert_eq!(err.step, 0);
        assert!(err.reason.contains("distance bound"));
    }

    #[test]
    fn endpoints_are_fixed() {
        let s = three_point_space();
        let start = Chain::new(&s, vec![0, 1, 2], 2.5).unwrap();
        for bad in [
            BasicMove::Insert { pos: 0, point: 1 },
            BasicMove::Insert { pos: 3, point: 1 },
            BasicMove::Remove { pos: 0 },
            BasicMove::Remove { pos: 2 },
        ] {
            let t = HomotopyTrace { start: start.clone(), moves: vec![bad] };
            assert!(verify_homotopy(&s, &t).is_err(), "{bad:?} must be rejected");
        }
    }

    #[test]
    fn reverse_trace_round_trips() {
        let s = three_point_space();
        let start = Chain::new(&s, vec![0, 1, 2], 2.5).unwrap();
        let t = HomotopyTrace {
            start: start.clone(),
            moves: vec![
                BasicMove::Remove { pos: 1 },
                BasicMove::Insert { pos: 1, point: 1 },
            ],
        };
        let end = verify_homotopy(&s, &t).unwrap();
        let back = reverse_trace(&s, &t);
        assert_eq!(back.start, end);
        let round = verify_homotopy(&s, &back).unwrap();
        assert_eq!(round.points, start.points);
    }
}
