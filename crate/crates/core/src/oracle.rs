//! Brute force over the homotopy-class graph, straight from the
//! definitions: states are chains up to a length bound, edges are basic
//! moves. This module deliberately knows nothing about presentations,
//! covers or homology; it is the independent check those are validated
//! against on small spaces.

use crate::chain::{BasicMove, Chain, HomotopyTrace};
use crate::graph::EpsilonGraph;
use crate::space::FiniteMetricSpace;
use rand::Rng;
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleAnswer {
    /// Reached a constant chain; the trace replays the contraction.
    Null(HomotopyTrace),
    /// Exhausted every chain reachable within the length bound without
    /// meeting a constant chain.
    NoNullWithin { max_len: usize, explored: usize },
    /// Node budget ran out before the frontier closed: no verdict.
    Budget { explored: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum RefineAnswer {
    Refinable(HomotopyTrace),
    NoRefinementWithin { max_len: usize, explored: usize },
    Budget { explored: usize },
}

struct Bfs<'a> {
    space: &'a FiniteMetricSpace,
    graph: EpsilonGraph,
    scale: f64,
    max_len: usize,
    node_budget: usize,
    states: Vec<Box<[u32]>>,
    parent: Vec<(u32, BasicMove)>,
    seen: HashMap<Box<[u32]>, u32>,
}

impl<'a> Bfs<'a> {
    fn new(space: &'a FiniteMetricSpace, scale: f64, max_len: usize, node_budget: usize) -> Self {
        Bfs {
            space,
            graph: EpsilonGraph::build(space, scale),
            scale,
            max_len,
            node_budget,
            states: Vec::new(),
            parent: Vec::new(),
            seen: HashMap::new(),
        }
    }

    fn intern(&mut self, pts: Box<[u32]>, parent: (u32, BasicMove)) -> Option<u32> {
        if self.seen.contains_key(&pts) {
            return None;
        }
        let id = self.states.len() as u32;
        self.seen.insert(pts.clone(), id);
        self.states.push(pts);
        self.parent.push(parent);
        Some(id)
    }

    /// All chains one basic move away, inside the length bound.
    fn successors(&self, pts: &[u32]) -> Vec<(Box<[u32]>, BasicMove)> {
        let mut out = Vec::new();
        let len = pts.len();
        // Removals first: they shrink the state space.
        for pos in 1..len.saturating_sub(1) {
            let (a, b) = (pts[pos - 1] as usize, pts[pos + 1] as usize);
            if a == b || self.space.dist(a, b) < self.scale {
                let mut next = Vec::with_capacity(len - 1);
                next.extend_from_slice(&pts[..pos]);
                next.extend_from_slice(&pts[pos + 1..]);
                out.push((next.into_boxed_slice(), BasicMove::Remove { pos }));
            }
        }
        if len < self.max_len {
            for pos in 1..len {
                let (a, b) = (pts[pos - 1] as usize, pts[pos] as usize);
                let mut candidates = self.graph.common_neighbors(a, b);
                candidates.push(a as u32);
                if b != a {
                    candidates.push(b as u32);
                }
                candidates.sort_unstable();
                candidates.dedup();
                for p in candidates {
                    let q = p as usize;
                    let ok_a = q == a || self.space.dist(a, q) < self.scale;
                    let ok_b = q == b || self.space.dist(q, b) < self.scale;
                    if ok_a && ok_b {
                        let mut next = Vec::with_capacity(len + 1);
                        next.extend_from_slice(&pts[..pos]);
                        next.push(p);
                        next.extend_from_slice(&pts[pos..]);
                        out.push((next.into_boxed_slice(), BasicMove::Insert { pos, point: q }));
                    }
                }
            }
        }
        out
    }

    fn trace_to(&self, mut id: u32, start: &Chain) -> HomotopyTrace {
        let mut moves = Vec::new();
        while id != 0 {
            let (p, mv) = self.parent[id as usize];
            moves.push(mv);
            id = p;
        }
        moves.reverse();
        HomotopyTrace { start: start.clone(), moves }
    }
}

fn is_constant(pts: &[u32]) -> bool {
    pts.iter().all(|&p| p == pts[0])
}

/// Is the loop eps-null? Exhaustive over chains of length at most
/// `max_len`; `Null` answers are exact (and carry a replayable trace),
/// `NoNullWithin` is exact relative to the stated bound.
pub fn null_oracle(
    space: &FiniteMetricSpace,
    lp: &Chain,
    max_len: usize,
    node_budget: usize,
) -> OracleAnswer {
    assert!(lp.is_loop(), "null_oracle takes a loop");
    let mut bfs = Bfs::new(space, lp.scale, max_len.max(lp.points.len()), node_budget);
    let start: Box<[u32]> = lp.points.iter().map(|&p| p as u32).collect();
    if is_constant(&start) {
        return OracleAnswer::Null(HomotopyTrace { start: lp.clone(), moves: vec![] });
    }
    bfs.intern(start, (0, BasicMove::Remove { pos: 0 }));
    let mut head = 0usize;
    while head < bfs.states.len() {
        if bfs.states.len() > node_budget {
            return OracleAnswer::Budget { explored: bfs.states.len() };
        }
        let pts = bfs.states[head].clone();
        for (next, mv) in bfs.successors(&pts) {
            let constant = is_constant(&next);
            if let Some(id) = bfs.intern(next, (head as u32, mv)) {
                if constant {
                    let trace = bfs.trace_to(id, lp);
                    return OracleAnswer::Null(trace);
                }
            }
        }
        head += 1;
    }
    OracleAnswer::NoNullWithin { max_len: bfs.max_len, explored: bfs.states.len() }
}

/// Is the two-point chain hi-homotopic to a chain with all hops strictly
/// below `lo`? Same bounded-BFS contract as [`null_oracle`].
pub fn refine_oracle(
    space: &FiniteMetricSpace,
    hi: f64,
    lo: f64,
    chain: &Chain,
    max_len: usize,
    node_budget: usize,
) -> RefineAnswer {
    assert_eq!(chain.scale, hi);
    let fine = |pts: &[u32]| {
        pts.windows(2)
            .all(|w| space.dist(w[0] as usize, w[1] as usize) < lo)
    };
    let mut bfs = Bfs::new(space, hi, max_len.max(chain.points.len()), node_budget);
    let start: Box<[u32]> = chain.points.iter().map(|&p| p as u32).collect();
    if fine(&start) {
        return RefineAnswer::Refinable(HomotopyTrace { start: chain.clone(), moves: vec![] });
    }
    bfs.intern(start, (0, BasicMove::Remove { pos: 0 }));
    let mut head = 0usize;
    while head < bfs.states.len() {
        if bfs.states.len() > node_budget {
            return RefineAnswer::Budget { explored: bfs.states.len() };
        }
        let pts = bfs.states[head].clone();
        for (next, mv) in bfs.successors(&pts) {
            let ok = fine(&next);
            if let Some(id) = bfs.intern(next, (head as u32, mv)) {
                if ok {
                    let trace = bfs.trace_to(id, chain);
                    return RefineAnswer::Refinable(trace);
                }
            }
        }
        head += 1;
    }
    RefineAnswer::NoRefinementWithin { max_len: bfs.max_len, explored: bfs.states.len() }
}

/// Random metric space for cross-validation. Half the draws are points in
/// the unit square with Euclidean distances; the other half are matrices
/// with entries in [1,2), which satisfy the triangle inequality outright.
pub fn random_space<R: Rng>(rng: &mut R, n: usize) -> FiniteMetricSpace {
    let euclidean = rng.gen_bool(0.5);
    let mut rows = vec![vec![0.0f64; n]; n];
    if euclidean {
        let mut pts: Vec<[f64; 2]> = Vec::new();
        while pts.len() < n {
            let p = [rng.gen::<f64>(), rng.gen::<f64>()];
            if pts
                .iter()
                .all(|q| (q[0] - p[0]).hypot(q[1] - p[1]) > 1e-3)
            {
                pts.push(p);
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let d = (pts[i][0] - pts[j][0]).hypot(pts[i][1] - pts[j][1]);
                rows[i][j] = d;
                rows[j][i] = d;
            }
        }
    } else {
        for i in 0..n {
            for j in (i + 1)..n {
                let d = 1.0 + rng.gen::<f64>();
                rows[i][j] = d;
                rows[j][i] = d;
            }
        }
    }
    FiniteMetricSpace::validate_metric(&rows, None, 1e-12).expect("constructed to be a metric")
}

/// Random eps-loop at a random basepoint: a short random walk in the
/// eps-graph closed up by a shortest path home. `None` when the basepoint's
/// component has no edges.
pub fn random_loop<R: Rng>(
    rng: &mut R,
    space: &FiniteMetricSpace,
    graph: &EpsilonGraph,
    eps: f64,
    walk_len: usize,
) -> Option<Chain> {
    let n = space.n();
    let candidates: Vec<usize> = (0..n).filter(|&v| !graph.neighbors(v).is_empty()).collect();
    if candidates.is_empty() {
        return None;
    }
    let base = candidates[rng.gen_range(0..candidates.len())];
    let mut pts = vec![base];
    let mut cur = base;
    for _ in 0..walk_len {
        let nb = graph.neighbors(cur);
        if nb.is_empty() {
            break;
        }
        cur = nb[rng.gen_range(0..nb.len())] as usize;
        pts.push(cur);
    }
    // Close up with a BFS shortest path back to base.
    let mut prev = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    prev[cur] = cur;
    queue.push_back(cur);
    while let Some(v) = queue.pop_front() {
        if v == base {
            break;
        }
        for &w in graph.neighbors(v) {
            let w = w as usize;
            if prev[w] == usize::MAX {
                prev[w] = v;
                queue.push_back(w);
            }
        }
    }
    if prev[base] == usize::MAX {
        return None;
    }
    let mut back = Vec::new();
    let mut v = base;
    while v != cur {
        back.push(v);
        v = prev[v];
    }
    back.reverse();
    pts.extend(back);
    if pts.len() == 1 {
        pts.push(base);
    }
    Chain::new(space, pts, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::verify_homotopy;

    fn square4() -> FiniteMetricSpace {
        // 4 points of a unit square: cycle at small scales.
        let d = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| d(pts[i], pts[j])).collect())
            .collect();
        FiniteMetricSpace::validate_metric(&rows, None, 1e-12).unwrap()
    }

    #[test]
    fn four_cycle_is_not_null_below_diagonal() {
        let s = square4();
        let lp = Chain::new(&s, vec![0, 1, 2, 3, 0], 1.2).unwrap();
        match null_oracle(&s, &lp, 10, 100_000) {
            OracleAnswer::NoNullWithin { .. } => {}
            other => panic!("expected NoNullWithin, got {other:?}"),
        }
    }

    #[test]
    fn four_cycle_nulls_above_diagonal() {
        let s = square4();
        let lp = Chain::new(&s, vec![0, 1, 2, 3, 0], 1.5).unwrap();
        match null_oracle(&s, &lp, 10, 100_000) {
            OracleAnswer::Null(trace) => {
                let end = verify_homotopy(&s, &trace).unwrap();
                assert!(end.points.iter().all(|&p| p == end.points[0]));
            }
            other => panic!("expected Null, got {other:?}"),
        }
    }

    #[test]
    fn refine_oracle_inserts_midpoint() {
        // Collinear 0,1,2: {0,2} at hi=2.5 refines to hops < 1.5 via 1.
        let s = FiniteMetricSpace::validate_metric(
            &[
                vec![0.0, 1.0, 2.0],
                vec![1.0, 0.0, 1.0],
                vec![2.0, 1.0, 0.0],
            ],
            None,
            0.0,
        )
        .unwrap();
        let c = Chain::new(&s, vec![0, 2], 2.5).unwrap();
        match refine_oracle(&s, 2.5, 1.5, &c, 6, 10_000) {
            RefineAnswer::Refinable(t) => {
                let end = verify_homotopy(&s, &t).unwrap();
                assert!(end
                    .points
                    .windows(2)
                    .all(|w| s.dist(w[0], w[1]) < 1.5));
            }
            other => panic!("expected Refinable, got {other:?}"),
        }
    }
}
