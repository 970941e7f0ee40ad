//! The eps-intrinsic metric `D_eps`: infimum of chain length over
//! eps-chains joining two points.
//!
//! On a finite space the infimum is attained by a simple path in the
//! eps-graph (repeated vertices never shorten the length), so `D_eps` is a
//! weighted shortest-path distance, computed here by Dijkstra per source.
//! Disconnection is a first-class outcome (`None` entries), never a large
//! float.

use crate::graph::EpsilonGraph;
use crate::space::FiniteMetricSpace;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntrinsicMetricResult {
    pub scale: f64,
    /// Row-major n*n; `None` between distinct eps-components.
    pub dmat: Vec<Option<f64>>,
    /// Bi-Lipschitz constant: max over connected pairs of the hop count of
    /// the fewest-hops shortest chain. `None` when the graph is disconnected.
    pub lipschitz_m: Option<u32>,
    pub n: usize,
}

impl IntrinsicMetricResult {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.dmat[i * self.n + j]
    }
}

#[derive(Clone, Copy, PartialEq)]
struct QueueEntry {
    dist: f64,
    hops: u32,
    vertex: u32,
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Min-heap on (dist, hops): shortest length first, fewest hops among
        // equal lengths; vertex id as a deterministic tiebreak.
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap()
            .then(other.hops.cmp(&self.hops))
            .then(other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra_row(space: &FiniteMetricSpace, g: &EpsilonGraph, src: usize) -> Vec<Option<(f64, u32)>> {
    let n = space.n();
    let mut best: Vec<Option<(f64, u32)>> = vec![None; n];
    let mut heap = std::collections::BinaryHeap::new();
    best[src] = Some((0.0, 0));
    heap.push(QueueEntry { dist: 0.0, hops: 0, vertex: src as u32 });
    while let Some(QueueEntry { dist, hops, vertex }) = heap.pop() {
        let v = vertex as usize;
        match best[v] {
            Some((d, h)) if (dist, hops) > (d, h) => continue,
            _ => {}
        }
        for &w in g.neighbors(v) {
            let w = w as usize;
            let nd = dist + space.dist(v, w);
            let nh = hops + 1;
            let better = match best[w] {
                None => true,
                Some((d, h)) => nd < d || (nd == d && nh < h),
            };
            if better {
                best[w] = Some((nd, nh));
                heap.push(QueueEntry { dist: nd, hops: nh, vertex: w as u32 });
            }
        }
    }
    best
}

pub fn intrinsic_metric(space: &FiniteMetricSpace, eps: f64) -> IntrinsicMetricResult {
    let g = EpsilonGraph::build(space, eps);
    intrinsic_metric_on(space, &g)
}

pub fn intrinsic_metric_on(space: &FiniteMetricSpace, g: &EpsilonGraph) -> IntrinsicMetricResult {
    let n = space.n();
    let rows: Vec<Vec<Option<(f64, u32)>>> = (0..n)
        .into_par_iter()
        .map(|src| dijkstra_row(space, g, src))
        .collect();
    let mut dmat = vec![None; n * n];
    let mut m: Option<u32> = Some(0);
    let connected = g.component_count() <= 1;
    for (i, row) in rows.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            if let Some((d, h)) = cell {
                dmat[i * n + j] = Some(*d);
                if i != j {
                    if let Some(cur) = m {
                        m = Some(cur.max(*h));
                    }
                }
            }
        }
    }
    if !connected {
        m = None;
    }
    IntrinsicMetricResult { scale: g.scale, dmat, lipschitz_m: m, n }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    /// Results at every candidate scale, descending.
    pub per_scale: Vec<IntrinsicMetricResult>,
    /// `D_0` on a finite space: `D_eps` at the smallest scale whose graph is
    /// still connected.
    pub d0: Option<IntrinsicMetricResult>,
    /// Set when no scale keeps the graph connected (n = 1 excluded).
    pub divergent: bool,
    /// Monotonicity violations found while sweeping (must stay empty).
    pub monotonicity_violations: usize,
}

/// Evaluate `D_eps` at every candidate scale, descending, checking the
/// monotone nondecrease of `D_eps` as eps decreases. The scale passed to
/// each evaluation is the candidate value itself (edges strictly below it),
/// plus one evaluation above the top candidate.
pub fn intrinsic_metric_sweep(space: &FiniteMetricSpace) -> SweepReport {
    let cands = space.candidate_scales();
    let mut per_scale = Vec::new();
    let mut violations = 0usize;
    let mut d0: Option<IntrinsicMetricResult> = None;
    let top = cands.last().copied().unwrap_or(1.0) * 2.0;
    let mut scales = vec![top];
    scales.extend(cands.iter().rev().copied());
    let mut prev: Option<IntrinsicMetricResult> = None;
    for eps in scales {
        let r = intrinsic_metric(space, eps);
        if let Some(p) = &prev {
            // As eps decreases D_eps grows entrywise (None = infinity tops
            // everything).
            for k in 0..r.dmat.len() {
                match (p.dmat[k], r.dmat[k]) {
                    (Some(a), Some(b)) if b < a - 1e-12 => violations += 1,
                    (None, Some(_)) => violations += 1,
                    _ => {}
                }
            }
        }
        if r.lipschitz_m.is_some() {
            d0 = Some(r.clone());
        }
        prev = Some(r.clone());
        per_scale.push(r);
    }
    let divergent = d0.is_none() && space.n() > 1;
    SweepReport { per_scale, d0, divergent, monotonicity_violations: violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GeneratorSpec};

    #[test]
    fn collinear_detour() {
        // 3 collinear points at 0, 1, 2; eps = 1.5 forces the two-hop path.
        let s = crate::space::FiniteMetricSpace::validate_metric(
            &[
                vec![0.0, 1.0, 2.0],
                vec![1.0, 0.0, 1.0],
                vec![2.0, 1.0, 0.0],
            ],
            None,
            0.0,
        )
        .unwrap();
        let r = intrinsic_metric(&s, 1.5);
        assert_eq!(r.get(0, 2), Some(2.0));
        assert_eq!(r.lipschitz_m, Some(2));
    }

    #[test]
    fn two_point_disconnection() {
        let s = crate::space::FiniteMetricSpace::validate_metric(
            &[vec![0.0, 1.0], vec![1.0, 0.0]],
            None,
            0.0,
        )
        .unwrap();
        let above = intrinsic_metric(&s, 1.1);
        assert_eq!(above.get(0, 1), Some(1.0));
        let at = intrinsic_metric(&s, 1.0);
        assert_eq!(at.get(0, 1), None);
        assert_eq!(at.lipschitz_m, None);
    }

    #[test]
    fn geodesic_circle_is_already_intrinsic() {
        let s = generate(&GeneratorSpec::Circle { circumference: 1.0, n: 48 }).unwrap();
        let r = intrinsic_metric(&s, 0.1);
        for i in 0..48 {
            for j in 0..48 {
                let d = s.dist(i, j);
                let de = r.get(i, j).expect("connected");
                assert!((de - d).abs() <= 1e-9, "D_eps must equal d on the circle");
            }
        }
    }

    #[test]
    fn sweep_is_monotone_and_finds_d0() {
        let s = generate(&GeneratorSpec::Circle { circumference: 1.0, n: 16 }).unwrap();
        let sw = intrinsic_metric_sweep(&s);
        assert_eq!(sw.monotonicity_violations, 0);
        assert!(!sw.divergent);
        let d0 = sw.d0.unwrap();
        for i in 0..16 {
            for j in 0..16 {
                assert!((d0.get(i, j).unwrap() - s.dist(i, j)).abs() <= 1e-9);
            }
        }
    }
}
