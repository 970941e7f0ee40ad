//! Finite metric spaces: validated symmetric distance matrices with labels.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A strictly positive scale. Chain steps require `d < scale` (strict).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Scale(pub f64);

impl Scale {
    pub fn new(value: f64) -> Option<Scale> {
        if value.is_finite() && value > 0.0 {
            Some(Scale(value))
        } else {
            None
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("matrix is not square: row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("entry ({i},{j}) is not finite")]
    NotFinite { i: usize, j: usize },
    #[error("matrix is asymmetric at ({i},{j}): {a} vs {b}")]
    AsymmetricMatrix { i: usize, j: usize, a: f64, b: f64 },
    #[error("negative distance at ({i},{j}): {value}")]
    NegativeDistance { i: usize, j: usize, value: f64 },
    #[error("nonzero diagonal at {i}: {value}")]
    NonzeroDiagonal { i: usize, value: f64 },
    #[error("zero distance between distinct points {i} and {j}")]
    ZeroOffDiagonal { i: usize, j: usize },
    #[error("triangle inequality violated: d({i},{k}) > d({i},{j}) + d({j},{k}) with slack {slack}")]
    TriangleViolation { i: usize, j: usize, k: usize, slack: f64 },
    #[error("space needs at least one point")]
    Empty,
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
}

/// A finite metric space: `n` labeled points and a validated symmetric
/// distance matrix. Immutable after construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    /// Row-major n*n distances.
    dist: Vec<f64>,
    /// Planar coordinates when the space came from a generator; only used
    /// for provenance and diagrams, never for distance queries.
    coords: Option<Vec<[f64; 2]>>,
    n: usize,
}

impl FiniteMetricSpace {
    /// Validate a raw matrix and build the space. The triangle inequality is
    /// checked up to `tol_metric` (additive slack); use 0 for exact data.
    pub fn validate_metric(
        rows: &[Vec<f64>],
        labels: Option<Vec<String>>,
        tol_metric: f64,
    ) -> Result<FiniteMetricSpace, MetricError> {
        let n = rows.len();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(MetricError::NotSquare { row, len: r.len(), n });
            }
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let v = rows[i][j];
                if !v.is_finite() {
                    return Err(MetricError::NotFinite { i, j });
                }
                if v < 0.0 {
                    return Err(MetricError::NegativeDistance { i, j, value: v });
                }
                dist[i * n + j] = v;
            }
        }
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return Err(MetricError::NonzeroDiagonal { i, value: dist[i * n + i] });
            }
            for j in (i + 1)..n {
                let a = dist[i * n + j];
                let b = dist[j * n + i];
                if a != b {
                    return Err(MetricError::AsymmetricMatrix { i, j, a, b });
                }
                if a == 0.0 {
                    return Err(MetricError::ZeroOffDiagonal { i, j });
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if j == i {
                    continue;
                }
                let dij = dist[i * n + j];
                for k in 0..n {
                    let slack = dist[i * n + k] - dij - dist[j * n + k];
                    if slack > tol_metric {
                        return Err(MetricError::TriangleViolation { i, j, k, slack });
                    }
                }
            }
        }
        let labels = match labels {
            Some(l) => {
                assert_eq!(l.len(), n, "label count must match point count");
                l
            }
            None => (0..n).map(|i| format!("p{i}")).collect(),
        };
        Ok(FiniteMetricSpace { labels, dist, coords: None, n })
    }

    /// Construct a space from exact generator output without the O(n^3)
    /// triangle scan. Callers must provide a genuine metric; generator
    /// self-checks (`validate_metric` with tiny tolerance) live in tests.
    pub(crate) fn from_parts(
        labels: Vec<String>,
        dist: Vec<f64>,
        coords: Option<Vec<[f64; 2]>>,
    ) -> FiniteMetricSpace {
        let n = labels.len();
        assert_eq!(dist.len(), n * n);
        if let Some(c) = &coords {
            assert_eq!(c.len(), n);
        }
        FiniteMetricSpace { labels, dist, coords, n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Result<usize, MetricError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| MetricError::UnknownLabel(label.to_string()))
    }

    pub fn coords(&self) -> Option<&[[f64; 2]]> {
        self.coords.as_deref()
    }

    pub fn diameter(&self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                d = d.max(self.dist(i, j));
            }
        }
        d
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.dist[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    /// Sorted distinct positive off-diagonal distances. The eps-graph, its
    /// triangle set and hence `pi_eps` are constant for eps in each interval
    /// `(delta_i, delta_{i+1}]`, so these are the only scales at which
    /// structure can change.
    pub fn candidate_scales(&self) -> Vec<f64> {
        let mut v: Vec<f64> = Vec::with_capacity(self.n * (self.n - 1) / 2);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                v.push(self.dist(i, j));
            }
        }
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup();
        v
    }

    /// Largest candidate scale strictly below `eps`: the edge threshold of
    /// the eps-graph (edges are pairs with `d <= threshold`). `None` when no
    /// pair is strictly within `eps` (empty graph).
    pub fn edge_threshold(&self, eps: f64) -> Option<f64> {
        let cands = self.candidate_scales();
        Self::threshold_in(&cands, eps)
    }

    /// Same as [`Self::edge_threshold`] against a precomputed candidate list.
    pub fn threshold_in(cands: &[f64], eps: f64) -> Option<f64> {
        match cands.partition_point(|&c| c < eps) {
            0 => None,
            k => Some(cands[k - 1]),
        }
    }

    /// Top of the candidate interval containing `eps`: the canonical
    /// representative scale (smallest candidate `>= eps`, or `eps` itself
    /// beyond the last candidate). Chains valid at `eps` are exactly the
    /// chains valid at the canonical scale.
    pub fn canonical_scale(&self, eps: f64) -> f64 {
        let cands = self.candidate_scales();
        match cands.partition_point(|&c| c < eps) {
            k if k < cands.len() => cands[k],
            _ => eps,
        }
    }

    /// Largest edge of a minimum spanning tree: the graph at scale eps is
    /// connected exactly when eps exceeds this. Structure at or below it is
    /// a sampling artifact, not geometry.
    pub fn connectivity_threshold(&self) -> f64 {
        let n = self.n;
        if n < 2 {
            return 0.0;
        }
        let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n as u32 {
            for j in (i + 1)..n as u32 {
                pairs.push((i, j));
            }
        }
        pairs.sort_by(|&(a, b), &(c, d)| {
            self.dist(a as usize, b as usize)
                .partial_cmp(&self.dist(c as usize, d as usize))
                .unwrap()
        });
        let mut uf: Vec<u32> = (0..n as u32).collect();
        fn find(uf: &mut [u32], mut x: u32) -> u32 {
            while uf[x as usize] != x {
                uf[x as usize] = uf[uf[x as usize] as usize];
                x = uf[x as usize];
            }
            x
        }
        let mut parts = n;
        let mut largest = 0.0f64;
        for (i, j) in pairs {
            let (ri, rj) = (find(&mut uf, i), find(&mut uf, j));
            if ri != rj {
                uf[ri as usize] = rj;
                largest = self.dist(i as usize, j as usize);
                parts -= 1;
                if parts == 1 {
                    break;
                }
            }
        }
        largest
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_nondegenerate_space_validates() {
        let s =
            FiniteMetricSpace::validate_metric(&[vec![0.0, 1.0], vec![1.0, 0.0]], None, 0.0)
                .unwrap();
        assert_eq!(s.n(), 2);
        assert_eq!(s.dist(0, 1), 1.0);
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let err = FiniteMetricSpace::validate_metric(
            &[vec![0.0, 1.0], vec![2.0, 0.0]],
            None,
            0.0,
        )
        .unwrap_err();
        assert!(matches!(err, MetricError::AsymmetricMatrix { i: 0, j: 1, .. }));
    }

    #[test]
    fn triangle_violation_reports_slack() {
        let err = FiniteMetricSpace::validate_metric(
            &[
                vec![0.0, 1.0, 5.0],
                vec![1.0, 0.0, 1.0],
                vec![5.0, 1.0, 0.0],
            ],
            None,
            0.0,
        )
        .unwrap_err();
        match err {
            MetricError::TriangleViolation { i, j, k, slack } => {
                assert_eq!((i, j, k), (0, 1, 2));
                assert_eq!(slack, 3.0);
            }
            other => panic!("expected TriangleViolation, got {other:?}"),
        }
    }

    #[test]
    fn candidate_scales_dedup_and_sort() {
        // 3-point path with distances {1,1,2}.
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
        assert_eq!(s.candidate_scales(), vec![1.0, 2.0]);

        let two = FiniteMetricSpace::validate_metric(
            &[vec![0.0, 5.0], vec![5.0, 0.0]],
            None,
            0.0,
        )
        .unwrap();
        assert_eq!(two.candidate_scales(), vec![5.0]);
    }

    #[test]
    fn thresholds_respect_strict_inequality() {
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
        assert_eq!(s.edge_threshold(1.0), None);
        assert_eq!(s.edge_threshold(1.5), Some(1.0));
        assert_eq!(s.edge_threshold(2.0), Some(1.0));
        assert_eq!(s.edge_threshold(2.5), Some(2.0));
        assert_eq!(s.canonical_scale(0.5), 1.0);
        assert_eq!(s.canonical_scale(1.0), 1.0);
        assert_eq!(s.canonical_scale(1.2), 2.0);
        assert_eq!(s.canonical_scale(7.0), 7.0);
    }
}
