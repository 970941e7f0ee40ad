//! Exact generators for the reference spaces.
//!
//! Every generator places the structurally relevant points (tooth tips,
//! gap endpoints, corners, wedge point) as sample points with exact
//! coordinates, so the distances that carry the critical-value structure
//! (gap lengths, diagonals) come out bit-identical wherever they recur.

use crate::space::FiniteMetricSpace;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GenerateError {
    #[error("mesh {mesh} too coarse: must be below {limit} (quarter of the smallest feature)")]
    MeshTooCoarse { mesh: f64, limit: f64 },
    #[error("invalid generator parameter: {0}")]
    BadParameter(String),
}

/// Which space to generate, with kind-specific parameters. The JSON form
/// uses `{"kind": "...", ...}` with kebab-case kind names.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    /// Geodesic circle of the given circumference, `n` evenly spaced points.
    Circle { circumference: f64, n: usize },
    /// Geodesic circle with an open arc of length `gap_fraction * circumference`
    /// removed between points `a` and `b`; subspace (through-gap) arc metric.
    CircleWithGap {
        circumference: f64,
        gap_fraction: f64,
        n: usize,
    },
    /// Boundary of a square of the given side, Euclidean metric from the plane.
    SquareBoundary { side: f64, mesh: f64 },
    /// Wedge of `circles` geodesic circles with circumferences
    /// `circumference / 2^i`, metric geodesic through the wedge point.
    HawaiianEarring {
        circumference: f64,
        circles: usize,
        mesh: f64,
    },
    /// Rapunzel's Comb: teeth `A_0..A_N` at heights `2^-k` plus `A_inf` at 0,
    /// sides `B_1`, `B_2`, top `C`; gaps of length exactly 1 at `(x_k, y_k)`.
    RapunzelCombV0 { teeth: usize, mesh: f64 },
    /// Variation 1: gap lengths `1 - 2^-n` increasing to the limit gap 1,
    /// tooth heights `2^(-n/2)`.
    RapunzelCombV1 { teeth: usize, mesh: f64 },
    /// Variation 2: same gaps as variation 1, taller teeth `sqrt(3)*2^(-n/2)`
    /// so every diagonal stays above 1.
    RapunzelCombV2 { teeth: usize, mesh: f64 },
    /// Variation 3: gap lengths `1 + 2^-n` decreasing to the limit gap 1,
    /// plus an extra pair of teeth past the limit whose tips `a`, `b` bridge
    /// the limit gap (`d(x_inf, b)` and `d(y_inf, a)` just under 1).
    RapunzelCombV3 { teeth: usize, mesh: f64 },
}

/// Point set under construction: exact-coordinate dedup, labels win over
/// anonymous mesh points.
struct PointSet {
    coords: Vec<[f64; 2]>,
    labels: Vec<Option<String>>,
    index: HashMap<(u64, u64), usize>,
}

impl PointSet {
    fn new() -> Self {
        PointSet {
            coords: Vec::new(),
            labels: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn push(&mut self, x: f64, y: f64, label: Option<&str>) -> usize {
        let key = (x.to_bits(), y.to_bits());
        let idx = *self.index.entry(key).or_insert_with(|| {
            self.coords.push([x, y]);
            self.labels.push(None);
            self.coords.len() - 1
        });
        if let Some(l) = label {
            self.labels[idx] = Some(l.to_string());
        }
        idx
    }

    /// Sample a straight segment at lattice pitch `mesh`, both endpoints
    /// included exactly.
    fn segment(&mut self, a: [f64; 2], b: [f64; 2], mesh: f64) {
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let steps = (len / mesh).round().max(1.0) as usize;
        for i in 0..=steps {
            let t = i as f64 / steps as f64;
            let x = if a[0] == b[0] { a[0] } else { a[0] + t * (b[0] - a[0]) };
            let y = if a[1] == b[1] { a[1] } else { a[1] + t * (b[1] - a[1]) };
            self.push(x, y, None);
        }
    }

    fn into_space(self) -> FiniteMetricSpace {
        let n = self.coords.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = self.coords[i][0] - self.coords[j][0];
                let dy = self.coords[i][1] - self.coords[j][1];
                let d = (dx * dx + dy * dy).sqrt();
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        let labels = self
            .labels
            .iter()
            .enumerate()
            .map(|(i, l)| l.clone().unwrap_or_else(|| format!("p{i}")))
            .collect();
        FiniteMetricSpace::from_parts(labels, dist, Some(self.coords))
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<FiniteMetricSpace, GenerateError> {
    match *spec {
        GeneratorSpec::Circle { circumference, n } => circle(circumference, n),
        GeneratorSpec::CircleWithGap {
            circumference,
            gap_fraction,
            n,
        } => circle_with_gap(circumference, gap_fraction, n),
        GeneratorSpec::SquareBoundary { side, mesh } => square_boundary(side, mesh),
        GeneratorSpec::HawaiianEarring {
            circumference,
            circles,
            mesh,
        } => hawaiian(circumference, circles, mesh),
        GeneratorSpec::RapunzelCombV0 { teeth, mesh } => comb_v0(teeth, mesh),
        GeneratorSpec::RapunzelCombV1 { teeth, mesh } => comb_v123(1, teeth, mesh),
        GeneratorSpec::RapunzelCombV2 { teeth, mesh } => comb_v123(2, teeth, mesh),
        GeneratorSpec::RapunzelCombV3 { teeth, mesh } => comb_v123(3, teeth, mesh),
    }
}

fn check_positive(v: f64, what: &str) -> Result<(), GenerateError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(GenerateError::BadParameter(format!("{what} must be positive, got {v}")))
    }
}

fn check_mesh(mesh: f64, feature: f64) -> Result<(), GenerateError> {
    check_positive(mesh, "mesh")?;
    let limit = feature / 4.0;
    if mesh >= limit {
        return Err(GenerateError::MeshTooCoarse { mesh, limit });
    }
    Ok(())
}

fn circle(circumference: f64, n: usize) -> Result<FiniteMetricSpace, GenerateError> {
    check_positive(circumference, "circumference")?;
    if n < 8 {
        return Err(GenerateError::MeshTooCoarse {
            mesh: circumference / n.max(1) as f64,
            limit: circumference / 8.0,
        });
    }
    let step = circumference / n as f64;
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let k = (j - i).min(n - (j - i));
            // Arc distance as a function of the index gap alone, so equal
            // gaps give bit-identical candidate scales.
            let d = k as f64 * step;
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    let labels = (0..n).map(|i| format!("t{i}")).collect();
    let r = circumference / (2.0 * std::f64::consts::PI);
    let coords = (0..n)
        .map(|i| {
            let ang = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            [r * ang.cos(), r * ang.sin()]
        })
        .collect();
    Ok(FiniteMetricSpace::from_parts(labels, dist, Some(coords)))
}

fn circle_with_gap(
    circumference: f64,
    gap_fraction: f64,
    n: usize,
) -> Result<FiniteMetricSpace, GenerateError> {
    check_positive(circumference, "circumference")?;
    if !(0.0..1.0).contains(&gap_fraction) || gap_fraction == 0.0 {
        return Err(GenerateError::BadParameter(format!(
            "gap_fraction must lie in (0,1), got {gap_fraction}"
        )));
    }
    if n < 3 {
        return Err(GenerateError::BadParameter("need at least 3 points".into()));
    }
    let arc = circumference * (1.0 - gap_fraction);
    let mesh = arc / (n - 1) as f64;
    check_mesh(mesh, circumference * gap_fraction)?;
    // Points sit on the closed arc from a to b the long way round; the
    // metric is the full circle's arc metric (subspace, not induced length),
    // so pairs may be closer through the gap.
    let step = arc / (n - 1) as f64;
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let along = (j - i) as f64 * step;
            let d = along.min(circumference - along);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    let mut labels: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    labels[0] = "a".to_string();
    labels[n - 1] = "b".to_string();
    let r = circumference / (2.0 * std::f64::consts::PI);
    let coords = (0..n)
        .map(|i| {
            let ang = 2.0 * std::f64::consts::PI * (i as f64 * step) / circumference;
            [r * ang.cos(), r * ang.sin()]
        })
        .collect();
    Ok(FiniteMetricSpace::from_parts(labels, dist, Some(coords)))
}

fn square_boundary(side: f64, mesh: f64) -> Result<FiniteMetricSpace, GenerateError> {
    check_positive(side, "side")?;
    check_mesh(mesh, side)?;
    let k = (side / mesh).round().max(2.0) as usize;
    let step = side / k as f64;
    let mut ps = PointSet::new();
    let corner = |i: usize| -> [f64; 2] {
        match i {
            0 => [0.0, 0.0],
            1 => [side, 0.0],
            2 => [side, side],
            _ => [0.0, side],
        }
    };
    // Same lattice expression on every side so opposite-side points align
    // exactly (their chord is then exactly `side`).
    for i in 0..=k {
        let t = i as f64 * step;
        ps.push(t, 0.0, None);
        ps.push(t, side, None);
        ps.push(0.0, t, None);
        ps.push(side, t, None);
    }
    for c in 0..4 {
        let [x, y] = corner(c);
        ps.push(x, y, Some(&format!("c{c}")));
    }
    Ok(ps.into_space())
}

fn hawaiian(
    circumference: f64,
    circles: usize,
    mesh: f64,
) -> Result<FiniteMetricSpace, GenerateError> {
    check_positive(circumference, "circumference")?;
    if circles == 0 {
        return Err(GenerateError::BadParameter("need at least one circle".into()));
    }
    let smallest = circumference / (1u64 << (circles - 1)) as f64;
    check_mesh(mesh, smallest)?;
    // Wedge of circles; distance within a circle is its arc metric, across
    // circles it is geodesic through the shared wedge point.
    struct P {
        circle: usize,
        t: f64,
        c: f64,
    }
    let mut pts: Vec<(P, String)> = Vec::new();
    pts.push((P { circle: usize::MAX, t: 0.0, c: 0.0 }, "w".to_string()));
    for ci in 0..circles {
        let c = circumference / (1u64 << ci) as f64;
        let m = ((c / mesh).round() as usize).max(4);
        for j in 1..m {
            let t = j as f64 * c / m as f64;
            pts.push((P { circle: ci, t, c }, format!("c{ci}_{j}")));
        }
    }
    let n = pts.len();
    let to_wedge = |p: &P| -> f64 {
        if p.circle == usize::MAX {
            0.0
        } else {
            p.t.min(p.c - p.t)
        }
    };
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (pi, pj) = (&pts[i].0, &pts[j].0);
            let d = if pi.circle == pj.circle {
                let a = (pi.t - pj.t).abs();
                a.min(pi.c - a)
            } else {
                to_wedge(pi) + to_wedge(pj)
            };
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    let labels = pts.into_iter().map(|(_, l)| l).collect();
    Ok(FiniteMetricSpace::from_parts(labels, dist, None))
}

fn comb_v0(teeth: usize, mesh: f64) -> Result<FiniteMetricSpace, GenerateError> {
    if teeth < 2 {
        return Err(GenerateError::BadParameter("need at least 2 teeth".into()));
    }
    // Smallest structural feature is the gap length 1 (the diagonals
    // d_k = sqrt(1 + 4^-k) are even closer to 1 from above).
    check_mesh(mesh, 1.0)?;
    let mut ps = PointSet::new();
    let heights: Vec<f64> = (0..=teeth).map(|k| 0.5f64.powi(k as i32)).collect();
    for (k, &h) in heights.iter().enumerate() {
        ps.segment([0.0, h], [1.0, h], mesh);
        ps.segment([2.0, h], [3.0, h], mesh);
        ps.push(1.0, h, Some(&format!("x{k}")));
        ps.push(2.0, h, Some(&format!("y{k}")));
    }
    // A_inf at height 0.
    ps.segment([0.0, 0.0], [1.0, 0.0], mesh);
    ps.segment([2.0, 0.0], [3.0, 0.0], mesh);
    ps.push(1.0, 0.0, Some("xinf"));
    ps.push(2.0, 0.0, Some("yinf"));
    // Sides and top.
    ps.segment([0.0, 0.0], [0.0, 2.0], mesh);
    ps.segment([3.0, 0.0], [3.0, 2.0], mesh);
    ps.segment([0.0, 2.0], [3.0, 2.0], mesh);
    ps.push(1.5, 2.0, Some("z0"));
    // Off-lattice tooth attachments on the sides.
    for &h in &heights {
        ps.push(0.0, h, None);
        ps.push(3.0, h, None);
    }
    Ok(ps.into_space())
}

/// Shared layout for comb variations 1-3: teeth n = 1..=N at cumulative
/// heights, a limit tooth at the series limit H, sides up to H + 2 and a
/// top bar C. Variation 3 adds the `a`,`b` teeth past the limit.
fn comb_v123(variant: usize, teeth: usize, mesh: f64) -> Result<FiniteMetricSpace, GenerateError> {
    if teeth < 2 {
        return Err(GenerateError::BadParameter("need at least 2 teeth".into()));
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    let (scale_h, gap_sign) = match variant {
        1 => (1.0, -1.0),          // gaps 1 - 2^-n, tips point inward
        2 => (3f64.sqrt(), -1.0),  // same gaps, heights sqrt(3) * 2^(-n/2)
        3 => (1.0, 1.0),           // gaps 1 + 2^-n, tips point outward
        _ => unreachable!(),
    };
    // V3 extra-teeth geometry: gap length l and drop h with
    // (1/2 + l/2)^2 + h^2 just under 1, all coordinates dyadic, so
    // d(x_inf, b) = d(y_inf, a) < 1 strictly (f64 cannot make it exactly 1).
    let l_v3 = 0.625;
    let h_v3 = 0.578125;
    let min_gap = match variant {
        1 | 2 => 1.0 - 0.5f64.powi(1),
        _ => l_v3,
    };
    check_mesh(mesh, min_gap)?;

    let h_n = |n: usize| scale_h * sqrt2.powi(-(n as i32));
    // Cumulative heights s_n = sum_{i<n} h_i; limit H = scale_h * (1 + sqrt2).
    let mut s = vec![0.0f64; teeth + 1];
    for n in 1..=teeth {
        s[n] = s[n - 1] + h_n(n);
    }
    let s_n = |n: usize| s[n - 1];
    let big_h = scale_h * (1.0 + sqrt2);
    let top = big_h + 2.0;

    let mut ps = PointSet::new();
    for n in 1..=teeth {
        let half = 0.5f64.powi(n as i32 + 1);
        let (lx, rx) = if gap_sign < 0.0 {
            (1.0 + half, 2.0 - half)
        } else {
            (1.0 - half, 2.0 + half)
        };
        let y = s_n(n);
        ps.segment([0.0, y], [lx, y], mesh);
        ps.segment([rx, y], [3.0, y], mesh);
        ps.push(lx, y, Some(&format!("x{n}")));
        ps.push(rx, y, Some(&format!("y{n}")));
    }
    // Limit tooth.
    ps.segment([0.0, big_h], [1.0, big_h], mesh);
    ps.segment([2.0, big_h], [3.0, big_h], mesh);
    ps.push(1.0, big_h, Some("xinf"));
    ps.push(2.0, big_h, Some("yinf"));
    if variant == 3 {
        let ay = big_h + h_v3;
        let ax = 1.5 - l_v3 / 2.0;
        let bx = 1.5 + l_v3 / 2.0;
        ps.segment([0.0, ay], [ax, ay], mesh);
        ps.segment([bx, ay], [3.0, ay], mesh);
        ps.push(ax, ay, Some("a"));
        ps.push(bx, ay, Some("b"));
    }
    ps.segment([0.0, 0.0], [0.0, top], mesh);
    ps.segment([3.0, 0.0], [3.0, top], mesh);
    ps.segment([0.0, top], [3.0, top], mesh);
    ps.push(1.5, top, Some("z0"));
    for n in 1..=teeth {
        ps.push(0.0, s_n(n), None);
        ps.push(3.0, s_n(n), None);
    }
    ps.push(0.0, big_h, None);
    ps.push(3.0, big_h, None);
    if variant == 3 {
        ps.push(0.0, big_h + h_v3, None);
        ps.push(3.0, big_h + h_v3, None);
    }
    Ok(ps.into_space())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_even_spacing() {
        let s = generate(&GeneratorSpec::Circle { circumference: 1.0, n: 200 }).unwrap();
        assert_eq!(s.n(), 200);
        let mut max_adj = 0.0f64;
        for i in 0..200 {
            max_adj = max_adj.max(s.dist(i, (i + 1) % 200));
        }
        assert!((max_adj - 1.0 / 200.0).abs() < 1e-15);
        // 4 evenly spaced points on circumference 1: candidate scales 0.25, 0.5.
        let s4 = generate(&GeneratorSpec::Circle { circumference: 1.0, n: 8 }).unwrap();
        let c = s4.candidate_scales();
        assert_eq!(c.len(), 4);
        assert!((c[0] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn circle_with_gap_has_exact_gap_pair() {
        let s = generate(&GeneratorSpec::CircleWithGap {
            circumference: 1.0,
            gap_fraction: 0.25,
            n: 200,
        })
        .unwrap();
        let a = s.index_of("a").unwrap();
        let b = s.index_of("b").unwrap();
        assert!((s.dist(a, b) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn comb_v0_gap_and_diagonal_structure() {
        let s = generate(&GeneratorSpec::RapunzelCombV0 { teeth: 6, mesh: 1.0 / 32.0 }).unwrap();
        for k in 0..=6 {
            let x = s.index_of(&format!("x{k}")).unwrap();
            let y = s.index_of(&format!("y{k}")).unwrap();
            assert_eq!(s.dist(x, y), 1.0, "gap (x{k},y{k}) must be exactly 1");
        }
        let xi = s.index_of("xinf").unwrap();
        let yi = s.index_of("yinf").unwrap();
        assert_eq!(s.dist(xi, yi), 1.0);
        // d_n = d(x_{n-1}, y_n) = sqrt(1 + 4^-n), and d_0 = d(x0, z0) = d_1.
        for n in 1..=6usize {
            let x = s.index_of(&format!("x{}", n - 1)).unwrap();
            let y = s.index_of(&format!("y{n}")).unwrap();
            let want = (1.0 + 0.25f64.powi(n as i32)).sqrt();
            let got = s.dist(x, y);
            assert!(
                (got - want).abs() <= 1e-12 * want,
                "d_{n} = {got}, want {want}"
            );
        }
        let x0 = s.index_of("x0").unwrap();
        let z0 = s.index_of("z0").unwrap();
        let y1 = s.index_of("y1").unwrap();
        assert_eq!(s.dist(x0, z0), s.dist(x0, y1), "d_0 = d_1");
    }

    #[test]
    fn comb_v2_diagonal_formula() {
        // d_n^2 = 1 + 3/2^(n+1) + 9/2^(2n+4) for the variation-2 diagonals.
        let s = generate(&GeneratorSpec::RapunzelCombV2 { teeth: 5, mesh: 1.0 / 32.0 }).unwrap();
        for n in 1..5usize {
            let x = s.index_of(&format!("x{n}")).unwrap();
            let y = s.index_of(&format!("y{}", n + 1)).unwrap();
            let want =
                (1.0 + 3.0 * 0.5f64.powi(n as i32 + 1) + 9.0 * 0.5f64.powi(2 * n as i32 + 4))
                    .sqrt();
            assert!((s.dist(x, y) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn comb_v3_bridge_distances() {
        let s = generate(&GeneratorSpec::RapunzelCombV3 { teeth: 4, mesh: 1.0 / 32.0 }).unwrap();
        let (xi, yi) = (s.index_of("xinf").unwrap(), s.index_of("yinf").unwrap());
        let (a, b) = (s.index_of("a").unwrap(), s.index_of("b").unwrap());
        assert_eq!(s.dist(xi, yi), 1.0);
        assert!(s.dist(a, b) < 1.0);
        // The bridge hops are strictly below 1, the cross distances just under 1.
        assert!(s.dist(xi, a) < 1.0);
        assert!(s.dist(yi, b) < 1.0);
        assert!(s.dist(xi, b) < 1.0 && s.dist(xi, b) > 0.99);
        assert!(s.dist(yi, a) < 1.0 && s.dist(yi, a) > 0.99);
        // Gap lengths 1 + 2^-n.
        for n in 1..=4usize {
            let x = s.index_of(&format!("x{n}")).unwrap();
            let y = s.index_of(&format!("y{n}")).unwrap();
            assert_eq!(s.dist(x, y), 1.0 + 0.5f64.powi(n as i32));
        }
    }

    #[test]
    fn mesh_too_coarse_rejected() {
        let err = generate(&GeneratorSpec::RapunzelCombV0 { teeth: 4, mesh: 0.3 }).unwrap_err();
        assert!(matches!(err, GenerateError::MeshTooCoarse { .. }));
    }

    #[test]
    fn generated_spaces_validate_as_metrics() {
        for spec in [
            GeneratorSpec::Circle { circumference: 1.0, n: 24 },
            GeneratorSpec::CircleWithGap { circumference: 1.0, gap_fraction: 0.25, n: 24 },
            GeneratorSpec::SquareBoundary { side: 1.0, mesh: 0.125 },
            GeneratorSpec::HawaiianEarring { circumference: 1.0, circles: 2, mesh: 0.1 },
            GeneratorSpec::RapunzelCombV0 { teeth: 3, mesh: 0.125 },
            GeneratorSpec::RapunzelCombV1 { teeth: 3, mesh: 0.0625 },
            GeneratorSpec::RapunzelCombV3 { teeth: 3, mesh: 0.125 },
        ] {
            let s = generate(&spec).unwrap();
            let tol = 1e-9 * s.diameter();
            FiniteMetricSpace::validate_metric(&s.rows(), None, tol)
                .unwrap_or_else(|e| panic!("{spec:?}: {e}"));
        }
    }
}
