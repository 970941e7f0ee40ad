//! Essential gaps: the gap-number invariant, pre-essential gap
//! certification and gap detection.
//!
//! A pair (x, y) at distance l is *pre-essential* at scale eps when the
//! balls B(x, eps - l), B(y, eps - l) are disjoint and can be separated:
//! no point outside both is strictly within eps of each. A valid partition
//! (Z, Y) exists exactly under that two-constraint point coloring, which is
//! how feasibility is checked. For a pre-essential pair the signed count of
//! ball-to-ball crossings of a chain (the gap number) is invariant under
//! basic moves, and since an l-chain cannot cross at all while {x, y}
//! crosses once, the pair is an essential l-gap whenever the structure
//! persists on an interval above l.

use crate::space::FiniteMetricSpace;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct GapCertificate {
    pub pair: (usize, usize),
    /// The gap length l = d(x, y).
    pub l: f64,
    /// Largest scale such that (l, eps_star] is entirely feasible.
    pub eps_star: f64,
    /// Tops of the feasibility subintervals in (l, hint], in order; the
    /// certificate is contiguous from l up to eps_star.
    pub feasible_scales: Vec<f64>,
    /// dist(B(x,r), B(y,r)) = l for small r. On a finite space small balls
    /// are singletons so this holds outright; recorded with its note.
    pub dist_condition: bool,
    pub dist_condition_note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapInfeasible {
    /// Scale (subinterval top) at which the conditions first fail.
    pub at_scale: f64,
    /// Violating point and the ball points it is strictly within eps of,
    /// when the failure is a separation violation; `None` when the balls
    /// themselves intersect.
    pub violator: Option<(usize, usize, usize)>,
}

/// The (x, y, eps)-gap number of a chain: net signed count of crossings
/// from B(x, eps-l) to B(y, eps-l). Meaningful as an invariant only when
/// the pair is pre-essential at eps; computed unconditionally.
pub fn gap_number(
    space: &FiniteMetricSpace,
    points: &[usize],
    x: usize,
    y: usize,
    eps: f64,
) -> i64 {
    let l = space.dist(x, y);
    let r = eps - l;
    let in_bx = |p: usize| space.dist(p, x) < r;
    let in_by = |p: usize| space.dist(p, y) < r;
    let mut total = 0i64;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if in_bx(a) && in_by(b) {
            total += 1;
        } else if in_by(a) && in_bx(b) {
            total -= 1;
        }
    }
    total
}

/// Feasibility of the pre-essential conditions on one subinterval (a, b]
/// of scales; all relevant comparisons are constant there. Returns the
/// violating triple (p, q in B_x, r in B_y) or the ball intersection point.
fn feasible_on(
    space: &FiniteMetricSpace,
    x: usize,
    y: usize,
    l: f64,
    a: f64,
) -> Result<(), Option<(usize, usize, usize)>> {
    let n = space.n();
    // Memberships: p in B_x(eps) for all eps in (a, b] iff d(p,x) + l <= a.
    let bx: Vec<bool> = (0..n).map(|p| space.dist(p, x) + l <= a).collect();
    let by: Vec<bool> = (0..n).map(|p| space.dist(p, y) + l <= a).collect();
    for p in 0..n {
        if bx[p] && by[p] {
            return Err(None);
        }
    }
    for p in 0..n {
        if bx[p] || by[p] {
            continue;
        }
        // Strictly-within thresholds are pairwise distances, hence
        // breakpoints: d < eps for all eps in (a,b] iff d <= a.
        let mut near_x: Option<usize> = None;
        let mut near_y: Option<usize> = None;
        for q in 0..n {
            if bx[q] && space.dist(p, q) <= a {
                near_x = Some(q);
            }
            if by[q] && space.dist(p, q) <= a {
                near_y = Some(q);
            }
        }
        if let (Some(q), Some(r)) = (near_x, near_y) {
            return Err(Some((p, q, r)));
        }
    }
    Ok(())
}

/// Scan candidate scales in (l, hint] for the pre-essential gap structure.
/// The default hint is the next candidate scale above l.
pub fn check_pre_essential_gap(
    space: &FiniteMetricSpace,
    x: usize,
    y: usize,
    eps_star_hint: Option<f64>,
) -> Result<GapCertificate, GapInfeasible> {
    assert_ne!(x, y);
    let l = space.dist(x, y);
    let cands = space.candidate_scales();
    let hint = eps_star_hint.unwrap_or_else(|| {
        match cands.partition_point(|&c| c <= l) {
            k if k < cands.len() => cands[k],
            _ => l * 1.5,
        }
    });

    // Breakpoints: candidate scales and ball-membership thresholds in (l, hint].
    let mut brk: Vec<f64> = Vec::new();
    for &c in &cands {
        if c > l && c <= hint {
            brk.push(c);
        }
    }
    for p in 0..space.n() {
        for v in [space.dist(p, x) + l, space.dist(p, y) + l] {
            if v > l && v < hint {
                brk.push(v);
            }
        }
    }
    brk.push(hint);
    brk.sort_by(|p, q| p.partial_cmp(q).unwrap());
    brk.dedup();

    let mut feasible_scales = Vec::new();
    let mut eps_star = l;
    let mut contiguous = true;
    let mut first_failure: Option<GapInfeasible> = None;
    let mut lower = l;
    for &b in &brk {
        match feasible_on(space, x, y, l, lower) {
            Ok(()) => {
                feasible_scales.push(b);
                if contiguous {
                    eps_star = b;
                }
            }
            Err(violator) => {
                contiguous = false;
                if first_failure.is_none() {
                    first_failure = Some(GapInfeasible { at_scale: b, violator });
                }
            }
        }
        lower = b;
    }

    if eps_star > l {
        Ok(GapCertificate {
            pair: (x, y),
            l,
            eps_star,
            feasible_scales,
            dist_condition: true,
            dist_condition_note: "finite-space-trivial: balls of radius below the minimum \
                                  positive distance are singletons, so dist(B(x,r),B(y,r)) = l"
                .to_string(),
        })
    } else {
        Err(first_failure.unwrap_or(GapInfeasible { at_scale: hint, violator: None }))
    }
}

/// Certify an essential gap: pre-essential on a nonempty interval above l
/// plus the (finite-space-trivial) distance condition. By the gap-number
/// argument {x, y} is then not eps-homotopic to an l-chain for any eps in
/// (l, eps_star].
pub fn certify_essential_gap(
    space: &FiniteMetricSpace,
    x: usize,
    y: usize,
    eps_star_hint: Option<f64>,
) -> Option<GapCertificate> {
    check_pre_essential_gap(space, x, y, eps_star_hint).ok()
}

/// Cheap elimination: a pair can only carry a gap at the next candidate
/// scale up if no third point is within that scale of both endpoints (with
/// the balls effectively singletons) -- all reference examples fall in this
/// class.
fn quick_gap_candidate(space: &FiniteMetricSpace, x: usize, y: usize, next: f64) -> bool {
    let l = space.dist(x, y);
    let r = next - l;
    for p in 0..space.n() {
        if p == x || p == y {
            continue;
        }
        // Ball intersection or a doubly-close outside point at eps = next.
        let dx = space.dist(p, x);
        let dy = space.dist(p, y);
        if dx + l <= l + r && dy + l <= l + r {
            return false; // in both balls
        }
        let in_bx = dx < r;
        let in_by = dy < r;
        if !in_bx && !in_by && dx < next && dy < next {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, Serialize)]
pub struct GapScan {
    pub certificates: Vec<GapCertificate>,
    /// Pairs whose certificate contradicted the refinement search: a
    /// theorem-level inconsistency (bug witness).
    pub inconsistencies: Vec<(usize, usize)>,
}

/// Find every certified essential gap, cross-validated against the
/// refinement machinery: a certified gap must not admit an explicit
/// refinement trace at scales just above l.
///
/// Gaps are only sought above the connectivity threshold: below it the
/// space is not even l-chain-connected, so unrefinability there reflects
/// the sampling mesh, not the geometry (every adjacent mesh pair of a
/// curve sample would otherwise qualify).
pub fn detect_essential_gaps(space: &FiniteMetricSpace, budgets: &crate::budget::Budgets) -> GapScan {
    let cands = space.candidate_scales();
    let floor = space.connectivity_threshold();
    let mut certificates = Vec::new();
    let mut inconsistencies = Vec::new();
    let n = space.n();
    for x in 0..n {
        for y in (x + 1)..n {
            let l = space.dist(x, y);
            if l <= floor {
                continue;
            }
            let next = match cands.partition_point(|&c| c <= l) {
                k if k < cands.len() => cands[k],
                _ => continue, // diameter pair: nothing above
            };
            if !quick_gap_candidate(space, x, y, next) {
                continue;
            }
            let Some(cert) = certify_essential_gap(space, x, y, None) else {
                continue;
            };
            // Independent cross-check: an explicit refinement of {x,y} to an
            // l-chain at eps just above l would contradict the certificate.
            let hi = next;
            let chain = crate::chain::Chain { points: vec![x, y], scale: hi };
            let lo_graph = crate::graph::EpsilonGraph::build(space, l);
            let contradicted = lo_graph.common_neighbors(x, y).first().is_some()
                || matches!(
                    crate::oracle::refine_oracle(
                        space,
                        hi,
                        l,
                        &chain,
                        4 + budgets.search_slack,
                        budgets.search_nodes / 4,
                    ),
                    crate::oracle::RefineAnswer::Refinable(_)
                );
            if contradicted {
                inconsistencies.push((x, y));
            } else {
                certificates.push(cert);
            }
        }
    }
    GapScan { certificates, inconsistencies }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GeneratorSpec};

    #[test]
    fn constant_chain_has_gap_number_zero() {
        let s = generate(&GeneratorSpec::RapunzelCombV0 { teeth: 3, mesh: 0.125 }).unwrap();
        let x = s.index_of("x1").unwrap();
        let y = s.index_of("y1").unwrap();
        assert_eq!(gap_number(&s, &[x, x, x], x, y, 1.01), 0);
        // The pair itself crosses once.
        assert_eq!(gap_number(&s, &[x, y], x, y, 1.01), 1);
    }

    #[test]
    fn comb_pairs_are_essential_gaps() {
        let s = generate(&GeneratorSpec::RapunzelCombV0 { teeth: 4, mesh: 1.0 / 16.0 }).unwrap();
        for k in 0..=4 {
            let x = s.index_of(&format!("x{k}")).unwrap();
            let y = s.index_of(&format!("y{k}")).unwrap();
            let cert = certify_essential_gap(&s, x, y, None)
                .unwrap_or_else(|| panic!("(x{k},y{k}) must certify"));
            assert_eq!(cert.l, 1.0);
            assert!(cert.eps_star > 1.0);
        }
    }

    #[test]
    fn comb_loop_gap_number_is_minus_one() {
        let s = generate(&GeneratorSpec::RapunzelCombV0 { teeth: 4, mesh: 1.0 / 16.0 }).unwrap();
        for k in 0..4usize {
            let x = s.index_of(&format!("x{k}")).unwrap();
            let y = s.index_of(&format!("y{k}")).unwrap();
            let x1 = s.index_of(&format!("x{}", k + 1)).unwrap();
            let y1 = s.index_of(&format!("y{}", k + 1)).unwrap();
            let cert = certify_essential_gap(&s, x, y, None).unwrap();
            let eps = cert.eps_star;
            assert_eq!(gap_number(&s, &[x, x1, y1, y, x], x, y, eps), -1);
        }
    }

    #[test]
    fn circle_adjacent_pair_is_not_a_gap() {
        let s = generate(&GeneratorSpec::Circle { circumference: 1.0, n: 24 }).unwrap();
        let scan = detect_essential_gaps(&s, &crate::budget::Budgets::default());
        assert!(scan.certificates.is_empty(), "geodesic circle has no gaps");
        assert!(scan.inconsistencies.is_empty());
    }

    #[test]
    fn circle_with_gap_detects_the_pair() {
        let s = generate(&GeneratorSpec::CircleWithGap {
            circumference: 1.0,
            gap_fraction: 0.25,
            n: 60,
        })
        .unwrap();
        let scan = detect_essential_gaps(&s, &crate::budget::Budgets::default());
        assert!(scan.inconsistencies.is_empty());
        let a = s.index_of("a").unwrap();
        let b = s.index_of("b").unwrap();
        assert!(
            scan.certificates.iter().any(|c| c.pair == (a.min(b), a.max(b))),
            "gap (a,b) must certify; found {:?}",
            scan.certificates.iter().map(|c| c.pair).collect::<Vec<_>>()
        );
    }

    #[test]
    fn comb_v3_limit_pair_is_excluded() {
        let s = generate(&GeneratorSpec::RapunzelCombV3 { teeth: 3, mesh: 0.125 }).unwrap();
        let xi = s.index_of("xinf").unwrap();
        let yi = s.index_of("yinf").unwrap();
        assert!(
            certify_essential_gap(&s, xi, yi, None).is_none(),
            "the bridged limit pair must not certify"
        );
    }
}
