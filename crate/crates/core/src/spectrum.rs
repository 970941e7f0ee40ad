//! The critical-spectrum scan.
//!
//! Candidate scales are the distinct pairwise distances: under the strict
//! chain inequality the eps-graph is constant on the intervals between
//! them, so those are the only places structure can change. For each
//! candidate above the connectivity floor the scan compares the intervals
//! just below and just above it:
//!
//! * non-injectivity of the bonding map (an essential loop dies) is read
//!   off a GF(2) persistence pairing over the filtration and confirmed at
//!   the homotopy level: the witness loop gets a NonNull certificate below
//!   and a verified null trace above;
//! * non-surjectivity (an unrefinable pair appears) is decided by a
//!   refinement sweep over the edges new at the candidate, with essential
//!   gaps certified through the gap-number machinery.
//!
//! Scales at or below the connectivity floor are sampling artifacts (the
//! space is not even chain-connected there) and are excluded, mirroring the
//! chain-connectedness hypothesis of the continuum definitions.

use crate::budget::Budgets;
use crate::chain::{Chain, HomotopyTrace};
use crate::gaps::GapCertificate;
use crate::homology::Persistence;
use crate::nullity::{decide_null, NonNullCertificate, NullityVerdict};
use crate::space::FiniteMetricSpace;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flag {
    Homotopy,
    Refinement,
    UpperNonInjective,
    UpperNonSurjective,
    Unknown,
}

#[derive(Debug, Clone, Serialize)]
pub struct LoopWitness {
    /// The essential loop (point indices, closed).
    pub points: Vec<usize>,
    pub labels: Vec<String>,
    /// Why it is non-null on the interval below the critical value.
    pub nonnull_below: NonNullCertificate,
    /// Verified contraction on the interval above.
    pub null_above: HomotopyTrace,
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub loops: Vec<LoopWitness>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub gaps: Vec<GapCertificate>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalValue {
    pub value: f64,
    pub flags: BTreeSet<Flag>,
    pub witness: Witness,
}

#[derive(Debug, Clone, Serialize)]
pub struct Consistency {
    /// (a) On a finite candidate set the closure is trivial, so the report
    /// must satisfy Cr = H + R exactly: every critical value carries a
    /// homotopy or refinement flag (or an honest unknown).
    pub spectrum_decomposition: bool,
    /// (b) Every reported value is isolated and classified, matching the
    /// isolated-critical-value theorem.
    pub isolated_classification: bool,
    /// (c) For every certified gap, the balls just above the gap length are
    /// not chain-connected inside themselves (local connectivity).
    pub gap_ball_disconnection: bool,
    /// (d) Surviving homology births and refinement flags tell one story.
    pub birth_refinement_agreement: bool,
    /// Lower non-injective / non-surjective flags never appear on finite
    /// spaces (they need infinitely many critical values below).
    pub no_lower_flags: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

impl Consistency {
    pub fn all_ok(&self) -> bool {
        self.spectrum_decomposition
            && self.isolated_classification
            && self.gap_ball_disconnection
            && self.birth_refinement_agreement
            && self.no_lower_flags
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpaceSummary {
    pub n: usize,
    pub diameter: f64,
    pub connectivity_floor: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub space: SpaceSummary,
    /// Candidate scales examined (above the connectivity floor).
    pub candidates: Vec<f64>,
    pub critical_values: Vec<CriticalValue>,
    pub consistency: Consistency,
    pub unknown_count: usize,
}

impl SpectrumReport {
    pub fn values_with(&self, flag: Flag) -> Vec<f64> {
        self.critical_values
            .iter()
            .filter(|cv| cv.flags.contains(&flag))
            .map(|cv| cv.value)
            .collect()
    }
}

struct Accumulator {
    values: BTreeMap<u64, CriticalValue>,
    unknown_count: usize,
}

impl Accumulator {
    fn entry(&mut self, value: f64) -> &mut CriticalValue {
        self.values
            .entry(value.to_bits())
            .or_insert_with(|| CriticalValue {
                value,
                flags: BTreeSet::new(),
                witness: Witness { loops: vec![], gaps: vec![], notes: vec![] },
            })
    }
}

/// Scan the whole spectrum. Deterministic for a fixed space and budgets.
pub fn compute_spectrum(space: &FiniteMetricSpace, budgets: &Budgets) -> SpectrumReport {
    let n = space.n();
    let cands = space.candidate_scales();
    let floor = space.connectivity_threshold();
    let diameter = space.diameter();

    // Edges grouped per candidate, ascending; ids in insertion order.
    let words = n.div_ceil(64);
    let mut adj = vec![0u64; n * words];
    let mut edge_id = vec![u32::MAX; n * n];
    let mut ph = Persistence::new(n);

    // Deaths and alive births per candidate index (flag-eligible only).
    struct DeathRec {
        value: f64,
        next_value: f64,
        witness_cycle: Vec<u32>,
    }
    let mut deaths: Vec<DeathRec> = Vec::new();
    let mut birth_survivors: BTreeMap<u64, usize> = BTreeMap::new();
    let mut refinement_flags: Vec<(f64, GapCertificate)> = Vec::new();
    let mut unknown_flags: Vec<(f64, String)> = Vec::new();
    let mut examined: Vec<f64> = Vec::new();

    let floor_idx = cands.partition_point(|&c| c <= floor);

    for (ci, &cval) in cands.iter().enumerate() {
        let eligible = ci >= floor_idx; // the interval below is connected
        if eligible {
            examined.push(cval);
        }
        let next_value = cands.get(ci + 1).copied().unwrap_or(diameter * 2.0);
        // Collect this batch of edges.
        let mut batch: Vec<(u32, u32)> = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if space.dist(i, j) == cval {
                    batch.push((i as u32, j as u32));
                }
            }
        }

        // Refinement sweep before the batch joins the graph: the lo side is
        // the current adjacency.
        if eligible {
            for &(u, v) in &batch {
                let (x, y) = (u as usize, v as usize);
                // One-insert fast path: common lo-neighbor.
                let mut refinable = false;
                for w in 0..words {
                    if adj[x * words + w] & adj[y * words + w] != 0 {
                        refinable = true;
                        break;
                    }
                }
                // Two-insert fast path.
                if !refinable {
                    'two: for z in 0..n {
                        if adj[x * words + z / 64] >> (z % 64) & 1 == 0 || space.dist(z, y) > cval
                        {
                            continue;
                        }
                        for w in 0..words {
                            if adj[z * words + w] & adj[y * words + w] != 0 {
                                refinable = true;
                                break 'two;
                            }
                        }
                    }
                }
                if refinable {
                    continue;
                }
                // Gap certificate?
                if let Some(cert) = crate::gaps::certify_essential_gap(space, x, y, None) {
                    refinement_flags.push((cval, cert));
                    continue;
                }
                // Bounded search; honest unknown if it finds nothing.
                let chain = Chain { points: vec![x, y], scale: next_value };
                match crate::oracle::refine_oracle(
                    space,
                    next_value,
                    cval,
                    &chain,
                    6 + budgets.search_slack,
                    budgets.search_nodes / 4,
                ) {
                    crate::oracle::RefineAnswer::Refinable(_) => {}
                    _ => unknown_flags.push((
                        cval,
                        format!(
                            "pair ({}, {}) neither refined nor certified as a gap",
                            space.label(x),
                            space.label(y)
                        ),
                    )),
                }
            }
        }

        // Insert the batch.
        for &(u, v) in &batch {
            let (id, _born) = ph.add_edge(u, v, cval);
            edge_id[u as usize * n + v as usize] = id;
            edge_id[v as usize * n + u as usize] = id;
            adj[u as usize * words + v as usize / 64] |= 1 << (v as usize % 64);
            adj[v as usize * words + u as usize / 64] |= 1 << (u as usize % 64);
        }

        // Triangles whose maximal (by id) edge arrived in this batch.
        for &(u, v) in &batch {
            let (x, y) = (u as usize, v as usize);
            let eid = edge_id[x * n + y];
            for w in 0..words {
                let mut m = adj[x * words + w] & adj[y * words + w];
                while m != 0 {
                    let b = m.trailing_zeros() as usize;
                    m &= m - 1;
                    let z = w * 64 + b;
                    let a = edge_id[x * n + z];
                    let c = edge_id[y * n + z];
                    if a < eid && c < eid {
                        if let Some(death) = ph.add_triangle(eid, a, c) {
                            let birth_value = ph.edge_value[death.birth_edge as usize];
                            if eligible && birth_value < cval {
                                deaths.push(DeathRec {
                                    value: cval,
                                    next_value,
                                    witness_cycle: death.witness_cycle,
                                });
                            }
                        }
                    }
                }
            }
        }

        // Births still alive after the batch: H_1 grew across this candidate.
        if eligible {
            let survivors = ph
                .alive()
                .iter()
                .filter(|&&e| ph.edge_value[e as usize] == cval)
                .count();
            if survivors > 0 {
                birth_survivors.insert(cval.to_bits(), survivors);
            }
        }
    }

    // Confirm deaths at the homotopy level and assemble flags.
    let mut acc = Accumulator { values: BTreeMap::new(), unknown_count: 0 };
    let mut failures: Vec<String> = Vec::new();

    for d in &deaths {
        let Some(points) = cycle_points(&ph, &d.witness_cycle) else {
            failures.push(format!("no loop from witness cycle at {}", d.value));
            continue;
        };
        // Alive on the interval below: certified by the persistence pairing
        // itself (the reduced column is a cycle that is not a boundary
        // below the death value).
        let nonnull_below = NonNullCertificate::H1Nonzero {
            method: "gf2-persistence".to_string(),
        };
        let hi_loop = Chain { points: points.clone(), scale: d.next_value };
        debug_assert!(hi_loop.is_valid(space));
        match decide_null(space, &hi_loop, budgets) {
            NullityVerdict::Null(trace) => {
                let cv = acc.entry(d.value);
                cv.flags.insert(Flag::Homotopy);
                cv.flags.insert(Flag::UpperNonInjective);
                if cv.witness.loops.is_empty() {
                    cv.witness.loops.push(LoopWitness {
                        labels: points.iter().map(|&p| space.label(p).to_string()).collect(),
                        points,
                        nonnull_below,
                        null_above: trace,
                    });
                }
            }
            NullityVerdict::NonNull(_) => {
                // Homology death invisible to homotopy: record honestly.
                let cv = acc.entry(d.value);
                cv.flags.insert(Flag::Unknown);
                cv.witness.notes.push(
                    "H1 class died but its representative stayed non-null above".to_string(),
                );
                acc.unknown_count += 1;
            }
            NullityVerdict::Unknown(r) => {
                let cv = acc.entry(d.value);
                cv.flags.insert(Flag::Unknown);
                cv.witness
                    .notes
                    .push(format!("null confirmation exhausted: {}", r.stage));
                acc.unknown_count += 1;
            }
        }
    }

    for (value, cert) in refinement_flags {
        let cv = acc.entry(value);
        cv.flags.insert(Flag::Refinement);
        cv.flags.insert(Flag::UpperNonSurjective);
        cv.witness.gaps.push(cert);
    }
    for (value, note) in unknown_flags {
        let cv = acc.entry(value);
        cv.flags.insert(Flag::Unknown);
        cv.witness.notes.push(note);
        acc.unknown_count += 1;
    }

    // Consistency block.
    let critical_values: Vec<CriticalValue> = acc.values.into_values().collect();
    let spectrum_decomposition = critical_values.iter().all(|cv| {
        cv.flags.contains(&Flag::Homotopy)
            || cv.flags.contains(&Flag::Refinement)
            || cv.flags.contains(&Flag::Unknown)
    });
    if !spectrum_decomposition {
        failures.push("a critical value carries neither homotopy nor refinement".into());
    }
    let isolated_classification = spectrum_decomposition; // finite sets: same check
    let mut gap_ball_disconnection = true;
    for cv in &critical_values {
        for cert in &cv.witness.gaps {
            if !gap_balls_disconnected(space, cert) {
                gap_ball_disconnection = false;
                failures.push(format!(
                    "gap ({}, {}): balls stay connected above the gap length",
                    space.label(cert.pair.0),
                    space.label(cert.pair.1)
                ));
            }
        }
    }
    let mut birth_refinement_agreement = true;
    for (&vbits, &count) in &birth_survivors {
        let v = f64::from_bits(vbits);
        let flagged = critical_values.iter().any(|cv| {
            cv.value == v
                && (cv.flags.contains(&Flag::Refinement) || cv.flags.contains(&Flag::Unknown))
        });
        if !flagged {
            birth_refinement_agreement = false;
            failures.push(format!(
                "{count} H1 class(es) born and surviving at {v} without a refinement flag"
            ));
        }
    }
    let consistency = Consistency {
        spectrum_decomposition,
        isolated_classification,
        gap_ball_disconnection,
        birth_refinement_agreement,
        no_lower_flags: true, // the classifier cannot emit them
        failures,
    };

    SpectrumReport {
        space: SpaceSummary { n, diameter, connectivity_floor: floor },
        candidates: examined,
        critical_values,
        consistency,
        unknown_count: acc.unknown_count,
    }
}

/// Witness cycle (edge ids) to a closed point walk, if it forms one.
fn cycle_points(ph: &Persistence, support: &[u32]) -> Option<Vec<usize>> {
    if support.is_empty() {
        return None;
    }
    let walk = ph.cycle_walk(support);
    if walk.len() >= 4 && walk.first() == walk.last() {
        Some(walk)
    } else {
        None
    }
}

/// Local-connectivity consequence of an essential gap: for delta just above
/// the gap length, x and y cannot be joined inside B(x, delta) by hops
/// below the gap length (and symmetrically for B(y, delta)).
fn gap_balls_disconnected(space: &FiniteMetricSpace, cert: &GapCertificate) -> bool {
    let (x, y) = cert.pair;
    let delta = cert.eps_star;
    let l = cert.l;
    for (cx, cy) in [(x, y), (y, x)] {
        let ball: Vec<usize> = (0..space.n())
            .filter(|&p| space.dist(p, cx) < delta)
            .collect();
        if !ball.contains(&cy) {
            continue;
        }
        // BFS within the ball along hops < l.
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        let mut stack = vec![cx];
        seen.insert(cx);
        while let Some(v) = stack.pop() {
            for &w in &ball {
                if !seen.contains(&w) && space.dist(v, w) < l {
                    seen.insert(w);
                    stack.push(w);
                }
            }
        }
        if seen.contains(&cy) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GeneratorSpec};

    #[test]
    fn small_circle_spectrum_is_one_third() {
        let s = generate(&GeneratorSpec::Circle { circumference: 1.0, n: 24 }).unwrap();
        let r = compute_spectrum(&s, &Budgets::default());
        assert_eq!(r.unknown_count, 0, "{:?}", r.critical_values);
        assert!(r.consistency.all_ok(), "{:?}", r.consistency.failures);
        let h = r.values_with(Flag::Homotopy);
        assert_eq!(h.len(), 1, "{:?}", r.critical_values);
        assert!((h[0] - 8.0 / 24.0).abs() < 1e-12, "got {}", h[0]);
        assert!(r.values_with(Flag::Refinement).is_empty());
        assert_eq!(r.critical_values.len(), 1);
        // The witness re-verifies.
        let w = &r.critical_values[0].witness.loops[0];
        crate::chain::verify_homotopy(&s, &w.null_above).unwrap();
    }

    #[test]
    fn small_gap_circle_spectrum() {
        let s = generate(&GeneratorSpec::CircleWithGap {
            circumference: 1.0,
            gap_fraction: 0.25,
            n: 40,
        })
        .unwrap();
        let r = compute_spectrum(&s, &Budgets::default());
        assert_eq!(r.unknown_count, 0, "{:?}", r.critical_values);
        assert!(r.consistency.all_ok(), "{:?}", r.consistency.failures);
        let refinement = r.values_with(Flag::Refinement);
        assert_eq!(refinement.len(), 1, "{:?}", r.critical_values);
        assert!((refinement[0] - 0.25).abs() < 2.0 / 40.0);
        let homotopy = r.values_with(Flag::Homotopy);
        assert_eq!(homotopy.len(), 1, "{:?}", r.critical_values);
        assert!((homotopy[0] - 1.0 / 3.0).abs() < 2.0 / 40.0, "got {}", homotopy[0]);
    }

    #[test]
    fn determinism_byte_identical() {
        let s = generate(&GeneratorSpec::CircleWithGap {
            circumference: 1.0,
            gap_fraction: 0.25,
            n: 30,
        })
        .unwrap();
        let a = compute_spectrum(&s, &Budgets::default());
        let b = compute_spectrum(&s, &Budgets::default());
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
