//! Presentation simplification: iterated relator-length reduction with
//! generator elimination, capped by a rewrite budget.
//!
//! The strategy is complete for the free and trivial groups arising from
//! planar samples, and elsewhere it stops with whatever relators remain so
//! callers can fall back to the cover machinery. Relators are indexed by
//! the generators they mention, so an elimination only touches the
//! relators it changes.

use crate::presentation::{free_reduce, gen_of, invert_word, Letter, Presentation};
use std::collections::{BTreeSet, BinaryHeap, HashMap};

#[derive(Debug, Clone)]
pub struct Simplified {
    /// Surviving generators, as indices into the original generator list.
    pub kept: Vec<u32>,
    /// Relators over the surviving generators (letters index `kept`).
    pub relators: Vec<Vec<Letter>>,
    /// Eliminated original generator -> replacement word over `kept`.
    resolved: HashMap<u32, Vec<Letter>>,
    /// Original generator -> position in `kept`.
    kept_pos: HashMap<u32, u32>,
    /// True when the rewrite budget ran out; `rewrite_word` then refuses.
    pub budget_exhausted: bool,
}

impl Simplified {
    pub fn is_free(&self) -> bool {
        self.relators.is_empty() && !self.budget_exhausted
    }

    pub fn rank(&self) -> usize {
        self.kept.len()
    }

    /// Rewrite a word over the original generators into the surviving ones,
    /// free-reduced. `None` when simplification was cut short by budget.
    pub fn rewrite_word(&self, word: &[Letter]) -> Option<Vec<Letter>> {
        if self.budget_exhausted {
            return None;
        }
        let mut out = Vec::with_capacity(word.len());
        for &l in word {
            let g = gen_of(l) as u32;
            if let Some(&p) = self.kept_pos.get(&g) {
                out.push((p + 1) as i32 * l.signum());
            } else {
                let rep = self.resolved.get(&g)?;
                if l > 0 {
                    out.extend_from_slice(rep);
                } else {
                    out.extend(invert_word(rep));
                }
            }
        }
        Some(free_reduce(&out))
    }
}

/// Cyclic free reduction: free-reduce, then cancel first against last.
fn cyclic_reduce(word: &[Letter]) -> Vec<Letter> {
    let mut w = free_reduce(word);
    while w.len() >= 2 && w[0] == -*w.last().unwrap() {
        w.pop();
        w.remove(0);
    }
    w
}

const MAX_RELATOR_LEN: usize = 256;

struct Work {
    /// Relators; `None` when consumed by an elimination or emptied.
    relators: Vec<Option<Vec<Letter>>>,
    /// Generator -> relator ids that may mention it (lazily cleaned).
    occ: Vec<BTreeSet<u32>>,
    /// Min-heap of (len, relator id); entries may be stale.
    heap: BinaryHeap<std::cmp::Reverse<(usize, u32)>>,
}

impl Work {
    fn push_heap(&mut self, rid: u32) {
        if let Some(r) = &self.relators[rid as usize] {
            self.heap.push(std::cmp::Reverse((r.len(), rid)));
        }
    }

    fn set_relator(&mut self, rid: u32, word: Vec<Letter>) {
        for &l in &word {
            self.occ[gen_of(l)].insert(rid);
        }
        if word.is_empty() {
            self.relators[rid as usize] = None;
        } else {
            self.relators[rid as usize] = Some(word);
            self.push_heap(rid);
        }
    }
}

/// Simplify a presentation. Deterministic: ties in the work queue break by
/// relator id; occurrence sets iterate in order.
pub fn simplify(p: &Presentation, rewrite_budget: usize) -> Simplified {
    let gens = p.generators.len();
    let mut work = Work {
        relators: Vec::with_capacity(p.relators.len()),
        occ: vec![BTreeSet::new(); gens],
        heap: BinaryHeap::new(),
    };
    {
        let mut seen = BTreeSet::new();
        for r in &p.relators {
            let w = cyclic_reduce(r);
            if w.is_empty() || !seen.insert(w.clone()) {
                continue;
            }
            let rid = work.relators.len() as u32;
            work.relators.push(None);
            work.set_relator(rid, w);
        }
    }

    let mut alive = vec![true; gens];
    let mut script: Vec<(u32, Vec<Letter>)> = Vec::new();
    let mut budget = rewrite_budget;
    let mut exhausted = false;
    let mut banned: BTreeSet<u32> = BTreeSet::new();

    while let Some(std::cmp::Reverse((len, rid))) = work.heap.pop() {
        let Some(r) = work.relators[rid as usize].clone() else {
            continue;
        };
        if r.len() != len {
            continue; // stale entry
        }
        // A generator occurring exactly once in r can be eliminated.
        let mut counts: HashMap<u32, usize> = HashMap::new();
        for &l in &r {
            *counts.entry(gen_of(l) as u32).or_insert(0) += 1;
        }
        let Some(pos) = r
            .iter()
            .position(|&l| counts[&(gen_of(l) as u32)] == 1 && !banned.contains(&(gen_of(l) as u32)))
        else {
            continue; // nothing eliminable here; leave the relator in place
        };
        let g = gen_of(r[pos]) as u32;
        // Rotate so the chosen letter leads: r = g^s . w  =>  g = w^(-s).
        let mut rot = r[pos..].to_vec();
        rot.extend_from_slice(&r[..pos]);
        let replacement = if rot[0] > 0 {
            invert_word(&rot[1..])
        } else {
            rot[1..].to_vec()
        };

        // Trial substitution into every relator mentioning g.
        let touched: Vec<u32> = work.occ[g as usize].iter().copied().collect();
        let mut updates: Vec<(u32, Vec<Letter>)> = Vec::new();
        let mut aborted = false;
        for &tid in &touched {
            if tid == rid {
                continue;
            }
            let Some(rel) = &work.relators[tid as usize] else {
                continue;
            };
            if !rel.iter().any(|&l| gen_of(l) as u32 == g) {
                continue; // stale occurrence
            }
            let mut out: Vec<Letter> = Vec::with_capacity(rel.len());
            for &l in rel {
                if gen_of(l) as u32 == g {
                    if l > 0 {
                        out.extend_from_slice(&replacement);
                    } else {
                        out.extend(invert_word(&replacement));
                    }
                } else {
                    out.push(l);
                }
            }
            if budget < out.len() {
                exhausted = true;
                break;
            }
            budget -= out.len();
            let out = cyclic_reduce(&out);
            if out.len() > MAX_RELATOR_LEN {
                aborted = true;
                break;
            }
            updates.push((tid, out));
        }
        if exhausted {
            break;
        }
        if aborted {
            banned.insert(g);
            work.push_heap(rid); // retry this relator with g banned
            continue;
        }
        alive[g as usize] = false;
        script.push((g, replacement));
        work.relators[rid as usize] = None;
        for (tid, word) in updates {
            work.relators[tid as usize] = None;
            work.set_relator(tid, word);
        }
        banned.clear();
    }

    let kept: Vec<u32> = (0..gens as u32).filter(|&g| alive[g as usize]).collect();
    let kept_pos: HashMap<u32, u32> = kept
        .iter()
        .enumerate()
        .map(|(i, &g)| (g, i as u32))
        .collect();

    // Resolve the script backwards so every replacement is over `kept`.
    let mut resolved: HashMap<u32, Vec<Letter>> = HashMap::new();
    for (g, rep) in script.iter().rev() {
        let mut out = Vec::new();
        let mut ok = true;
        for &l in rep {
            let h = gen_of(l) as u32;
            if let Some(&p0) = kept_pos.get(&h) {
                out.push((p0 + 1) as i32 * l.signum());
            } else if let Some(r) = resolved.get(&h) {
                if l > 0 {
                    out.extend_from_slice(r);
                } else {
                    out.extend(invert_word(r));
                }
            } else {
                ok = false;
                break;
            }
        }
        if ok {
            resolved.insert(*g, free_reduce(&out));
        } else {
            exhausted = true;
        }
    }

    let relators: Vec<Vec<Letter>> = work
        .relators
        .iter()
        .flatten()
        .map(|r| {
            r.iter()
                .map(|&l| (kept_pos[&(gen_of(l) as u32)] + 1) as i32 * l.signum())
                .collect()
        })
        .collect();

    Simplified {
        kept,
        relators,
        resolved,
        kept_pos,
        budget_exhausted: exhausted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GeneratorSpec};
    use crate::graph::EpsilonGraph;
    use crate::presentation::present_pi_eps;

    #[test]
    fn circle_simplifies_to_free_rank_one() {
        let s = generate(&GeneratorSpec::Circle { circumference: 1.0, n: 12 }).unwrap();
        let g = EpsilonGraph::build(&s, 0.2);
        let p = present_pi_eps(&s, &g, 0);
        let simp = simplify(&p, 1_000_000);
        assert!(simp.is_free());
        assert_eq!(simp.rank(), 1);
        // The winding loop rewrites to a single letter.
        let around: Vec<usize> = (0..12).chain([0]).collect();
        let w = p.word_of_chain(&around).unwrap();
        let rw = simp.rewrite_word(&w).unwrap();
        assert_eq!(rw.len(), 1);
        // Winding twice is the square of that letter.
        let twice: Vec<usize> = (0..12).chain(0..12).chain([0]).collect();
        let w2 = p.word_of_chain(&twice).unwrap();
        assert_eq!(simp.rewrite_word(&w2).unwrap().len(), 2);
    }

    #[test]
    fn triangle_simplifies_to_trivial() {
        let s = crate::space::FiniteMetricSpace::validate_metric(
            &[
                vec![0.0, 1.0, 1.0],
                vec![1.0, 0.0, 1.0],
                vec![1.0, 1.0, 0.0],
            ],
            None,
            0.0,
        )
        .unwrap();
        let g = EpsilonGraph::build(&s, 1.5);
        let p = present_pi_eps(&s, &g, 0);
        let simp = simplify(&p, 10_000);
        assert!(simp.is_free());
        assert_eq!(simp.rank(), 0);
        let w = p.word_of_chain(&[0, 1, 2, 0]).unwrap();
        assert_eq!(simp.rewrite_word(&w).unwrap(), Vec::<Letter>::new());
    }

    #[test]
    fn hawaiian_truncation_has_rank_two() {
        let s = generate(&GeneratorSpec::HawaiianEarring {
            circumference: 1.0,
            circles: 2,
            mesh: 0.05,
        })
        .unwrap();
        // eps below both d_i / 3 keeps both winding classes alive.
        let g = EpsilonGraph::build(&s, 0.12);
        let p = present_pi_eps(&s, &g, 0);
        let simp = simplify(&p, 1_000_000);
        assert!(simp.is_free());
        assert_eq!(simp.rank(), 2);
    }

    #[test]
    fn dense_circle_sample_simplifies_quickly() {
        let s = generate(&GeneratorSpec::Circle { circumference: 1.0, n: 100 }).unwrap();
        let g = EpsilonGraph::build(&s, 0.26);
        let p = present_pi_eps(&s, &g, 0);
        let simp = simplify(&p, 20_000_000);
        assert!(simp.is_free(), "relators left: {}", simp.relators.len());
        assert_eq!(simp.rank(), 1);
    }
}
