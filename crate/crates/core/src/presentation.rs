//! Spanning-tree presentations of the eps-group.
//!
//! The group of eps-homotopy classes of eps-loops is the edge-path group
//! of the eps-graph with its triangle 2-cells: one generator per non-tree
//! edge of a spanning tree, one relator per triangle. A chain maps to the
//! word of signed generators its steps traverse; tree steps contribute
//! nothing. Point insertion/removal inside a chain is exactly a triangle
//! (or backtrack) rewrite of that word, so the word of a chain is constant
//! on homotopy classes. The converse direction is what the definition-level
//! oracle in [`crate::oracle`] cross-checks.

use crate::graph::EpsilonGraph;
use crate::space::FiniteMetricSpace;
use std::collections::HashMap;

/// Signed generator letter: `+(g+1)` traverses generator `g` from its lower
/// to its higher endpoint, negative the other way.
pub type Letter = i32;

pub fn letter(gen: usize, forward: bool) -> Letter {
    let l = (gen + 1) as i32;
    if forward {
        l
    } else {
        -l
    }
}

pub fn gen_of(letter: Letter) -> usize {
    (letter.unsigned_abs() - 1) as usize
}

pub fn free_reduce(word: &[Letter]) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(word.len());
    for &l in word {
        if out.last().is_some_and(|&p| p == -l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

pub fn invert_word(word: &[Letter]) -> Vec<Letter> {
    word.iter().rev().map(|&l| -l).collect()
}

#[derive(Debug, Clone)]
pub struct Presentation {
    pub basepoint: usize,
    /// Non-tree edges (u < v) of the basepoint's component.
    pub generators: Vec<(u32, u32)>,
    /// Triangle relators, free-reduced, length 1..=3.
    pub relators: Vec<Vec<Letter>>,
    /// Components other than the basepoint's are ignored; their count is
    /// surfaced so callers can warn.
    pub ignored_components: usize,
    gen_of_edge: HashMap<(u32, u32), u32>,
    /// Tree parent per vertex (usize::MAX at the root / outside the component).
    parent: Vec<usize>,
    depth: Vec<u32>,
    in_component: Vec<bool>,
}

impl Presentation {
    pub fn in_component(&self, v: usize) -> bool {
        self.in_component[v]
    }

    /// Signed letter of one step, `None` for tree steps and self-steps.
    fn step_letter(&self, a: usize, b: usize) -> Result<Option<Letter>, String> {
        if a == b {
            return Ok(None);
        }
        if self.parent[a] == b || self.parent[b] == a {
            return Ok(None);
        }
        let key = (a.min(b) as u32, a.max(b) as u32);
        match self.gen_of_edge.get(&key) {
            Some(&g) => Ok(Some(letter(g as usize, a < b))),
            None => Err(format!("step ({a},{b}) is not an edge of the graph")),
        }
    }

    /// The word of a chain: product of its step letters, free-reduced.
    pub fn word_of_chain(&self, points: &[usize]) -> Result<Vec<Letter>, String> {
        let mut w = Vec::new();
        for s in points.windows(2) {
            if !self.in_component[s[0]] || !self.in_component[s[1]] {
                return Err(format!("point outside the basepoint component: {s:?}"));
            }
            if let Some(l) = self.step_letter(s[0], s[1])? {
                w.push(l);
            }
        }
        Ok(free_reduce(&w))
    }

    /// Path between two vertices through the spanning tree.
    pub fn tree_path(&self, a: usize, b: usize) -> Vec<usize> {
        let mut up_a = vec![a];
        let mut up_b = vec![b];
        let (mut x, mut y) = (a, b);
        while self.depth[x] > self.depth[y] {
            x = self.parent[x];
            up_a.push(x);
        }
        while self.depth[y] > self.depth[x] {
            y = self.parent[y];
            up_b.push(y);
        }
        while x != y {
            x = self.parent[x];
            y = self.parent[y];
            up_a.push(x);
            up_b.push(y);
        }
        up_b.pop();
        up_b.reverse();
        up_a.extend(up_b);
        up_a
    }

    /// The lasso loop of a generator: tree path to one endpoint, the edge,
    /// tree path back. Its word is the single generator letter.
    pub fn generator_lasso(&self, g: usize) -> Vec<usize> {
        let (u, v) = self.generators[g];
        let mut out = self.tree_path(self.basepoint, u as usize);
        let back = self.tree_path(v as usize, self.basepoint);
        out.extend(back);
        out
    }

    /// Abelianized relator matrix: one row per relator, one signed count per
    /// generator.
    pub fn relator_matrix(&self) -> Vec<Vec<i64>> {
        let g = self.generators.len();
        self.relators
            .iter()
            .map(|r| {
                let mut row = vec![0i64; g];
                for &l in r {
                    row[gen_of(l)] += l.signum() as i64;
                }
                row
            })
            .collect()
    }

    pub fn abelianized_word(&self, word: &[Letter]) -> Vec<i64> {
        let mut v = vec![0i64; self.generators.len()];
        for &l in word {
            v[gen_of(l)] += l.signum() as i64;
        }
        v
    }
}

/// Build the spanning-tree presentation for the component of `basepoint`.
/// The tree is the minimum-weight spanning tree by distance (lexicographic
/// index tiebreak), keeping tree words short.
pub fn present_pi_eps(
    space: &FiniteMetricSpace,
    graph: &EpsilonGraph,
    basepoint: usize,
) -> Presentation {
    present_graph(
        space.n(),
        &graph.edges,
        |a, b| space.dist(a as usize, b as usize),
        &graph.triangles(),
        basepoint,
    )
}

/// Same construction over an abstract weighted graph with explicit triangle
/// 2-cells (used for cover-ball complexes, whose vertices are homotopy
/// classes rather than space points).
pub fn present_graph(
    n: usize,
    all_edges: &[(u32, u32)],
    weight: impl Fn(u32, u32) -> f64,
    triangles: &[(u32, u32, u32)],
    basepoint: usize,
) -> Presentation {
    // Component of the basepoint.
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &(u, v) in all_edges {
        adj[u as usize].push(v);
        adj[v as usize].push(u);
    }
    let mut comp = vec![usize::MAX; n];
    let mut next_comp = 0usize;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = next_comp;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if comp[w as usize] == usize::MAX {
                    comp[w as usize] = next_comp;
                    stack.push(w as usize);
                }
            }
        }
        next_comp += 1;
    }
    let in_component: Vec<bool> = (0..n).map(|v| comp[v] == comp[basepoint]).collect();
    let ignored_components = next_comp - 1;

    // Kruskal on the component's edges.
    let mut edges: Vec<(u32, u32)> = all_edges
        .iter()
        .copied()
        .filter(|&(u, _)| in_component[u as usize])
        .collect();
    edges.sort_by(|&(a, b), &(c, d)| {
        weight(a, b)
            .partial_cmp(&weight(c, d))
            .unwrap()
            .then((a, b).cmp(&(c, d)))
    });
    let mut uf: Vec<u32> = (0..n as u32).collect();
    fn find(uf: &mut Vec<u32>, mut x: u32) -> u32 {
        while uf[x as usize] != x {
            uf[x as usize] = uf[uf[x as usize] as usize];
            x = uf[x as usize];
        }
        x
    }
    let mut tree_adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut generators = Vec::new();
    let mut gen_of_edge = HashMap::new();
    for (u, v) in edges {
        let (ru, rv) = (find(&mut uf, u), find(&mut uf, v));
        if ru != rv {
            uf[ru as usize] = rv;
            tree_adj[u as usize].push(v);
            tree_adj[v as usize].push(u);
        } else {
            gen_of_edge.insert((u, v), generators.len() as u32);
            generators.push((u, v));
        }
    }

    // Root the tree at the basepoint.
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![0u32; n];
    let mut order = vec![basepoint];
    let mut seen = vec![false; n];
    seen[basepoint] = true;
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for &w in &tree_adj[v] {
            let w = w as usize;
            if !seen[w] {
                seen[w] = true;
                parent[w] = v;
                depth[w] = depth[v] + 1;
                order.push(w);
            }
        }
    }

    let mut p = Presentation {
        basepoint,
        generators,
        relators: Vec::new(),
        ignored_components,
        gen_of_edge,
        parent,
        depth,
        in_component,
    };

    let mut relators = Vec::new();
    for &(i, j, k) in triangles {
        if !p.in_component[i as usize] {
            continue;
        }
        let (i, j, k) = (i as usize, j as usize, k as usize);
        let mut w = Vec::new();
        for (a, b) in [(i, j), (j, k), (k, i)] {
            if let Some(l) = p.step_letter(a, b).expect("triangle sides are edges") {
                w.push(l);
            }
        }
        let w = free_reduce(&w);
        if !w.is_empty() {
            relators.push(w);
        }
    }
    relators.sort();
    relators.dedup();
    p.relators = relators;
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GeneratorSpec};

    #[test]
    fn triangle_space_has_trivial_group() {
        // 3 points pairwise within scale: one generator, one relator that
        // kills it.
        let s = FiniteMetricSpace::validate_metric(
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
        assert_eq!(p.generators.len(), 1);
        assert_eq!(p.relators.len(), 1);
        assert_eq!(p.relators[0].len(), 1);
    }

    #[test]
    fn tree_graph_has_no_generators() {
        // Path 0 - 1 - 2 at eps below the long chord.
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
        let g = EpsilonGraph::build(&s, 1.5);
        let p = present_pi_eps(&s, &g, 0);
        assert!(p.generators.is_empty());
        assert!(p.relators.is_empty());
    }

    #[test]
    fn words_are_homotopy_invariant_under_moves() {
        let s = generate(&GeneratorSpec::Circle { circumference: 1.0, n: 12 }).unwrap();
        let g = EpsilonGraph::build(&s, 0.2);
        let p = present_pi_eps(&s, &g, 0);
        // Winding loop and a backtracking variant have the same word.
        let around: Vec<usize> = (0..12).chain([0]).collect();
        let mut wiggly: Vec<usize> = vec![0, 1, 2, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 0];
        let w1 = p.word_of_chain(&around).unwrap();
        let w2 = p.word_of_chain(&wiggly).unwrap();
        assert_eq!(w1, w2);
        wiggly.reverse();
        assert_eq!(p.word_of_chain(&wiggly).unwrap(), invert_word(&w1));
    }

    #[test]
    fn lasso_word_is_single_letter() {
        let s = generate(&GeneratorSpec::Circle { circumference: 1.0, n: 12 }).unwrap();
        let g = EpsilonGraph::build(&s, 0.2);
        let p = present_pi_eps(&s, &g, 3);
        for gi in 0..p.generators.len() {
            let lasso = p.generator_lasso(gi);
            assert_eq!(lasso[0], 3);
            assert_eq!(*lasso.last().unwrap(), 3);
            let w = p.word_of_chain(&lasso).unwrap();
            assert_eq!(w, vec![letter(gi, true)]);
        }
    }
}
