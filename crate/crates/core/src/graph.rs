//! The eps-graph and its triangle 2-cells.
//!
//! Edges are pairs at distance strictly below the scale; triangles are
//! triples pairwise strictly below. Since point removal inside a chain
//! needs `d(prev, next) < eps`, triangles are exactly the 2-cells of the
//! discrete homotopy relation, and the complex is flag: the triangle set
//! is determined by the edge set.

use crate::space::FiniteMetricSpace;

#[derive(Debug, Clone)]
pub struct EpsilonGraph {
    /// Query scale (strict bound).
    pub scale: f64,
    /// Largest pairwise distance below `scale`; edges are `d <= threshold`.
    pub threshold: Option<f64>,
    pub n: usize,
    pub edges: Vec<(u32, u32)>,
    adj: Vec<Vec<u32>>,
    bits: Vec<u64>,
    words: usize,
    component: Vec<u32>,
}

impl EpsilonGraph {
    pub fn build(space: &FiniteMetricSpace, eps: f64) -> EpsilonGraph {
        let n = space.n();
        let words = n.div_ceil(64);
        let mut edges = Vec::new();
        let mut adj = vec![Vec::new(); n];
        let mut bits = vec![0u64; n * words];
        let mut threshold: Option<f64> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = space.dist(i, j);
                if d < eps {
                    edges.push((i as u32, j as u32));
                    adj[i].push(j as u32);
                    adj[j].push(i as u32);
                    bits[i * words + j / 64] |= 1 << (j % 64);
                    bits[j * words + i / 64] |= 1 << (i % 64);
                    threshold = Some(threshold.map_or(d, |t: f64| t.max(d)));
                }
            }
        }
        let mut g = EpsilonGraph {
            scale: eps,
            threshold,
            n,
            edges,
            adj,
            bits,
            words,
            component: vec![0; n],
        };
        g.label_components();
        g
    }

    fn label_components(&mut self) {
        let mut comp = vec![u32::MAX; self.n];
        let mut next = 0u32;
        let mut stack = Vec::new();
        for start in 0..self.n {
            if comp[start] != u32::MAX {
                continue;
            }
            comp[start] = next;
            stack.push(start as u32);
            while let Some(v) = stack.pop() {
                for &w in &self.adj[v as usize] {
                    if comp[w as usize] == u32::MAX {
                        comp[w as usize] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        self.component = comp;
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.adj[i]
    }

    pub fn component_of(&self, i: usize) -> u32 {
        self.component[i]
    }

    pub fn component_count(&self) -> usize {
        self.component.iter().copied().max().map_or(0, |m| m as usize + 1)
    }

    pub fn same_component(&self, i: usize, j: usize) -> bool {
        self.component[i] == self.component[j]
    }

    /// Iterate over common neighbors of `i` and `j` (the triangle apexes
    /// over that edge).
    pub fn common_neighbors(&self, i: usize, j: usize) -> Vec<u32> {
        let mut out = Vec::new();
        let (ri, rj) = (
            &self.bits[i * self.words..(i + 1) * self.words],
            &self.bits[j * self.words..(j + 1) * self.words],
        );
        for w in 0..self.words {
            let mut m = ri[w] & rj[w];
            while m != 0 {
                let b = m.trailing_zeros() as usize;
                out.push((w * 64 + b) as u32);
                m &= m - 1;
            }
        }
        out
    }

    pub fn has_common_neighbor(&self, i: usize, j: usize) -> bool {
        let (ri, rj) = (
            &self.bits[i * self.words..(i + 1) * self.words],
            &self.bits[j * self.words..(j + 1) * self.words],
        );
        (0..self.words).any(|w| ri[w] & rj[w] != 0)
    }

    /// All triangles (i < j < k pairwise adjacent). Quadratic-in-degree;
    /// intended for small and mid-size graphs, the spectrum scan streams
    /// triangles incrementally instead.
    pub fn triangles(&self) -> Vec<(u32, u32, u32)> {
        let mut out = Vec::new();
        for &(i, j) in &self.edges {
            for k in self.common_neighbors(i as usize, j as usize) {
                if k > j {
                    out.push((i, j, k));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GeneratorSpec};

    fn two_point(d: f64) -> FiniteMetricSpace {
        FiniteMetricSpace::validate_metric(&[vec![0.0, d], vec![d, 0.0]], None, 0.0).unwrap()
    }

    #[test]
    fn strict_inequality_at_the_scale() {
        let s = two_point(1.0);
        let g = EpsilonGraph::build(&s, 1.0);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.component_count(), 2);
        let g = EpsilonGraph::build(&s, 1.5);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.component_count(), 1);
    }

    #[test]
    fn circle_sample_cycle_structure() {
        // n=12, arc metric, C=1, eps=0.2: edges up to arc 2/12, no triangle
        // collapses the cycle (the largest inscribed triangle needs arcs
        // summing to 1 with each < 0.2, impossible).
        let s = generate(&GeneratorSpec::Circle { circumference: 1.0, n: 12 }).unwrap();
        let g = EpsilonGraph::build(&s, 0.2);
        // arcs 1/12 and 2/12 qualify: 12 + 12 edges.
        assert_eq!(g.edge_count(), 24);
        assert_eq!(g.component_count(), 1);
        for (i, j, k) in g.triangles() {
            let (i, j, k) = (i as usize, j as usize, k as usize);
            let wrap = s.dist(i, j) + s.dist(j, k) + s.dist(i, k);
            assert!(wrap < 0.999, "no essential triangle at this scale");
        }
    }
}
