//! Integer Smith normal form and the abelianization certificate layer.
//!
//! Arithmetic is arbitrary-precision throughout, so entry growth during
//! elimination can never overflow.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

#[derive(Debug, Clone)]
pub struct SmithForm {
    /// Nonzero diagonal entries d_1 | d_2 | ... (positive).
    pub diagonal: Vec<BigInt>,
    pub rows: usize,
    pub cols: usize,
    /// Right transform: `S = U * A * V` with V unimodular cols x cols.
    /// Kept to answer row-lattice membership queries.
    pub v: Vec<Vec<BigInt>>,
}

/// H_1 of a presentation: cokernel of the abelianized relator matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct H1Invariants {
    pub free_rank: usize,
    /// Torsion coefficients > 1, each dividing the next.
    pub torsion: Vec<BigInt>,
}

fn to_big(m: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    m.iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

/// Smith normal form by pivoting on the smallest nonzero entry and clearing
/// its row and column with Euclidean steps.
pub fn smith_normal_form(matrix: &[Vec<i64>], cols: usize) -> SmithForm {
    let mut a = to_big(matrix);
    let rows = a.len();
    let mut v: Vec<Vec<BigInt>> = (0..cols)
        .map(|i| {
            (0..cols)
                .map(|j| if i == j { BigInt::from(1) } else { BigInt::zero() })
                .collect()
        })
        .collect();
    let mut diagonal = Vec::new();
    let mut t = 0usize;

    'outer: while t < rows.min(cols) {
        // Locate the smallest-magnitude nonzero entry in the remaining block.
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero()
                    && pivot.is_none_or(|(pi, pj)| a[i][j].abs() < a[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else {
            break 'outer;
        };
        a.swap(t, pi);
        if pj != t {
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            for vr in v.iter_mut() {
                vr.swap(t, pj);
            }
        }

        loop {
            // Clear column t below/above by row operations.
            let mut dirty = false;
            for i in 0..rows {
                if i == t || a[i][t].is_zero() {
                    continue;
                }
                let q = &a[i][t] / &a[t][t];
                if !q.is_zero() {
                    for j in 0..cols {
                        let sub = &q * &a[t][j];
                        a[i][j] -= sub;
                    }
                }
                if !a[i][t].is_zero() {
                    a.swap(i, t);
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // Clear row t by column operations (mirrored into v).
            for j in 0..cols {
                if j == t || a[t][j].is_zero() {
                    continue;
                }
                let q = &a[t][j] / &a[t][t];
                if !q.is_zero() {
                    for row in a.iter_mut() {
                        let sub = &q * &row[t];
                        row[j] -= sub;
                    }
                    for vr in v.iter_mut() {
                        let sub = &q * &vr[t];
                        vr[j] -= sub;
                    }
                }
                if !a[t][j].is_zero() {
                    for row in a.iter_mut() {
                        row.swap(t, j);
                    }
                    for vr in v.iter_mut() {
                        vr.swap(t, j);
                    }
                    dirty = true;
                    break;
                }
            }
            if !dirty {
                break;
            }
        }

        // Divisibility: fold in any entry the pivot does not divide yet.
        for i in (t + 1)..rows {
            for j in (t + 1)..cols {
                if !(&a[i][j] % &a[t][t]).is_zero() {
                    // Add row i to row t and restart the pivot cleanup.
                    for j2 in 0..cols {
                        let add = a[i][j2].clone();
                        a[t][j2] += add;
                    }
                    continue 'outer;
                }
            }
        }

        if a[t][t].is_negative() {
            for row in a.iter_mut() {
                row[t] = -row[t].clone();
            }
            for vr in v.iter_mut() {
                vr[t] = -vr[t].clone();
            }
        }
        diagonal.push(a[t][t].clone());
        t += 1;
    }

    SmithForm { diagonal, rows, cols, v }
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.diagonal.len()
    }

    pub fn h1(&self) -> H1Invariants {
        let torsion = self
            .diagonal
            .iter()
            .filter(|d| **d > BigInt::from(1))
            .cloned()
            .collect();
        H1Invariants {
            free_rank: self.cols - self.rank(),
            torsion,
        }
    }

    /// Is `w` in the integer row lattice of the original matrix?
    /// With `S = U A V`, `w` is in the lattice iff `w V` is divisible by the
    /// diagonal entrywise and vanishes beyond the rank.
    pub fn in_row_lattice(&self, w: &[i64]) -> bool {
        assert_eq!(w.len(), self.cols);
        for j in 0..self.cols {
            let mut y = BigInt::zero();
            for (i, &wi) in w.iter().enumerate() {
                if wi != 0 {
                    y += BigInt::from(wi) * &self.v[i][j];
                }
            }
            if j < self.diagonal.len() {
                if !(y % &self.diagonal[j]).is_zero() {
                    return false;
                }
            } else if !y.is_zero() {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snf_diag(m: &[Vec<i64>], cols: usize) -> Vec<i64> {
        smith_normal_form(m, cols)
            .diagonal
            .iter()
            .map(|d| i64::try_from(d).unwrap())
            .collect()
    }

    #[test]
    fn classic_forms() {
        assert_eq!(snf_diag(&[vec![2, 4], vec![6, 8]], 2), vec![2, 4]);
        assert_eq!(snf_diag(&[vec![1, 0], vec![0, 1]], 2), vec![1, 1]);
        assert_eq!(snf_diag(&[vec![0, 0]], 2), Vec::<i64>::new());
        // Z^2 / <(2,0),(0,3)> = Z/6 after SNF normalization: diag 1,6.
        assert_eq!(snf_diag(&[vec![2, 0], vec![0, 3]], 2), vec![1, 6]);
    }

    #[test]
    fn h1_of_cycle_presentation() {
        // One generator, no relators: free rank 1.
        let s = smith_normal_form(&[], 1);
        assert_eq!(s.h1(), H1Invariants { free_rank: 1, torsion: vec![] });
        // One generator killed by one relator: trivial.
        let s = smith_normal_form(&[vec![1]], 1);
        assert_eq!(s.h1(), H1Invariants { free_rank: 0, torsion: vec![] });
    }

    #[test]
    fn lattice_membership() {
        let s = smith_normal_form(&[vec![2, 0], vec![0, 3]], 2);
        assert!(s.in_row_lattice(&[2, 3]));
        assert!(s.in_row_lattice(&[4, 0]));
        assert!(!s.in_row_lattice(&[1, 0]));
        assert!(!s.in_row_lattice(&[0, 1]));
        let free = smith_normal_form(&[vec![1, 1]], 2);
        assert!(free.in_row_lattice(&[2, 2]));
        assert!(!free.in_row_lattice(&[1, 0]));
    }

    #[test]
    fn divisibility_chain_holds() {
        let s = smith_normal_form(
            &[vec![6, 4, 2], vec![4, 6, 8], vec![2, 8, 6]],
            3,
        );
        for w in s.diagonal.windows(2) {
            assert!((&w[1] % &w[0]).is_zero(), "{:?}", s.diagonal);
        }
    }
}
