//! Direct LU factorization: reverse Cuthill–McKee reordering followed by a
//! banded LU with partial pivoting (the LAPACK `gbtf2` scheme).
//!
//! All loops run in a fixed order, so factors are bitwise reproducible.

use std::collections::VecDeque;

use super::sparse::{norm2, CsrMatrix};
use super::SolveError;

/// Reverse Cuthill–McKee ordering of the symmetrized pattern. Returns
/// `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let adj = a.symmetric_pattern();
    let n = adj.len();
    let degree: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    while order.len() < n {
        // lowest-degree unvisited node seeds the component
        let seed = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| (degree[i], i))
            .unwrap();
        let start = pseudo_peripheral(&adj, &degree, seed);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(adj: &[Vec<usize>], start: usize) -> Vec<Vec<usize>> {
    let mut seen = vec![false; adj.len()];
    seen[start] = true;
    let mut levels = vec![vec![start]];
    loop {
        let mut next = Vec::new();
        for &v in levels.last().unwrap() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return levels;
        }
        levels.push(next);
    }
}

/// George–Liu pseudo-peripheral node search.
fn pseudo_peripheral(adj: &[Vec<usize>], degree: &[usize], seed: usize) -> usize {
    let mut node = seed;
    let mut levels = bfs_levels(adj, node);
    loop {
        let candidate = *levels
            .last()
            .unwrap()
            .iter()
            .min_by_key(|&&w| (degree[w], w))
            .unwrap();
        let cand_levels = bfs_levels(adj, candidate);
        if cand_levels.len() > levels.len() {
            node = candidate;
            levels = cand_levels;
        } else {
            return node;
        }
    }
}

/// Relative pivot threshold below which the matrix is declared singular.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

/// Banded LU factors of a row/column-permuted square matrix.
#[derive(Debug, Clone)]
pub struct LuFactorization {
    n: usize,
    perm: Vec<usize>,
    inv_perm: Vec<usize>,
    kl: usize,
    ku: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
    min_pivot: f64,
    matrix: CsrMatrix,
}

impl LuFactorization {
    pub fn new(a: &CsrMatrix) -> Result<Self, SolveError> {
        if !a.is_square() {
            return Err(SolveError::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        let n = a.nrows();
        let perm = reverse_cuthill_mckee(a);
        let mut inv_perm = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv_perm[old] = new;
        }
        let (mut kl, mut ku) = (0usize, 0usize);
        for (r, c, _) in a.triplets() {
            let (i, j) = (inv_perm[r], inv_perm[c]);
            if i > j {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
        let kv = kl + ku;
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![0.0; ldab * n];
        for (r, c, v) in a.triplets() {
            let (i, j) = (inv_perm[r], inv_perm[c]);
            ab[kv + i - j + j * ldab] += v;
        }
        let scale = a.max_abs();
        let mut ipiv = vec![0; n];
        let mut ju = 0usize;
        let mut min_pivot = f64::INFINITY;
        let idx = |i: usize, j: usize| kv + i - j + j * ldab;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut jp = 0;
            let mut best = ab[idx(j, j)].abs();
            for off in 1..=km {
                let v = ab[idx(j + off, j)].abs();
                if v > best {
                    best = v;
                    jp = off;
                }
            }
            ipiv[j] = j + jp;
            min_pivot = min_pivot.min(best);
            if !(best > PIVOT_TOLERANCE * scale) || !best.is_finite() {
                return Err(SolveError::Singular {
                    pivot_index: perm[j],
                    pivot: best,
                    scale,
                });
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    ab.swap(idx(j, c), idx(j + jp, c));
                }
            }
            let pivot = ab[idx(j, j)];
            for off in 1..=km {
                ab[idx(j + off, j)] /= pivot;
            }
            for c in (j + 1)..=ju {
                let u = ab[idx(j, c)];
                if u != 0.0 {
                    for off in 1..=km {
                        let l = ab[idx(j + off, j)];
                        ab[idx(j + off, c)] -= l * u;
                    }
                }
            }
        }
        Ok(Self {
            n,
            perm,
            inv_perm,
            kl,
            ku,
            ab,
            ipiv,
            min_pivot,
            matrix: a.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    fn solve_raw(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let kv = self.kl + self.ku;
        let ldab = 2 * self.kl + self.ku + 1;
        let idx = |i: usize, j: usize| kv + i - j + j * ldab;
        let mut x: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                x.swap(j, p);
            }
            let km = self.kl.min(n - 1 - j);
            let xj = x[j];
            if xj != 0.0 {
                for off in 1..=km {
                    x[j + off] -= self.ab[idx(j + off, j)] * xj;
                }
            }
        }
        for j in (0..n).rev() {
            x[j] /= self.ab[idx(j, j)];
            let xj = x[j];
            if xj != 0.0 {
                for i in j.saturating_sub(kv)..j {
                    x[i] -= self.ab[idx(i, j)] * xj;
                }
            }
        }
        (0..n).map(|old| x[self.inv_perm[old]]).collect()
    }

    /// Solves `A x = b` with up to three steps of iterative refinement.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "right-hand side length mismatch");
        let mut x = self.solve_raw(b);
        let mut res = residual(&self.matrix, &x, b);
        let mut rnorm = norm2(&res);
        for _ in 0..3 {
            if rnorm == 0.0 {
                break;
            }
            let dx = self.solve_raw(&res);
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + d).collect();
            let trial_res = residual(&self.matrix, &trial, b);
            let trial_norm = norm2(&trial_res);
            if trial_norm < rnorm {
                x = trial;
                res = trial_res;
                rnorm = trial_norm;
            } else {
                break;
            }
        }
        x
    }
}

/// `b - A x`.
pub fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    a.mul_vec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linsolve::sparse::TripletBuilder;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = TripletBuilder::new(n, n);
        for i in 0..n {
            t.push(i, i, 2.0);
            if i > 0 {
                t.push(i, i - 1, -1.0);
            }
            if i + 1 < n {
                t.push(i, i + 1, -1.0);
            }
        }
        t.build()
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = laplacian_1d(17);
        let mut p = reverse_cuthill_mckee(&a);
        p.sort_unstable();
        assert_eq!(p, (0..17).collect::<Vec<_>>());
    }

    #[test]
    fn rcm_keeps_a_chain_tridiagonal() {
        // scrambled chain numbering
        let n = 12;
        let order: Vec<usize> = (0..n).map(|i| (i * 5) % n).collect();
        let mut t = TripletBuilder::new(n, n);
        for i in 0..n {
            t.push(order[i], order[i], 2.0);
            if i + 1 < n {
                t.push(order[i], order[i + 1], -1.0);
                t.push(order[i + 1], order[i], -1.0);
            }
        }
        let lu = LuFactorization::new(&t.build()).unwrap();
        assert_eq!(lu.bandwidths(), (1, 1));
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 1, 1.0), (1, 0, 1.0)]);
        let x = LuFactorization::new(&a).unwrap().solve(&[3.0, 4.0]);
        assert_eq!(x, vec![4.0, 3.0]);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(matches!(LuFactorization::new(&a), Err(SolveError::Singular { .. })));
    }
}
