use super::{CsrMatrix, Ordering};
use crate::{Error, Result};

const NONE: usize = usize::MAX;

/// Symmetric `P S P^T = L D L^T` without pivoting, `L` unit lower
/// triangular stored by columns.
///
/// Pivots with `|d| < 1e-13 max|S|` are rejected as singular. The number
/// of negative pivots is the inertia of `S` (Sylvester's law).
#[derive(Debug, Clone)]
pub struct Ldlt {
    n: usize,
    perm: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
    d: Vec<f64>,
}

pub const PIVOT_RELATIVE_TOL: f64 = 1e-13;

impl Ldlt {
    pub fn factor(s: &CsrMatrix, ordering: Ordering) -> Result<Self> {
        let perm = ordering.permutation(s);
        Self::factor_with_permutation(s, perm)
    }

    pub fn factor_with_permutation(s: &CsrMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = s.n;
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        // upper triangle of the permuted matrix, by columns
        let mut counts = vec![0usize; n + 1];
        for i in 0..n {
            for (j, _) in s.row(i) {
                let (pi, pj) = (inv[i], inv[j]);
                if pi <= pj {
                    counts[pj + 1] += 1;
                }
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let ap = counts.clone();
        let mut fill = counts;
        let mut ai = vec![0usize; ap[n]];
        let mut ax = vec![0.0; ap[n]];
        for i in 0..n {
            for (j, v) in s.row(i) {
                let (pi, pj) = (inv[i], inv[j]);
                if pi <= pj {
                    ai[fill[pj]] = pi;
                    ax[fill[pj]] = v;
                    fill[pj] += 1;
                }
            }
        }

        // elimination tree and column counts
        let mut etree = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        let mut work = vec![NONE; n];
        for j in 0..n {
            work[j] = j;
            for &row in &ai[ap[j]..ap[j + 1]] {
                let mut i = row;
                while work[i] != j {
                    if etree[i] == NONE {
                        etree[i] = j;
                    }
                    lnz[i] += 1;
                    work[i] = j;
                    i = etree[i];
                }
            }
        }
        let mut col_ptr = vec![0usize; n + 1];
        for i in 0..n {
            col_ptr[i + 1] = col_ptr[i] + lnz[i];
        }
        let total = col_ptr[n];
        let mut row_idx = vec![0usize; total];
        let mut values = vec![0.0; total];
        let mut next = col_ptr[..n].to_vec();
        let mut d = vec![0.0; n];
        let mut dinv = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut used = vec![false; n];
        let mut y_idx = vec![0usize; n];
        let mut stack = vec![0usize; n];
        let threshold = PIVOT_RELATIVE_TOL * s.max_abs();

        // up-looking factorization, one row of L per step
        for k in 0..n {
            let mut nnz_y = 0;
            for p in ap[k]..ap[k + 1] {
                let b = ai[p];
                if b == k {
                    d[k] += ax[p];
                    continue;
                }
                y[b] += ax[p];
                if !used[b] {
                    used[b] = true;
                    stack[0] = b;
                    let mut depth = 1;
                    let mut nxt = etree[b];
                    while nxt != NONE && nxt < k {
                        if used[nxt] {
                            break;
                        }
                        used[nxt] = true;
                        stack[depth] = nxt;
                        depth += 1;
                        nxt = etree[nxt];
                    }
                    while depth > 0 {
                        depth -= 1;
                        y_idx[nnz_y] = stack[depth];
                        nnz_y += 1;
                    }
                }
            }
            for t in (0..nnz_y).rev() {
                let c = y_idx[t];
                let yc = y[c];
                for q in col_ptr[c]..next[c] {
                    y[row_idx[q]] -= values[q] * yc;
                }
                let slot = next[c];
                row_idx[slot] = k;
                values[slot] = yc * dinv[c];
                d[k] -= yc * values[slot];
                next[c] += 1;
                y[c] = 0.0;
                used[c] = false;
            }
            if !(d[k].abs() >= threshold) || d[k] == 0.0 {
                return Err(Error::SingularPivot { column: perm[k], pivot: d[k] });
            }
            dinv[k] = 1.0 / d[k];
        }
        Ok(Self { n, perm, col_ptr, row_idx, values, d })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Nonzeros strictly below the diagonal of `L`.
    pub fn nnz_l(&self) -> usize {
        self.values.len()
    }

    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&x| x < 0.0).count()
    }

    pub fn pivots(&self) -> &[f64] {
        &self.d
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let mut x: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for j in 0..self.n {
            let xj = x[j];
            for q in self.col_ptr[j]..self.col_ptr[j + 1] {
                x[self.row_idx[q]] -= self.values[q] * xj;
            }
        }
        for (xi, di) in x.iter_mut().zip(&self.d) {
            *xi /= di;
        }
        for j in (0..self.n).rev() {
            let mut s = x[j];
            for q in self.col_ptr[j]..self.col_ptr[j + 1] {
                s -= self.values[q] * x[self.row_idx[q]];
            }
            x[j] = s;
        }
        for (new, &old) in self.perm.iter().enumerate() {
            b[old] = x[new];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::TripletBuilder;

    fn laplace_2d(m: usize, shift: f64) -> CsrMatrix {
        let id = |i: usize, j: usize| i * m + j;
        let mut b = TripletBuilder::new(m * m);
        for i in 0..m {
            for j in 0..m {
                b.add(id(i, j), id(i, j), 4.0 - shift);
                for (di, dj) in [(1usize, 0usize), (0, 1)] {
                    if i + di < m && j + dj < m {
                        b.add(id(i, j), id(i + di, j + dj), -1.0);
                        b.add(id(i + di, j + dj), id(i, j), -1.0);
                    }
                }
            }
        }
        b.build()
    }

    fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
        let ax = a.mul(x);
        let r: f64 = ax.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        r / b.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[test]
    fn solves_spd_with_every_ordering() {
        let a = laplace_2d(30, 0.0);
        let b: Vec<f64> = (0..a.n).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        for o in [Ordering::Natural, Ordering::ReverseCuthillMcKee, Ordering::NestedDissection] {
            let f = Ldlt::factor(&a, o).unwrap();
            assert_eq!(f.negative_pivots(), 0);
            assert!(residual(&a, &f.solve(&b), &b) < 1e-12, "{o:?}");
        }
    }

    #[test]
    fn inertia_counts_eigenvalues_below_shift() {
        // eigenvalues of the 1D Dirichlet Laplacian: 2 - 2 cos(j pi / (n+1))
        let n = 40;
        let mut b = TripletBuilder::new(n);
        for i in 0..n {
            b.add(i, i, 2.0);
            if i + 1 < n {
                b.add(i, i + 1, -1.0);
                b.add(i + 1, i, -1.0);
            }
        }
        let a = b.build();
        let shift = 0.5;
        let expected = (1..=n).filter(|&j| 2.0 - 2.0 * (j as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos() < shift).count();
        let s = a.axpby(1.0, &CsrMatrix::identity(n), -shift);
        let f = Ldlt::factor(&s, Ordering::NestedDissection).unwrap();
        assert_eq!(f.negative_pivots(), expected);
        let rhs = vec![1.0; n];
        assert!(residual(&s, &f.solve(&rhs), &rhs) < 1e-10);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(matches!(Ldlt::factor(&a, Ordering::Natural), Err(Error::SingularPivot { .. })));
    }

    #[test]
    fn nested_dissection_reduces_fill() {
        let a = laplace_2d(60, 0.0);
        let nat = Ldlt::factor(&a, Ordering::Natural).unwrap().nnz_l();
        let nd = Ldlt::factor(&a, Ordering::NestedDissection).unwrap().nnz_l();
        assert!(nd < nat, "nd {nd} vs natural {nat}");
    }
}
