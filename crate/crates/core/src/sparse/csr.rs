use std::io::{BufRead, Write};

use crate::{Error, Result};

/// Square sparse matrix in CSR layout with sorted, duplicate-free columns.
/// Symmetric matrices store both triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

/// Accumulates `(i, j, v)` contributions; duplicates are summed in
/// insertion order so the result is reproducible bit for bit.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        Self { n, entries: Vec::with_capacity(cap) }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        self.entries.push((i, j, v));
    }

    pub fn build(mut self) -> CsrMatrix {
        // stable sort keeps the summation order of duplicates fixed
        self.entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { n: self.n, row_ptr, col_idx, values }
    }
}

impl CsrMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, row_ptr: vec![0; n + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self { n, row_ptr: (0..=n).collect(), col_idx: (0..n).collect(), values: d.to_vec() }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let mut b = TripletBuilder::new(rows.len());
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    b.add(i, j, v);
                }
            }
        }
        b.build()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.n).map(|i| x[i] * self.row(i).map(|(j, v)| v * y[j]).sum::<f64>()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut c = self.clone();
        c.values.iter_mut().for_each(|v| *v *= s);
        c
    }

    /// `a*self + b*other`; the sparsity pattern is the union.
    pub fn axpby(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = TripletBuilder::with_capacity(self.n, self.nnz() + other.nnz());
        for i in 0..self.n {
            self.row(i).for_each(|(j, v)| out.add(i, j, a * v));
            other.row(i).for_each(|(j, v)| out.add(i, j, b * v));
        }
        out.build()
    }

    /// Largest `|a_ij - a_ji|` relative to `max|a|`.
    pub fn asymmetry(&self) -> f64 {
        let m = self.max_abs().max(f64::MIN_POSITIVE);
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
            / m
    }

    /// Principal submatrix on `keep` (indices in increasing order).
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.n];
        for (k, &i) in keep.iter().enumerate() {
            map[i] = k;
        }
        let mut b = TripletBuilder::new(keep.len());
        for (k, &i) in keep.iter().enumerate() {
            for (j, v) in self.row(i) {
                if map[j] != usize::MAX {
                    b.add(k, map[j], v);
                }
            }
        }
        b.build()
    }

    /// `P A P^T` where `perm[new] = old`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> Self {
        let mut inv = vec![0; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut b = TripletBuilder::with_capacity(self.n, self.nnz());
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                b.add(inv[i], inv[j], v);
            }
        }
        b.build()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }
}

/// Writes the upper triangle of a symmetric matrix as `i j value` lines
/// sorted by `(i, j)` after a `symmetric n nnz` header.
pub fn write_coo<W: Write>(a: &CsrMatrix, mut w: W) -> Result<()> {
    let nnz = (0..a.n).map(|i| a.row(i).filter(|&(j, _)| j >= i).count()).sum::<usize>();
    writeln!(w, "symmetric {} {}", a.n, nnz)?;
    for i in 0..a.n {
        for (j, v) in a.row(i).filter(|&(j, _)| j >= i) {
            writeln!(w, "{i} {j} {v:?}")?;
        }
    }
    Ok(())
}

pub fn read_coo<R: BufRead>(r: R) -> Result<CsrMatrix> {
    let mut lines = r.lines().enumerate();
    let perr = |line: usize, msg: &str| Error::Parse { line: line + 1, msg: msg.to_string() };
    let (_, header) = lines.next().ok_or_else(|| perr(0, "empty input"))?;
    let header = header?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 3 || h[0] != "symmetric" {
        return Err(perr(0, "expected `symmetric n nnz`"));
    }
    let n: usize = h[1].parse().map_err(|_| perr(0, "bad n"))?;
    let nnz: usize = h[2].parse().map_err(|_| perr(0, "bad nnz"))?;
    let mut b = TripletBuilder::with_capacity(n, 2 * nnz);
    let mut count = 0;
    for (ln, l) in lines {
        let l = l?;
        if l.trim().is_empty() {
            continue;
        }
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() != 3 {
            return Err(perr(ln, "expected `i j value`"));
        }
        let i: usize = t[0].parse().map_err(|_| perr(ln, "bad row"))?;
        let j: usize = t[1].parse().map_err(|_| perr(ln, "bad column"))?;
        let v: f64 = t[2].parse().map_err(|_| perr(ln, "bad value"))?;
        if i >= n || j >= n || j < i {
            return Err(perr(ln, "index out of range or below diagonal"));
        }
        b.add(i, j, v);
        if i != j {
            b.add(j, i, v);
        }
        count += 1;
    }
    if count != nnz {
        return Err(perr(0, "entry count differs from header"));
    }
    Ok(b.build())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let mut b = TripletBuilder::new(2);
        b.add(0, 0, 1.0);
        b.add(1, 0, 2.0);
        b.add(0, 0, 3.0);
        let a = b.build();
        assert_eq!(a.get(0, 0), 4.0);
        assert_eq!(a.get(1, 0), 2.0);
        assert_eq!(a.get(0, 1), 0.0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn permutation_round_trip() {
        let a = CsrMatrix::from_dense(&[vec![4.0, 1.0, 0.0], vec![1.0, 3.0, 2.0], vec![0.0, 2.0, 5.0]]);
        let perm = [2, 0, 1];
        let p = a.permute_symmetric(&perm);
        for new_i in 0..3 {
            for new_j in 0..3 {
                assert_eq!(p.get(new_i, new_j), a.get(perm[new_i], perm[new_j]));
            }
        }
    }

    #[test]
    fn coo_round_trip() {
        let a = CsrMatrix::from_dense(&[vec![0.1, 1.0 / 3.0], vec![1.0 / 3.0, 2e-300]]);
        let mut buf = Vec::new();
        write_coo(&a, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("symmetric 2 3\n0 0 0.1\n"));
        let b = read_coo(&buf[..]).unwrap();
        assert_eq!(a, b);
    }
}
