//! Lowest eigenpairs of the symmetric pencil `(A, M)` by shift-invert
//! Lanczos on `(A - σM)⁻¹M` with full reorthogonalization in the
//! `M`-inner product, deflation restarts, and an inertia certificate.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::fem::SparsePencil;
use crate::sparse::{CsrMatrix, Ldlt, Ordering};
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_ITER: usize = 500;
const SINGULAR_RETRIES: usize = 5;
const SHIFT_RETRIES: usize = 40;
const MAX_RESTARTS: usize = 12;

/// Relative width under which eigenvalues count as one cluster.
pub const CLUSTER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `M`-orthonormal; largest-magnitude component positive.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `‖Au - λMu‖₂ / ‖u‖_M`, recomputed by plain matrix-vector products.
    pub residuals: Vec<f64>,
    /// Total Lanczos steps over all restarts.
    pub iterations: usize,
    pub shift_used: f64,
    /// Number of pencil eigenvalues below `certified_bound` (inertia).
    pub certified_count: usize,
    pub certified_bound: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub k: usize,
    pub shift: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub ordering: Ordering,
    pub seed: u64,
}

impl SolverOptions {
    pub fn new(k: usize, shift: f64) -> Self {
        Self { k, shift, tol: DEFAULT_TOL, max_iter: MAX_ITER, ordering: Ordering::default(), seed: 0x5eed }
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

/// Factors `A - σM`, moving the shift down while the factorization is
/// singular (5% steps) or shows eigenvalues below it (20% steps).
fn factor_below_spectrum(a: &CsrMatrix, m: &CsrMatrix, shift: f64, ordering: Ordering) -> Result<(Ldlt, f64)> {
    let mut sigma = shift;
    let mut singular = 0;
    for _ in 0..SHIFT_RETRIES {
        let s = a.axpby(1.0, m, -sigma);
        match Ldlt::factor(&s, ordering) {
            Ok(f) if f.negative_pivots() == 0 => return Ok((f, sigma)),
            Ok(_) => sigma -= 0.2 * sigma.abs().max(1.0),
            Err(Error::SingularPivot { .. }) if singular < SINGULAR_RETRIES => {
                singular += 1;
                sigma -= 0.05 * sigma.abs().max(1.0);
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::NoConvergence(format!("no admissible shift found starting from {shift}")))
}

/// Number of eigenvalues of `(A, M)` strictly below `threshold`, from the
/// inertia of `A - threshold·M`. A singular threshold is nudged by 1e-9.
pub fn count_below_matrix(a: &CsrMatrix, m: &CsrMatrix, threshold: f64, ordering: Ordering) -> Result<usize> {
    let mut t = threshold;
    let mut last = None;
    for _ in 0..4 {
        match Ldlt::factor(&a.axpby(1.0, m, -t), ordering) {
            Ok(f) => return Ok(f.negative_pivots()),
            Err(e @ Error::SingularPivot { .. }) => {
                last = Some(e);
                t += 1e-9 * (1.0 + t.abs());
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap())
}

pub fn certify_count_below(p: &SparsePencil, beta: f64, threshold: f64) -> Result<usize> {
    let r = p.reduce(beta);
    count_below_matrix(&r.a, &r.m, threshold, Ordering::default())
}

fn m_dot(x: &[f64], mq: &[f64]) -> f64 {
    x.iter().zip(mq).map(|(a, b)| a * b).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

struct Locked {
    lambda: f64,
    v: Vec<f64>,
    mv: Vec<f64>,
}

fn residual_norm(a: &CsrMatrix, m: &CsrMatrix, lambda: f64, v: &[f64]) -> f64 {
    let av = a.mul(v);
    let mv = m.mul(v);
    let norm_m = m_dot(v, &mv).sqrt();
    av.iter().zip(&mv).map(|(x, y)| (x - lambda * y).powi(2)).sum::<f64>().sqrt() / norm_m
}

/// One Lanczos run in the `M`-orthogonal complement of `locked`. Returns
/// the converged Ritz pairs (at most `want`, lowest first) and the step
/// count.
#[allow(clippy::too_many_arguments)]
fn lanczos_run(
    a: &CsrMatrix,
    m: &CsrMatrix,
    fact: &Ldlt,
    sigma: f64,
    locked: &[Locked],
    want: usize,
    opts: &SolverOptions,
    run: u64,
) -> Result<(Vec<Locked>, usize)> {
    let n = a.n;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(run));
    let mut q: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    let mut q_vecs: Vec<Vec<f64>> = Vec::new();
    let mut mq_vecs: Vec<Vec<f64>> = Vec::new();
    let orthogonalize = |w: &mut Vec<f64>, q_vecs: &[Vec<f64>], mq_vecs: &[Vec<f64>]| {
        for _ in 0..2 {
            for l in locked {
                let c = m_dot(w, &l.mv);
                axpy(-c, &l.v, w);
            }
            for (qv, mqv) in q_vecs.iter().zip(mq_vecs) {
                let c = m_dot(w, mqv);
                axpy(-c, qv, w);
            }
        }
    };
    orthogonalize(&mut q, &q_vecs, &mq_vecs);
    let mut mq = m.mul(&q);
    let nrm = m_dot(&q, &mq).sqrt();
    if !(nrm > 0.0) {
        return Ok((Vec::new(), 0));
    }
    q.iter_mut().for_each(|x| *x /= nrm);
    mq.iter_mut().for_each(|x| *x /= nrm);

    let max_steps = opts.max_iter.min(n.saturating_sub(locked.len())).max(1);
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut steps = 0;
    loop {
        let mut w = fact.solve(&mq);
        let aj = m_dot(&w, &mq);
        q_vecs.push(std::mem::take(&mut q));
        mq_vecs.push(std::mem::take(&mut mq));
        alpha.push(aj);
        steps += 1;
        orthogonalize(&mut w, &q_vecs, &mq_vecs);
        let mut mw = m.mul(&w);
        let bj = m_dot(&w, &mw).max(0.0).sqrt();
        let scale = alpha.iter().fold(0.0f64, |s, x| s.max(x.abs())).max(f64::MIN_POSITIVE);
        let exhausted = bj <= 1e-13 * scale || steps >= max_steps;
        let check = exhausted || steps <= 40 || steps % 5 == 0;
        if check && steps >= want {
            let j = alpha.len();
            let mut t = DMatrix::<f64>::zeros(j, j);
            for i in 0..j {
                t[(i, i)] = alpha[i];
                if i + 1 < j {
                    t[(i, i + 1)] = beta[i];
                    t[(i + 1, i)] = beta[i];
                }
            }
            let eig = SymmetricEigen::new(t);
            let mut idx: Vec<usize> = (0..j).collect();
            idx.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
            let top: Vec<usize> = idx.into_iter().filter(|&i| eig.eigenvalues[i] > 0.0).take(want).collect();
            // cheap estimate first: ‖T y - θ y‖_M = β_j |s_j|
            let estimate_ok = |i: usize| bj * eig.eigenvectors[(j - 1, i)].abs() <= 1e-3 * eig.eigenvalues[i].abs();
            if exhausted || top.iter().all(|&i| estimate_ok(i)) {
                let mut pairs = Vec::new();
                for &i in &top {
                    let theta = eig.eigenvalues[i];
                    let lambda = sigma + 1.0 / theta;
                    let mut v = vec![0.0; n];
                    for (c, qv) in q_vecs.iter().enumerate() {
                        axpy(eig.eigenvectors[(c, i)], qv, &mut v);
                    }
                    let res = residual_norm(a, m, lambda, &v);
                    if res <= opts.tol {
                        let mv = m.mul(&v);
                        pairs.push((lambda, v, mv));
                    } else if !exhausted {
                        pairs.clear();
                        break;
                    }
                }
                if pairs.len() == top.len() && !pairs.is_empty() || exhausted {
                    let out = pairs.into_iter().map(|(lambda, v, mv)| Locked { lambda, v, mv }).collect();
                    return Ok((out, steps));
                }
            }
        }
        if exhausted {
            return Ok((Vec::new(), steps));
        }
        beta.push(bj);
        w.iter_mut().for_each(|x| *x /= bj);
        mw.iter_mut().for_each(|x| *x /= bj);
        q = w;
        mq = mw;
    }
}

/// The `k` lowest eigenpairs of `(A, M)`; `shift` must lie below the
/// spectrum (it is lowered automatically otherwise).
pub fn lowest_eigenpairs_matrix(a: &CsrMatrix, m: &CsrMatrix, opts: &SolverOptions) -> Result<EigenResult> {
    if opts.k == 0 || opts.k > a.n {
        return Err(Error::InvalidArgument(format!("k = {} not in 1..={}", opts.k, a.n)));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let (fact, sigma) = factor_below_spectrum(a, m, opts.shift, opts.ordering)?;
    let mut locked: Vec<Locked> = Vec::new();
    let mut iterations = 0;
    let mut want = opts.k;
    for run in 0..MAX_RESTARTS {
        let (found, steps) = lanczos_run(a, m, &fact, sigma, &locked, want, opts, run as u64)?;
        iterations += steps;
        if found.is_empty() && locked.len() < opts.k {
            return Err(Error::NoConvergence(format!(
                "Lanczos run {run} converged no Ritz pair within {} steps (tol {:e})",
                opts.max_iter, opts.tol
            )));
        }
        locked.extend(found);
        // M-orthonormalize the locked set: values are already accurate
        orthonormalize(&mut locked, m);
        locked.sort_by(|x, y| x.lambda.total_cmp(&y.lambda));
        if locked.len() < opts.k {
            want = opts.k - locked.len();
            continue;
        }
        let lk = locked[opts.k - 1].lambda;
        let bound = lk + cert_margin(opts.tol, lk);
        let count = count_below_matrix(a, m, bound, opts.ordering)?;
        let found_below = locked.iter().filter(|l| l.lambda < bound).count();
        if count <= found_below {
            return Ok(finish(a, m, locked, opts, iterations, sigma, count, bound));
        }
        want = count - found_below;
    }
    Err(Error::NoConvergence(format!("inertia certificate not met after {MAX_RESTARTS} restarts")))
}

fn cert_margin(tol: f64, lambda: f64) -> f64 {
    tol.sqrt().max(1e-8) * (1.0 + lambda.abs())
}

fn orthonormalize(locked: &mut [Locked], m: &CsrMatrix) {
    for i in 0..locked.len() {
        for j in 0..i {
            let c = m_dot(&locked[i].v, &locked[j].mv);
            let vj = locked[j].v.clone();
            axpy(-c, &vj, &mut locked[i].v);
        }
        let mv = m.mul(&locked[i].v);
        let nrm = m_dot(&locked[i].v, &mv).sqrt();
        locked[i].v.iter_mut().for_each(|x| *x /= nrm);
        locked[i].mv = mv.into_iter().map(|x| x / nrm).collect();
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    a: &CsrMatrix,
    m: &CsrMatrix,
    mut locked: Vec<Locked>,
    opts: &SolverOptions,
    iterations: usize,
    sigma: f64,
    count: usize,
    bound: f64,
) -> EigenResult {
    locked.truncate(opts.k);
    let mut eigenvalues = Vec::with_capacity(opts.k);
    let mut eigenvectors = Vec::with_capacity(opts.k);
    let mut residuals = Vec::with_capacity(opts.k);
    for l in locked {
        let mut v = l.v;
        let big = v.iter().copied().fold(0.0f64, |b, x| if x.abs() > b.abs() { x } else { b });
        if big < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        residuals.push(residual_norm(a, m, l.lambda, &v));
        eigenvalues.push(l.lambda);
        eigenvectors.push(v);
    }
    EigenResult { eigenvalues, eigenvectors, residuals, iterations, shift_used: sigma, certified_count: count, certified_bound: bound }
}

/// Lowest `k` eigenpairs of `(K - βB, M)` with Dirichlet nodes eliminated;
/// eigenvectors are returned in the full node numbering.
pub fn lowest_eigenpairs(p: &SparsePencil, beta: f64, k: usize, shift: f64, tol: f64) -> Result<EigenResult> {
    lowest_eigenpairs_with(p, beta, &SolverOptions::new(k, shift).tol(tol))
}

pub fn lowest_eigenpairs_with(p: &SparsePencil, beta: f64, opts: &SolverOptions) -> Result<EigenResult> {
    let r = p.reduce(beta);
    let mut res = lowest_eigenpairs_matrix(&r.a, &r.m, opts)?;
    res.eigenvectors = res.eigenvectors.iter().map(|v| r.expand(v)).collect();
    Ok(res)
}

/// Groups indices of ascending eigenvalues into clusters of width
/// `CLUSTER_TOL (1 + |λ|)`.
pub fn clusters(eigenvalues: &[f64]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &l) in eigenvalues.iter().enumerate() {
        match out.last_mut() {
            Some(c) if (l - eigenvalues[c[0]]).abs() <= CLUSTER_TOL * (1.0 + l.abs()) => c.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::TripletBuilder;
    use std::f64::consts::PI;

    #[test]
    fn diagonal_pencil() {
        let a = CsrMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let m = CsrMatrix::identity(3);
        let r = lowest_eigenpairs_matrix(&a, &m, &SolverOptions::new(1, 0.0)).unwrap();
        assert!((r.eigenvalues[0] - 1.0).abs() < 1e-12);
        let v = &r.eigenvectors[0];
        assert!((v[0] - 1.0).abs() < 1e-10 && v[1].abs() < 1e-10 && v[2].abs() < 1e-10);
    }

    #[test]
    fn dirichlet_laplacian_closed_form() {
        let n = 10;
        let mut b = TripletBuilder::new(n);
        for i in 0..n {
            b.add(i, i, 2.0);
            if i + 1 < n {
                b.add(i, i + 1, -1.0);
                b.add(i + 1, i, -1.0);
            }
        }
        let a = b.build();
        let r = lowest_eigenpairs_matrix(&a, &CsrMatrix::identity(n), &SolverOptions::new(3, 0.0)).unwrap();
        for j in 1..=3 {
            let exact = 2.0 - 2.0 * (j as f64 * PI / 11.0).cos();
            assert!((r.eigenvalues[j - 1] - exact).abs() < 1e-12, "{j}: {}", r.eigenvalues[j - 1]);
        }
        assert!(r.residuals.iter().all(|&x| x <= 1e-10));
    }

    #[test]
    fn shift_above_spectrum_is_lowered() {
        let a = CsrMatrix::from_diagonal(&[-3.0, -1.0, 2.0, 5.0]);
        let r = lowest_eigenpairs_matrix(&a, &CsrMatrix::identity(4), &SolverOptions::new(2, 0.0)).unwrap();
        assert!(r.shift_used < -3.0);
        assert!((r.eigenvalues[0] + 3.0).abs() < 1e-12 && (r.eigenvalues[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_inertia() {
        let a = CsrMatrix::from_diagonal(&[-3.0, -1.0, 2.0]);
        let m = CsrMatrix::identity(3);
        assert_eq!(count_below_matrix(&a, &m, 0.0, Ordering::default()).unwrap(), 2);
        assert_eq!(count_below_matrix(&a, &m, -10.0, Ordering::default()).unwrap(), 0);
        // threshold exactly on an eigenvalue is nudged
        assert_eq!(count_below_matrix(&a, &m, -1.0, Ordering::Natural).unwrap(), 2);
    }

    #[test]
    fn exact_double_eigenvalue_is_found_twice() {
        let a = CsrMatrix::from_diagonal(&[1.0, 2.0, 2.0, 3.0, 4.0, 5.0]);
        let r = lowest_eigenpairs_matrix(&a, &CsrMatrix::identity(6), &SolverOptions::new(3, 0.0)).unwrap();
        assert!((r.eigenvalues[1] - 2.0).abs() < 1e-12 && (r.eigenvalues[2] - 2.0).abs() < 1e-12);
        let d: f64 = r.eigenvectors[1].iter().zip(&r.eigenvectors[2]).map(|(x, y)| x * y).sum();
        assert!(d.abs() < 1e-10);
        assert_eq!(clusters(&r.eigenvalues), vec![vec![0], vec![1, 2]]);
    }

    #[test]
    fn rejects_bad_k() {
        let a = CsrMatrix::identity(2);
        assert!(lowest_eigenpairs_matrix(&a, &a, &SolverOptions::new(0, 0.0)).is_err());
        assert!(lowest_eigenpairs_matrix(&a, &a, &SolverOptions::new(3, 0.0)).is_err());
    }
}
