//! Corner quasimodes `ψ_j = v_j U_j`: the sector ground state transplanted
//! to each corner and cut off smoothly, with the interaction integrals
//! evaluated by adaptive quadrature.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::asymptotics::{sector_ground_energy, sector_ground_state_amplitude, tau};
use crate::quadrature::integrate_box;
use crate::{Error, Point, Result};

/// Default absolute quadrature tolerance (on normalized integrands).
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
const GRID: usize = 8;

fn bump(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let f = (-1.0 / s).exp();
    if f == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let s2 = s * s;
    (f, f / s2, f * (1.0 - 2.0 * s) / (s2 * s2))
}

/// Smooth step: 1 for `t ≤ -1`, 0 for `t ≥ 0`.
pub fn cutoff_chi(t: f64) -> f64 {
    cutoff_chi_derivatives(t).0
}

/// `(χ, χ', χ'')` in closed form.
pub fn cutoff_chi_derivatives(t: f64) -> (f64, f64, f64) {
    if t <= -1.0 {
        return (1.0, 0.0, 0.0);
    }
    if t >= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let (fp, dfp, ddfp) = bump(-t);
    let (p, dp, ddp) = (fp, -dfp, ddfp);
    let (q, dq, ddq) = bump(t + 1.0);
    let d = p + q;
    let dd = dp + dq;
    let n = dp * q - p * dq;
    let dn = ddp * q - p * ddq;
    (p / d, n / (d * d), (dn * d - 2.0 * n * dd) / (d * d * d))
}

/// Value, gradient and Laplacian of a function at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: Point,
    pub lap: f64,
}

/// `φ(y) = χ(y₁ - ℓcosα)·χ(|y| - (ℓ-1))` on the sector `|arg y| < α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub alpha: f64,
    pub ell: f64,
}

impl Cutoff {
    pub fn new(alpha: f64, ell: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < FRAC_PI_2) {
            return Err(Error::InvalidArgument(format!("half-angle {alpha} not in (0, pi/2)")));
        }
        if !(ell * alpha.cos() > 2.0) {
            return Err(Error::InvalidArgument(format!("no plateau: ell*cos(alpha) = {} <= 2", ell * alpha.cos())));
        }
        Ok(Self { alpha, ell })
    }

    pub fn jet(&self, y: Point) -> Jet {
        let r = y[0].hypot(y[1]);
        let (ca, da, dda) = cutoff_chi_derivatives(y[0] - self.ell * self.alpha.cos());
        let (cb, db, ddb) = cutoff_chi_derivatives(r - (self.ell - 1.0));
        if r == 0.0 {
            return Jet { value: ca * cb, grad: [da * cb, 0.0], lap: dda * cb };
        }
        let (e0, e1) = (y[0] / r, y[1] / r);
        Jet {
            value: ca * cb,
            grad: [da * cb + ca * db * e0, ca * db * e1],
            lap: dda * cb + 2.0 * da * db * e0 + ca * (ddb + db / r),
        }
    }
}

pub fn phi_cutoff(alpha: f64, ell: f64, x: Point) -> Result<f64> {
    Ok(Cutoff::new(alpha, ell)?.jet(x).value)
}

/// Quasimode attached to corner `A₁ = (-L, 0)` or `A₂ = (L, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quasimode {
    pub corner: usize,
    pub omega: f64,
    pub l: f64,
    pub beta: f64,
    pub alpha: f64,
    pub ell: f64,
    /// `y = rotation·(x - apex)`.
    pub rotation: [[f64; 2]; 2],
    pub apex: Point,
    amplitude: f64,
    cutoff: Cutoff,
}

/// Cut-off function and sector state with derivatives at one point.
#[derive(Debug, Clone, Copy)]
pub struct QuasimodeEval {
    pub v: Jet,
    pub u: f64,
    pub grad_u: Point,
}

impl Quasimode {
    pub fn new(omega: f64, l: f64, beta: f64, corner: usize) -> Result<Self> {
        let t = tau(omega)?;
        if !(l > 0.0 && beta > 0.0) {
            return Err(Error::InvalidArgument(format!("need L > 0 and beta > 0, got L={l}, beta={beta}")));
        }
        let alpha = omega / 2.0;
        let (s, c) = alpha.sin_cos();
        let (rotation, apex) = match corner {
            1 => ([[c, s], [-s, c]], [-l, 0.0]),
            2 => ([[-c, s], [-s, -c]], [l, 0.0]),
            _ => return Err(Error::InvalidArgument(format!("corner must be 1 or 2, got {corner}"))),
        };
        let ell = t * l;
        Ok(Self {
            corner,
            omega,
            l,
            beta,
            alpha,
            ell,
            rotation,
            apex,
            amplitude: sector_ground_state_amplitude(alpha, beta)?,
            cutoff: Cutoff::new(alpha, ell)?,
        })
    }

    pub fn to_local(&self, x: Point) -> Point {
        let d = [x[0] - self.apex[0], x[1] - self.apex[1]];
        let r = &self.rotation;
        [r[0][0] * d[0] + r[0][1] * d[1], r[1][0] * d[0] + r[1][1] * d[1]]
    }

    pub fn to_global(&self, y: Point) -> Point {
        let r = &self.rotation;
        [self.apex[0] + r[0][0] * y[0] + r[1][0] * y[1], self.apex[1] + r[0][1] * y[0] + r[1][1] * y[1]]
    }

    fn vec_to_global(&self, g: Point) -> Point {
        let r = &self.rotation;
        [r[0][0] * g[0] + r[1][0] * g[1], r[0][1] * g[0] + r[1][1] * g[1]]
    }

    /// Everything in local coordinates `y`.
    pub fn eval_local(&self, y: Point) -> QuasimodeEval {
        let kappa = self.beta / self.alpha.sin();
        let u = self.amplitude * (-kappa * y[0]).exp();
        QuasimodeEval { v: self.cutoff.jet(y), u, grad_u: [-kappa * u, 0.0] }
    }

    /// Everything in global coordinates `x`.
    pub fn eval(&self, x: Point) -> QuasimodeEval {
        let e = self.eval_local(self.to_local(x));
        QuasimodeEval {
            v: Jet { value: e.v.value, grad: self.vec_to_global(e.v.grad), lap: e.v.lap },
            u: e.u,
            grad_u: self.vec_to_global(e.grad_u),
        }
    }

    pub fn psi(&self, x: Point) -> f64 {
        let e = self.eval(x);
        e.v.value * e.u
    }

    /// `κ = β/sinα`, the decay rate of `U` along the bisector.
    fn kappa(&self) -> f64 {
        self.beta / self.alpha.sin()
    }
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Integrates over the part `y₁ ∈ [a, b]` of the triangle `|y₂| ≤ y₁ tanα`
/// in the local frame of `q`, using `y₂ = s·y₁·tanα`.
fn integrate_local<F>(q: &Quasimode, n: usize, a: f64, b: f64, tol: f64, f: F) -> Result<(Vec<f64>, usize)>
where
    F: Fn(Point, &mut [f64]) + Sync,
{
    let t = q.alpha.tan();
    let g = |y1: f64, s: f64, out: &mut [f64]| {
        f([y1, s * y1 * t], out);
        let jac = y1 * t;
        out.iter_mut().for_each(|o| *o *= jac);
    };
    let r = integrate_box(&g, n, [a, b], [-1.0, 1.0], tol, GRID)?;
    Ok((r.values, r.evaluations))
}

/// Interaction integrals of the two corner quasimodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionData {
    pub omega: f64,
    pub l: f64,
    pub beta: f64,
    pub alpha: f64,
    pub tau: f64,
    pub ell: f64,
    pub e_alpha: f64,
    pub gram: [[f64; 2]; 2],
    /// Signed couplings `∬ v_k (U_j∇U_k - U_k∇U_j)·∇v_j`.
    pub w12: f64,
    pub w21: f64,
    /// `‖(-Δ - E_α)ψ_j‖`.
    pub residuals: [f64; 2],
    /// `-∬ (2∇v_j·∇U_j + U_jΔv_j) ψ_k`.
    pub b: [[f64; 2]; 2],
    /// `∬ U_j U_k ∇v_j·∇v_k`.
    pub eps: [[f64; 2]; 2],
    pub support_separation: f64,
    pub quad_tol: f64,
    pub evaluations: usize,
}

impl InteractionData {
    /// Magnitude of the averaged coupling.
    pub fn coupling(&self) -> f64 {
        (0.5 * (self.w12 + self.w21)).abs()
    }

    /// Eigenvalues of `E_α G + W` relative to `G`, with `W` the symmetric
    /// coupling matrix: `E_α - |w|/(g+h)` and `E_α + |w|/(g-h)`.
    pub fn quasi_energies(&self) -> (f64, f64) {
        let g = 0.5 * (self.gram[0][0] + self.gram[1][1]);
        let h = 0.5 * (self.gram[0][1] + self.gram[1][0]);
        let w = self.coupling();
        (self.e_alpha - w / (g + h), self.e_alpha + w / (g - h))
    }

    /// Difference of [`Self::quasi_energies`] without cancellation.
    pub fn quasi_splitting(&self) -> f64 {
        let g = 0.5 * (self.gram[0][0] + self.gram[1][1]);
        let h = 0.5 * (self.gram[0][1] + self.gram[1][0]);
        self.coupling() * 2.0 * g / (g * g - h * h)
    }
}

struct Pair {
    q: [Quasimode; 2],
    quad_tol: f64,
}

impl Pair {
    fn new(omega: f64, l: f64, beta: f64, quad_tol: f64) -> Result<Self> {
        if !(quad_tol > 0.0 && quad_tol < 1.0) {
            return Err(Error::InvalidArgument(format!("quad_tol {quad_tol} not in (0, 1)")));
        }
        Ok(Self { q: [Quasimode::new(omega, l, beta, 1)?, Quasimode::new(omega, l, beta, 2)?], quad_tol })
    }

    /// `e^{2βL cotα}`, normalizes products `U₁U₂`.
    fn pair_scale(&self) -> f64 {
        let q = &self.q[0];
        (2.0 * q.beta * q.l / q.alpha.tan()).exp()
    }

    /// Normalizes `U_j²` on the transition region.
    fn self_scale(&self) -> f64 {
        let q = &self.q[0];
        (2.0 * q.kappa() * (q.ell * q.alpha.cos() - 2.0)).exp()
    }

    fn transition(&self) -> (f64, f64) {
        let q = &self.q[0];
        let c = q.ell * q.alpha.cos();
        ((c - 2.0).max(0.0), c)
    }

    /// Integrals over the transition region of corner `j`, in its frame:
    /// `[w_jk, ε_jk, b_jk, ε_j², ε_jj, b_jj]`.
    fn corner_integrals(&self, j: usize) -> Result<([f64; 6], usize)> {
        let (qj, qk) = (&self.q[j], &self.q[1 - j]);
        let (ps, ss) = (self.pair_scale(), self.self_scale());
        let (a, b) = self.transition();
        let (vals, evals) = integrate_local(qj, 6, a, b, self.quad_tol, |y, out| {
            let x = qj.to_global(y);
            let ej = qj.eval(x);
            let ek = qk.eval(x);
            let r = 2.0 * dot(ej.v.grad, ej.grad_u) + ej.v.lap * ej.u;
            let flux = [ej.u * ek.grad_u[0] - ek.u * ej.grad_u[0], ej.u * ek.grad_u[1] - ek.u * ej.grad_u[1]];
            out[0] = ps * ek.v.value * dot(flux, ej.v.grad);
            out[1] = ps * ej.u * ek.u * dot(ej.v.grad, ek.v.grad);
            out[2] = -ps * r * ek.v.value * ek.u;
            out[3] = ss * r * r;
            out[4] = ss * ej.u * ej.u * dot(ej.v.grad, ej.v.grad);
            out[5] = -ss * r * ej.v.value * ej.u;
        })?;
        let mut out = [0.0; 6];
        for i in 0..3 {
            out[i] = vals[i] / ps;
            out[i + 3] = vals[i + 3] / ss;
        }
        Ok((out, evals))
    }

    /// `1 - g_jj`: the quadrature part over the transition region plus the
    /// closed-form tail beyond `y₁ = ℓcosα`.
    fn gram_deficit(&self, j: usize) -> Result<(f64, usize)> {
        let q = &self.q[j];
        let ss = self.self_scale();
        let (a, b) = self.transition();
        let (vals, evals) = integrate_local(q, 1, a, b, self.quad_tol, |y, out| {
            let e = q.eval_local(y);
            out[0] = ss * e.u * e.u * (1.0 - e.v.value * e.v.value);
        })?;
        let k2 = 2.0 * q.kappa();
        let amp2 = q.amplitude * q.amplitude;
        let tail = amp2 * 2.0 * q.alpha.tan() * (-k2 * b).exp() * (b / k2 + 1.0 / (k2 * k2));
        Ok((vals[0] / ss + tail, evals))
    }

    fn gram_off(&self, j: usize) -> Result<(f64, usize)> {
        let (qj, qk) = (&self.q[j], &self.q[1 - j]);
        let ps = self.pair_scale();
        let c = qj.ell * qj.alpha.cos();
        let (vals, evals) = integrate_local(qj, 1, 0.0, c, self.quad_tol, |y, out| {
            let x = qj.to_global(y);
            out[0] = ps * qj.psi(x) * qk.psi(x);
        })?;
        Ok((vals[0] / ps, evals))
    }
}

/// `G = (⟨ψ_j, ψ_k⟩)`.
pub fn gram_matrix(omega: f64, l: f64, beta: f64, quad_tol: f64) -> Result<[[f64; 2]; 2]> {
    let p = Pair::new(omega, l, beta, quad_tol)?;
    let (d1, _) = p.gram_deficit(0)?;
    let (d2, _) = p.gram_deficit(1)?;
    let (g12, _) = p.gram_off(0)?;
    let (g21, _) = p.gram_off(1)?;
    Ok([[1.0 - d1, g12], [g21, 1.0 - d2]])
}

/// `|w|` from quadrature of the coupling integrals.
pub fn coupling_numeric(omega: f64, l: f64, beta: f64, quad_tol: f64) -> Result<f64> {
    let p = Pair::new(omega, l, beta, quad_tol)?;
    let (a, _) = p.corner_integrals(0)?;
    let (b, _) = p.corner_integrals(1)?;
    Ok((0.5 * (a[0] + b[0])).abs())
}

/// `‖2∇v_j·∇U_j + (Δv_j)U_j‖` for corner `j ∈ {1, 2}`.
pub fn residual_norm(omega: f64, l: f64, beta: f64, j: usize, quad_tol: f64) -> Result<f64> {
    if !(j == 1 || j == 2) {
        return Err(Error::InvalidArgument(format!("corner must be 1 or 2, got {j}")));
    }
    let p = Pair::new(omega, l, beta, quad_tol)?;
    Ok(p.corner_integrals(j - 1)?.0[3].max(0.0).sqrt())
}

pub fn interaction_data(omega: f64, l: f64, beta: f64, quad_tol: f64) -> Result<InteractionData> {
    let p = Pair::new(omega, l, beta, quad_tol)?;
    let mut evaluations = 0;
    let mut c = [[0.0; 6]; 2];
    for (j, cj) in c.iter_mut().enumerate() {
        let (v, e) = p.corner_integrals(j)?;
        *cj = v;
        evaluations += e;
    }
    let mut gram = [[0.0; 2]; 2];
    for j in 0..2 {
        let (d, e1) = p.gram_deficit(j)?;
        let (o, e2) = p.gram_off(j)?;
        gram[j][j] = 1.0 - d;
        gram[j][1 - j] = o;
        evaluations += e1 + e2;
    }
    let q = &p.q[0];
    Ok(InteractionData {
        omega,
        l,
        beta,
        alpha: q.alpha,
        tau: q.ell / l,
        ell: q.ell,
        e_alpha: sector_ground_energy(q.alpha, beta)?,
        gram,
        w12: c[0][0],
        w21: c[1][0],
        residuals: [c[0][3].max(0.0).sqrt(), c[1][3].max(0.0).sqrt()],
        b: [[c[0][5], c[0][2]], [c[1][2], c[1][5]]],
        eps: [[c[0][4], c[0][1]], [c[1][1], c[1][4]]],
        support_separation: (q.ell / l - 1.0) * l / q.alpha.tan() - 2.0 / q.alpha.sin(),
        quad_tol,
        evaluations,
    })
}

/// `(1/a)·√(n/Λ)·max_j ε_j`, `Λ` the smallest eigenvalue of `G`.
pub fn subspace_distance_bound(residuals: &[f64], gram: &[Vec<f64>], gap: f64) -> Result<f64> {
    let n = residuals.len();
    if !(gap > 0.0) {
        return Err(Error::InvalidArgument(format!("gap must be positive, got {gap}")));
    }
    if n == 0 || gram.len() != n || gram.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("gram must be n x n with n = number of residuals".into()));
    }
    let g = DMatrix::from_fn(n, n, |i, j| 0.5 * (gram[i][j] + gram[j][i]));
    let lambda = SymmetricEigen::new(g).eigenvalues.min();
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("gram matrix not positive definite (min eigenvalue {lambda})")));
    }
    let eps = residuals.iter().fold(0.0f64, |m, &e| m.max(e.abs()));
    Ok((n as f64 / lambda).sqrt() * eps / gap)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalDerivativeSample {
    pub point: Point,
    /// `n·∇φ` with the outward normal of the ray.
    pub value: f64,
    /// The `χ'(y₁ - ℓcosα)` term alone; the radial factor is tangential.
    pub first_factor_term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalDerivativeReport {
    pub samples: Vec<NormalDerivativeSample>,
    pub max_abs: f64,
    pub argmax: Option<Point>,
}

/// `n` equally spaced points on each boundary ray, radius in `(0, ℓ]`.
pub fn ray_samples(alpha: f64, ell: f64, n: usize) -> Vec<Point> {
    let (s, c) = alpha.sin_cos();
    let mut out = Vec::with_capacity(2 * n);
    for i in 1..=n {
        let r = ell * i as f64 / n as f64;
        out.push([r * c, r * s]);
        out.push([r * c, -r * s]);
    }
    out
}

/// Evaluates `∂φ/∂n` on the sector boundary; reports without asserting.
pub fn boundary_normal_derivative_diagnostic(alpha: f64, ell: f64, samples: &[Point]) -> Result<NormalDerivativeReport> {
    let cut = Cutoff::new(alpha, ell)?;
    let (s, c) = alpha.sin_cos();
    let mut out = Vec::with_capacity(samples.len());
    let mut max_abs = 0.0;
    let mut argmax = None;
    for &y in samples {
        let n = if y[1] >= 0.0 { [-s, c] } else { [-s, -c] };
        let jet = cut.jet(y);
        let (_, da, _) = cutoff_chi_derivatives(y[0] - ell * c);
        let (cb, _, _) = cutoff_chi_derivatives(y[0].hypot(y[1]) - (ell - 1.0));
        let value = dot(n, jet.grad);
        if value.abs() > max_abs {
            max_abs = value.abs();
            argmax = Some(y);
        }
        out.push(NormalDerivativeSample { point: y, value, first_factor_term: da * cb * n[0] });
    }
    Ok(NormalDerivativeReport { samples: out, max_abs, argmax })
}
