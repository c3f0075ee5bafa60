//! The verification suite. Each criterion runs with pinned parameters and
//! tolerances and reports pass/fail with the measured numbers.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::asymptotics::{coupling_w, interaction_matrix, sector_ground_energy, tau, two_corner_prediction};
use crate::eigensolve::certify_count_below;
use crate::fem::assemble;
use crate::geometry::{build_domain, triangulate, DomainSpec, TriMesh};
use crate::harness::{fit_log_linear, richardson, solve_fem, ExtrapolationStatus};
use crate::quasimodes::interaction_data;
use crate::robin1d::{dirichlet_robin_k, interval_robin_pair, neumann_robin_k, separated_reference};
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl std::fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] criterion {} ({}): {} [{:.2?}]",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed
        )
    }
}

pub const NAMES: [&str; 8] = [
    "1D expansion order",
    "separated-variable cross-check",
    "sector ground energy",
    "tunneling rate at right angle",
    "triangle splitting trend",
    "quasimode machinery",
    "exact identities",
    "eigenvector structure",
];

fn report(id: usize, f: impl FnOnce() -> Result<(bool, String)>) -> CriterionReport {
    let t = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionReport { id, name: NAMES[id - 1], passed, detail, elapsed: t.elapsed() }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Runs criterion `id` (1-based).
pub fn run(id: usize) -> Option<CriterionReport> {
    Some(match id {
        1 => report(1, expansion_order),
        2 => report(2, separated_cross_check),
        3 => report(3, sector_energy),
        4 => report(4, tunneling_rate),
        5 => report(5, triangle_splitting),
        6 => report(6, quasimode_machinery),
        7 => report(7, exact_identities),
        8 => report(8, eigenvector_structure),
        _ => return None,
    })
}

pub fn run_all() -> Vec<CriterionReport> {
    (1..=8).filter_map(run).collect()
}

// ---------------------------------------------------------------- 1

pub const C1_ELLS: [f64; 3] = [4.0, 6.0, 8.0];
pub const C1_SLOPE_TOL: f64 = 0.10;

fn expansion_order() -> Result<(bool, String)> {
    let t = Instant::now();
    let beta = 1.0;
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, errs) in [
        ("N", C1_ELLS.iter().map(|&l| Ok(neumann_robin_k(beta, l)?.expansion_remainder().abs())).collect::<Result<Vec<_>>>()?),
        (
            "D",
            C1_ELLS
                .iter()
                .map(|&l| {
                    dirichlet_robin_k(beta, l)?
                        .map(|r| r.expansion_remainder().abs())
                        .ok_or_else(|| Error::InvalidArgument(format!("no Dirichlet root at ell={l}")))
                })
                .collect::<Result<Vec<_>>>()?,
        ),
    ] {
        let fit = fit_log_linear(&C1_ELLS, &errs)?;
        let bound = 100.0 * 64.0 * (-6.0 * 8.0f64).exp();
        let slope_ok = rel(fit.slope, -6.0 * beta) <= C1_SLOPE_TOL;
        let bound_ok = errs[2] < bound;
        ok &= slope_ok && bound_ok;
        detail.push(format!("{name}: slope {:.4} (target -6 +-10%), err(8) {:.3e} < {:.3e}: {bound_ok}", fit.slope, errs[2], bound));
    }
    let fast = t.elapsed() < Duration::from_secs(1);
    ok &= fast;
    detail.push(format!("runtime {:.2?} < 1s: {fast}", t.elapsed()));
    Ok((ok, detail.join("; ")))
}

// ---------------------------------------------------------------- 2

pub const C2_LEVELS: [usize; 3] = [6, 7, 8];
pub const C2_REL_TOL: f64 = 1e-3;

fn extrapolated(values: &[f64]) -> Result<(f64, ExtrapolationStatus)> {
    let e = richardson(values).ok_or_else(|| Error::InvalidArgument("no levels".into()))?;
    Ok((e.value, e.status))
}

fn separated_cross_check() -> Result<(bool, String)> {
    let t = Instant::now();
    let (beta, l) = (1.0, 3.0);
    let spec = DomainSpec::two_corner(FRAC_PI_2, l, beta, Some(1.0))?.with_truncation_tol(1e-10)?;
    let h = spec.truncation_height.expect("unbounded domain has a cut");
    let reference = separated_reference(beta, l, Some(h))?;
    let mut e1 = Vec::new();
    let mut e2 = Vec::new();
    for &lev in &C2_LEVELS {
        let s = solve_fem(&spec, lev, false, 2, 1e-10)?;
        e1.push(s.result.eigenvalues[0]);
        e2.push(s.result.eigenvalues[1]);
    }
    let (x1, s1) = extrapolated(&e1)?;
    let (x2, s2) = extrapolated(&e2)?;
    let r2 = reference.e2.ok_or_else(|| Error::InvalidArgument("no second reference eigenvalue".into()))?;
    let (d1, d2) = (rel(x1, reference.e1), rel(x2, r2));
    let fast = t.elapsed() <= Duration::from_secs(300);
    let ok = d1 <= C2_REL_TOL && d2 <= C2_REL_TOL && fast;
    Ok((
        ok,
        format!(
            "H={h:.4}; E1 {x1:.8} vs {:.8} (rel {d1:.2e}, {s1:?}); E2 {x2:.8} vs {r2:.8} (rel {d2:.2e}, {s2:?}); tol {C2_REL_TOL:e}; runtime ok: {fast}",
            reference.e1
        ),
    ))
}

// ---------------------------------------------------------------- 3

pub const C3_LEVELS: [usize; 3] = [6, 7, 8];

fn sector_energy() -> Result<(bool, String)> {
    let t = Instant::now();
    let (alpha, beta) = (PI / 6.0, 1.0);
    let spec = DomainSpec::sector(2.0 * alpha, 3.0, beta, Some(1.0))?.with_truncation_tol(1e-10)?;
    let mut e = Vec::new();
    for &lev in &C3_LEVELS {
        e.push(solve_fem(&spec, lev, false, 1, 1e-10)?.result.eigenvalues[0]);
    }
    let (x, status) = extrapolated(&e)?;
    let exact = sector_ground_energy(alpha, beta)?;
    let d = rel(x, exact);
    let fast = t.elapsed() <= Duration::from_secs(300);
    Ok((
        d <= 1e-3 && fast,
        format!("H={:.4}; levels {:?} -> {e:?}; extrapolated {x:.8} ({status:?}) vs {exact}: rel {d:.2e} (tol 1e-3)", spec.truncation_height.unwrap_or(0.0), C3_LEVELS),
    ))
}

// ---------------------------------------------------------------- 4

fn tunneling_rate() -> Result<(bool, String)> {
    let beta = 1.0;
    let ls: Vec<f64> = (0..7).map(|i| 3.0 + 0.5 * i as f64).collect();
    let splits = ls
        .iter()
        .map(|&l| interval_robin_pair(beta, l)?.splitting().ok_or_else(|| Error::InvalidArgument("no odd state".into())))
        .collect::<Result<Vec<_>>>()?;
    let f = fit_log_linear(&ls, &splits)?;
    let pref = f.intercept.exp();
    let ok = rel(f.slope, -2.0 * beta) <= 0.01 && rel(pref, 8.0 * beta * beta) <= 0.05;
    Ok((ok, format!("slope {:.6} (target -2 +-1%), exp(intercept) {pref:.5} (target 8 +-5%), r2 {:.8}", f.slope, f.r2)))
}

// ---------------------------------------------------------------- 5

pub const C5_LS: [f64; 3] = [2.0, 2.5, 3.0];
pub const C5_LEVELS: [usize; 3] = [6, 7, 8];

fn triangle_splitting() -> Result<(bool, String)> {
    let (omega, beta) = (FRAC_PI_4, 1.0);
    let mut splits = Vec::new();
    let mut detail = Vec::new();
    let mut resolved = true;
    for &l in &C5_LS {
        let spec = DomainSpec::two_corner(omega, l, beta, None)?;
        let mut s = Vec::new();
        for &lev in &C5_LEVELS {
            let r = solve_fem(&spec, lev, false, 2, 1e-10)?.result;
            s.push(r.eigenvalues[1] - r.eigenvalues[0]);
        }
        let n = s.len();
        let disc = (s[n - 1] - s[n - 2]).abs() / 3.0;
        let (x, status) = extrapolated(&s)?;
        resolved &= x > 10.0 * disc;
        detail.push(format!("L={l}: split {x:.6e} ({status:?}), disc. err {disc:.1e}"));
        splits.push(x);
    }
    let f = fit_log_linear(&C5_LS, &splits)?;
    let target = -2.0 * beta * (1.0 + omega.cos()) / omega.sin();
    let ok = resolved && rel(f.slope, target) <= 0.10;
    detail.push(format!("slope {:.4} vs {target:.4} (+-10%); resolved {resolved}", f.slope));
    Ok((ok, detail.join("; ")))
}

// ---------------------------------------------------------------- 6

pub const C6_QUAD_TOL: f64 = 1e-13;

fn quasimode_machinery() -> Result<(bool, String)> {
    let beta = 1.0;
    let mut devs = Vec::new();
    let mut g12 = Vec::new();
    let mut detail = Vec::new();
    let mut ok = true;
    for l in [6.0, 8.0] {
        let d = interaction_data(FRAC_PI_2, l, beta, C6_QUAD_TOL)?;
        let closed = 4.0 * beta * beta * (-2.0 * beta * l).exp();
        let dev = rel(d.coupling(), closed);
        ok &= dev <= 0.05;
        devs.push(dev);
        g12.push(d.gram[0][1].abs());
        detail.push(format!("L={l}: w {:.6e} vs {closed:.6e} (rel {dev:.2e}), g12 {:.6e}", d.coupling(), d.gram[0][1]));
    }
    ok &= devs[1] < devs[0];
    let slope = (g12[1].ln() - g12[0].ln()) / 2.0;
    let target = -2.0 * beta / (PI / 4.0).tan();
    let slope_ok = rel(slope, target) <= 0.10;
    ok &= slope_ok;
    detail.push(format!("deviation decreasing: {}; ln|g12| slope {slope:.4} vs {target} (+-10%): {slope_ok}", devs[1] < devs[0]));
    Ok((ok, detail.join("; ")))
}

// ---------------------------------------------------------------- 7

pub const C7_SEED: u64 = 20_240_601;

fn scaled(mesh: &TriMesh, s: f64) -> TriMesh {
    let mut m = mesh.clone();
    m.nodes.iter_mut().for_each(|p| *p = [s * p[0], s * p[1]]);
    m
}

fn max_rel_diff(a: &CsrMatrix, b: &CsrMatrix) -> f64 {
    let scale = a.max_abs().max(b.max_abs());
    a.axpby(1.0, b, -1.0).max_abs() / scale
}

fn exact_identities() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(C7_SEED);
    let mut worst_w: f64 = 0.0;
    let mut worst_delta: f64 = 0.0;
    for i in 0..100 {
        let omega = if i % 2 == 0 { rng.gen_range(0.2..FRAC_PI_3) } else { rng.gen_range(FRAC_PI_2..3.0) };
        let l = rng.gen_range(0.5..5.0);
        let beta = rng.gen_range(0.5..2.0);
        let p = two_corner_prediction(omega, l, beta)?;
        worst_w = worst_w.max(rel(2.0 * coupling_w(omega / 2.0, l, beta), p.splitting_leading));
        let delta = if omega < FRAC_PI_3 { 2.0 * (1.0 / omega.cos() - 1.0) } else { 2.0 };
        worst_delta = worst_delta.max((p.delta_exponent - delta).abs()).max((p.delta_exponent - 2.0 * (tau(omega)? - 1.0)).abs());
    }

    let mut worst_scale: f64 = 0.0;
    for _ in 0..20 {
        let omega = rng.gen_range(0.3..2.8);
        let l = rng.gen_range(0.5..3.0);
        let beta = rng.gen_range(0.5..2.0);
        let s = rng.gen_range(0.2..5.0);
        let spec = DomainSpec::two_corner(omega, l, beta, (omega >= FRAC_PI_2).then_some(2.0 * l))?;
        let mesh = triangulate(&build_domain(&spec)?, 2, false)?;
        let p = assemble(&mesh)?;
        let q = assemble(&scaled(&mesh, s))?;
        worst_scale = worst_scale
            .max(max_rel_diff(&q.k, &p.k))
            .max(max_rel_diff(&q.m, &p.m.scale(s * s)))
            .max(max_rel_diff(&q.b, &p.b.scale(s)))
            .max(max_rel_diff(&q.operator(beta / s), &p.operator(beta)));
    }

    let mut double_exact = true;
    let mut worst_dense: f64 = 0.0;
    for _ in 0..100 {
        let e = rng.gen_range(-10.0..-0.1);
        let w = rng.gen_range(1e-8..1.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let m = interaction_matrix(e, w, 3)?;
        let ev = &m.eigenvalues;
        double_exact &= if w > 0.0 { ev[0] == ev[1] } else { ev[1] == ev[2] };
        let dense = SymmetricEigen::new(DMatrix::from_fn(3, 3, |i, j| m.matrix[i][j]));
        let mut d: Vec<f64> = dense.eigenvalues.iter().copied().collect();
        d.sort_by(f64::total_cmp);
        for (a, b) in d.iter().zip(ev) {
            worst_dense = worst_dense.max((a - b).abs() / e.abs());
        }
    }

    let ok = worst_w <= 1e-13 && worst_scale <= 1e-12 && double_exact && worst_dense <= 1e-13 && worst_delta <= 1e-15;
    Ok((
        ok,
        format!(
            "2w(omega/2) vs split: {worst_w:.1e} (<=1e-13); scaling identity: {worst_scale:.1e} (<=1e-12); 3x3 double exact: {double_exact}, dense agreement {worst_dense:.1e}; delta=2(tau-1): {worst_delta:.1e}"
        ),
    ))
}

// ---------------------------------------------------------------- 8

pub const C8_LEVEL: usize = 7;
/// Keeps the cut where the ground state is still resolved in double precision.
pub const C8_TRUNCATION_TOL: f64 = 1e-4;

/// Index of the mirror image `(-x₁, x₂)` of every node, if the mesh is
/// reflection-symmetric.
pub fn mirror_map(mesh: &TriMesh) -> Option<Vec<usize>> {
    let scale = mesh.nodes.iter().fold(0.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs())).max(1.0);
    let key = |x: f64, y: f64| ((x / scale * 1e9).round() as i64, (y / scale * 1e9).round() as i64);
    let index: HashMap<(i64, i64), usize> = mesh.nodes.iter().enumerate().map(|(i, p)| (key(p[0], p[1]), i)).collect();
    mesh.nodes.iter().map(|p| index.get(&key(-p[0], p[1])).copied()).collect()
}

fn eigenvector_structure() -> Result<(bool, String)> {
    let (omega, beta, l) = (3.0 * FRAC_PI_4, 1.0, 4.0);
    let spec = DomainSpec::two_corner(omega, l, beta, Some(1.0))?.with_truncation_tol(C8_TRUNCATION_TOL)?;
    let s = solve_fem(&spec, C8_LEVEL, false, 2, 1e-10)?;
    let dirichlet: std::collections::HashSet<usize> = s.pencil.dirichlet_nodes.iter().copied().collect();
    let u1 = &s.result.eigenvectors[0];
    let nonpositive = (0..u1.len()).filter(|i| !dirichlet.contains(i) && u1[*i] <= 0.0).count();
    let mirror = mirror_map(&s.mesh).ok_or_else(|| Error::DegenerateMesh("mesh is not mirror-symmetric".into()))?;
    let u2 = &s.result.eigenvectors[1];
    let sup = u2.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let asym = (0..u2.len()).map(|i| (u2[i] + u2[mirror[i]]).abs()).fold(0.0, f64::max) / sup;
    let ea = sector_ground_energy(omega / 2.0, beta)?;
    let delta = -beta * beta - ea;
    let count = certify_count_below(&s.pencil, beta, ea + delta)? - certify_count_below(&s.pencil, beta, ea - delta)?;
    let ok = nonpositive == 0 && asym <= 1e-6 && count == 2;
    Ok((
        ok,
        format!(
            "E = {:?}; ground state nonpositive free nodes: {nonpositive}; odd asymmetry {asym:.1e} (<=1e-6); eigenvalues in ({:.5}, {:.5}): {count} (want 2)",
            s.result.eigenvalues,
            ea - delta,
            ea + delta
        ),
    ))
}
