//! Parameter sweeps: configuration, FEM solves per `(L, level)`, analytic
//! and quasimode columns, Richardson extrapolation, and CSV/JSON/SVG output.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::asymptotics::{equilateral_prediction, sector_ground_energy, two_corner_prediction, EquilateralPrediction};
use crate::eigensolve::{certify_count_below, lowest_eigenpairs, EigenResult, CLUSTER_TOL};
use crate::fem::{assemble, SparsePencil};
use crate::geometry::{build_domain, triangulate, DomainSpec, TriMesh, AGMON_CAP_FACTOR, TRUNCATION_MARGIN};
use crate::quasimodes::interaction_data;
use crate::robin1d::separated_reference;
use crate::{Error, Result};

pub const CSV_HEADER: &str =
    "L,level,E1_fem,E2_fem,res1,res2,E1_extrap,E2_extrap,E1_thm1,E2_thm1,split_fem,split_thm1,split_quasi,E1_1d,E2_1d";

const ANGLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub omega: f64,
    pub beta: f64,
    #[serde(rename = "L_values")]
    pub l_values: Vec<f64>,
    pub mesh_levels: Vec<usize>,
    pub grade_corners: bool,
    pub truncation_tol: f64,
    pub solver_tol: f64,
    pub quad_tol: f64,
    pub outputs: PathBuf,
}

/// Parses `x`, `pi`, `pi/b`, `a*pi`, `a*pi/b` or `api/b`.
pub fn parse_angle(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return Some(v);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().ok()?),
        None => (s, 1.0),
    };
    let coef = num.strip_suffix("pi")?.trim().trim_end_matches('*').trim();
    let a = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().ok()? };
    Some(a * PI / den)
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    pub fn new(omega: f64, beta: f64, l_values: Vec<f64>, mesh_levels: Vec<usize>) -> Self {
        Self {
            omega,
            beta,
            l_values,
            mesh_levels,
            grade_corners: false,
            truncation_tol: 1e-10,
            solver_tol: 1e-10,
            quad_tol: 1e-10,
            outputs: PathBuf::from("out"),
        }
    }

    /// Flat `key = value` text; `#` starts a comment; lists are
    /// comma-separated.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::new(f64::NAN, f64::NAN, Vec::new(), Vec::new());
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: i + 1, msg };
            let (k, v) = line.split_once('=').ok_or_else(|| perr(format!("expected key = value, got `{line}`")))?;
            let (k, v) = (k.trim(), v.trim());
            if !seen.insert(k.to_string()) {
                return Err(perr(format!("duplicate key `{k}`")));
            }
            let num = |v: &str| v.parse::<f64>().map_err(|_| perr(format!("bad number `{v}` for `{k}`")));
            let list = |v: &str| -> Vec<String> {
                v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
            };
            match k {
                "omega" => c.omega = parse_angle(v).ok_or_else(|| perr(format!("bad angle `{v}`")))?,
                "beta" => c.beta = num(v)?,
                "L_values" => c.l_values = list(v).iter().map(|s| num(s)).collect::<Result<_>>()?,
                "mesh_levels" => {
                    c.mesh_levels = list(v)
                        .iter()
                        .map(|s| s.parse::<usize>().map_err(|_| perr(format!("bad level `{s}`"))))
                        .collect::<Result<_>>()?
                }
                "grade_corners" => {
                    c.grade_corners = v.parse::<bool>().map_err(|_| perr(format!("bad boolean `{v}`")))?
                }
                "truncation_tol" => c.truncation_tol = num(v)?,
                "solver_tol" => c.solver_tol = num(v)?,
                "quad_tol" => c.quad_tol = num(v)?,
                "outputs" => c.outputs = PathBuf::from(v),
                _ => return Err(perr(format!("unknown key `{k}`"))),
            }
        }
        for key in ["omega", "beta", "L_values", "mesh_levels"] {
            if !seen.contains(key) {
                return Err(cfg_err(format!("missing key `{key}`")));
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Canonical text form; `parse(to_text())` round-trips exactly.
    pub fn to_text(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        format!(
            "omega = {:?}\nbeta = {:?}\nL_values = {}\nmesh_levels = {}\ngrade_corners = {}\ntruncation_tol = {:?}\nsolver_tol = {:?}\nquad_tol = {:?}\noutputs = {}\n",
            self.omega,
            self.beta,
            join(self.l_values.iter().map(|x| format!("{x:?}")).collect()),
            join(self.mesh_levels.iter().map(|x| x.to_string()).collect()),
            self.grade_corners,
            self.truncation_tol,
            self.solver_tol,
            self.quad_tol,
            self.outputs.display()
        )
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega < PI) {
            return Err(cfg_err(format!("omega {} not in (0, pi)", self.omega)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(cfg_err(format!("beta {} must be positive", self.beta)));
        }
        for (name, t) in [("truncation_tol", self.truncation_tol), ("solver_tol", self.solver_tol), ("quad_tol", self.quad_tol)] {
            if !(t > 0.0 && t < 1.0) {
                return Err(cfg_err(format!("{name} = {t} not in (0, 1)")));
            }
        }
        if self.l_values.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(cfg_err("L_values must be positive"));
        }
        if self.l_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(cfg_err("L_values must be strictly ascending"));
        }
        if self.mesh_levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(cfg_err("mesh_levels must be strictly ascending"));
        }
        if !self.l_values.is_empty() && self.mesh_levels.is_empty() {
            return Err(cfg_err("mesh_levels must not be empty"));
        }
        Ok(())
    }

    pub fn is_equilateral(&self) -> bool {
        (self.omega - FRAC_PI_3).abs() < ANGLE_TOL
    }

    pub fn is_right_angle(&self) -> bool {
        (self.omega - FRAC_PI_2).abs() < ANGLE_TOL
    }

    /// The domain for one `L`, cut at the Agmon height when unbounded.
    pub fn domain(&self, l: f64) -> Result<DomainSpec> {
        if self.is_equilateral() {
            return DomainSpec::equilateral(l, self.beta);
        }
        let unbounded = self.omega >= FRAC_PI_2;
        DomainSpec::two_corner(self.omega, l, self.beta, unbounded.then_some(1.0))?.with_truncation_tol(self.truncation_tol)
    }
}

/// One FEM solve with everything needed downstream.
pub struct FemSolve {
    pub mesh: TriMesh,
    pub pencil: SparsePencil,
    pub result: EigenResult,
}

/// Meshes, assembles and solves for the `k` lowest pairs, shifting from
/// `1.25·E_α`.
pub fn solve_fem(spec: &DomainSpec, level: usize, grade: bool, k: usize, tol: f64) -> Result<FemSolve> {
    let poly = build_domain(spec)?;
    let mesh = triangulate(&poly, level, grade)?;
    let pencil = assemble(&mesh)?;
    let shift = default_shift(spec)?;
    let result = lowest_eigenpairs(&pencil, spec.beta, k, shift, tol)?;
    Ok(FemSolve { mesh, pencil, result })
}

/// `1.25·E_α` for the sharpest Robin corner of the domain.
pub fn default_shift(spec: &DomainSpec) -> Result<f64> {
    let mut e = -spec.beta * spec.beta;
    for (_, a) in spec.robin_corners() {
        e = e.min(sector_ground_energy(a, spec.beta)?);
    }
    Ok(1.25 * e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtrapolationStatus {
    /// Three or more levels with observed ratio in `[3, 5]`.
    Validated,
    /// Two levels; the `O(h²)` rate could not be checked.
    Unvalidated,
    /// Observed ratio outside `[3, 5]`: finest value reported.
    Rejected,
    /// One level: finest value reported.
    SingleLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub value: f64,
    pub status: ExtrapolationStatus,
    pub observed_ratio: Option<f64>,
}

/// Richardson extrapolation for `O(h²)` from values on successively
/// halved meshes (coarsest first).
pub fn richardson(values: &[f64]) -> Option<Extrapolation> {
    let n = values.len();
    let finest = *values.last()?;
    if n == 1 {
        return Some(Extrapolation { value: finest, status: ExtrapolationStatus::SingleLevel, observed_ratio: None });
    }
    let extrap = (4.0 * finest - values[n - 2]) / 3.0;
    if n == 2 {
        return Some(Extrapolation { value: extrap, status: ExtrapolationStatus::Unvalidated, observed_ratio: None });
    }
    let ratio = (values[n - 3] - values[n - 2]) / (values[n - 2] - finest);
    if (3.0..=5.0).contains(&ratio) {
        Some(Extrapolation { value: extrap, status: ExtrapolationStatus::Validated, observed_ratio: Some(ratio) })
    } else {
        Some(Extrapolation { value: finest, status: ExtrapolationStatus::Rejected, observed_ratio: ratio.is_finite().then_some(ratio) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub level: usize,
    pub nodes: usize,
    pub triangles: usize,
    pub max_edge: f64,
    /// Ascending; two values, three in equilateral mode.
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub shift_used: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "L")]
    pub l: f64,
    pub height: Option<f64>,
    pub levels: Vec<LevelResult>,
    pub e1_extrap: Option<Extrapolation>,
    pub e2_extrap: Option<Extrapolation>,
    pub split_extrap: Option<Extrapolation>,
    pub e1_thm1: Option<f64>,
    pub e2_thm1: Option<f64>,
    pub split_thm1: Option<f64>,
    pub e1_quasi: Option<f64>,
    pub e2_quasi: Option<f64>,
    pub split_quasi: Option<f64>,
    pub e1_1d: Option<f64>,
    pub e2_1d: Option<f64>,
    pub split_1d: Option<f64>,
    pub equilateral: Option<EquilateralPrediction>,
    /// Eigenvalues below `-β² - solver_tol` on the finest mesh.
    pub count_below_threshold: Option<usize>,
    pub errors: Vec<String>,
}

impl SweepRow {
    /// Extrapolated FEM splitting, or the finest raw one.
    pub fn split_fem(&self) -> Option<f64> {
        self.split_extrap.map(|e| e.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Column {
    SplitFem,
    SplitThm1,
    SplitQuasi,
    Split1d,
}

impl Column {
    pub fn name(self) -> &'static str {
        match self {
            Column::SplitFem => "split_fem",
            Column::SplitThm1 => "split_thm1",
            Column::SplitQuasi => "split_quasi",
            Column::Split1d => "split_1d",
        }
    }

    pub fn get(self, r: &SweepRow) -> Option<f64> {
        match self {
            Column::SplitFem => r.split_fem(),
            Column::SplitThm1 => r.split_thm1,
            Column::SplitQuasi => r.split_quasi,
            Column::Split1d => r.split_1d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least-squares line through `(x, ln y)`.
pub fn fit_log_linear(xs: &[f64], ys: &[f64]) -> Result<Fit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument("need at least two points of equal-length data".into()));
    }
    if let Some(y) = ys.iter().find(|&&y| !(y > 0.0)) {
        return Err(Error::InvalidArgument(format!("nonpositive value {y} in log fit")));
    }
    let n = xs.len() as f64;
    let ls: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ls.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ls).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ls.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("all abscissae equal".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(Fit { slope, intercept: my - slope * mx, r2 })
}

/// Fit of `ln(column)` against `L` over the rows where the column exists.
pub fn fit_slope(rows: &[SweepRow], column: Column) -> Result<Fit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().filter_map(|r| column.get(r).map(|v| (r.l, v))).unzip();
    if xs.len() < 3 {
        return Err(Error::InvalidArgument(format!("column {} has {} values, need 3", column.name(), xs.len())));
    }
    fit_log_linear(&xs, &ys)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub truncation: f64,
    pub solver: f64,
    pub quadrature: f64,
    pub cluster: f64,
    pub truncation_margin: f64,
    pub agmon_cap_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub config_hash: String,
    pub version: String,
    pub ordering: String,
    pub tolerances: Tolerances,
    pub rows: Vec<SweepRow>,
    pub fits: Vec<(String, Fit)>,
}

impl Manifest {
    pub fn failures(&self) -> Vec<String> {
        self.rows.iter().flat_map(|r| r.errors.iter().cloned()).collect()
    }
}

fn solve_level(cfg: &RunConfig, spec: &DomainSpec, level: usize, k: usize) -> Result<(LevelResult, Option<usize>)> {
    let s = solve_fem(spec, level, cfg.grade_corners, k, cfg.solver_tol)?;
    let count = if cfg.omega >= FRAC_PI_2 {
        Some(certify_count_below(&s.pencil, cfg.beta, -cfg.beta * cfg.beta - cfg.solver_tol)?)
    } else {
        None
    };
    Ok((
        LevelResult {
            level,
            nodes: s.mesh.nodes.len(),
            triangles: s.mesh.triangles.len(),
            max_edge: s.mesh.max_edge(),
            eigenvalues: s.result.eigenvalues,
            residuals: s.result.residuals,
            iterations: s.result.iterations,
            shift_used: s.result.shift_used,
        },
        count,
    ))
}

fn analytic_columns(cfg: &RunConfig, row: &mut SweepRow) {
    let (omega, l, beta) = (cfg.omega, row.l, cfg.beta);
    if cfg.is_equilateral() {
        match equilateral_prediction(l, beta) {
            Ok(p) => row.equilateral = Some(p),
            Err(e) => row.errors.push(format!("L={l}: equilateral prediction: {e}")),
        }
        return;
    }
    if let Ok(p) = two_corner_prediction(omega, l, beta) {
        row.e1_thm1 = Some(p.e1_leading);
        row.e2_thm1 = Some(p.e2_leading);
        row.split_thm1 = Some(p.splitting_leading);
    }
    // quasimodes need the plateau condition; skipped silently otherwise
    if let Ok(d) = interaction_data(omega, l, beta, cfg.quad_tol) {
        let (e1, e2) = d.quasi_energies();
        row.e1_quasi = Some(e1);
        row.e2_quasi = Some(e2);
        row.split_quasi = Some(d.quasi_splitting());
    }
    if cfg.is_right_angle() {
        match separated_reference(beta, l, row.height) {
            Ok(r) => {
                row.e1_1d = Some(r.e1);
                row.e2_1d = r.e2;
                row.split_1d = r.splitting();
            }
            Err(e) => row.errors.push(format!("L={l}: separated reference: {e}")),
        }
    }
}

/// Runs every `(L, level)` solve (in parallel) and assembles sorted rows.
/// Solver failures are recorded in the rows, not returned.
pub fn run_sweep(cfg: &RunConfig) -> Result<Manifest> {
    cfg.validate()?;
    let k = if cfg.is_equilateral() { 3 } else { 2 };
    let specs: Vec<(f64, Result<DomainSpec>)> = cfg.l_values.iter().map(|&l| (l, cfg.domain(l))).collect();
    let jobs: Vec<(usize, usize)> =
        (0..specs.len()).flat_map(|i| cfg.mesh_levels.iter().map(move |&lev| (i, lev))).collect();
    let solved: Vec<(usize, usize, Result<(LevelResult, Option<usize>)>)> = jobs
        .par_iter()
        .map(|&(i, lev)| {
            let r = match &specs[i].1 {
                Ok(spec) => solve_level(cfg, spec, lev, k),
                Err(e) => Err(Error::Config(e.to_string())),
            };
            (i, lev, r)
        })
        .collect();
    let mut rows: Vec<SweepRow> = specs
        .iter()
        .map(|(l, s)| SweepRow {
            l: *l,
            height: s.as_ref().ok().and_then(|s| s.truncation_height),
            levels: Vec::new(),
            e1_extrap: None,
            e2_extrap: None,
            split_extrap: None,
            e1_thm1: None,
            e2_thm1: None,
            split_thm1: None,
            e1_quasi: None,
            e2_quasi: None,
            split_quasi: None,
            e1_1d: None,
            e2_1d: None,
            split_1d: None,
            equilateral: None,
            count_below_threshold: None,
            errors: Vec::new(),
        })
        .collect();
    for (i, lev, r) in solved {
        match r {
            Ok((lr, count)) => {
                rows[i].levels.push(lr);
                // jobs are in ascending level order, so the finest count wins
                if count.is_some() {
                    rows[i].count_below_threshold = count;
                }
            }
            Err(e) => {
                let msg = format!("L={}, level={lev}: {e}", rows[i].l);
                rows[i].errors.push(msg);
            }
        }
    }
    let analytic: Vec<SweepRow> = rows
        .into_par_iter()
        .map(|mut row| {
            row.levels.sort_by_key(|lr| lr.level);
            let col = |j: usize| row.levels.iter().map(|lr| lr.eigenvalues[j]).collect::<Vec<_>>();
            if !row.levels.is_empty() {
                let (e1, e2) = (col(0), col(1));
                let split: Vec<f64> = e1.iter().zip(&e2).map(|(a, b)| b - a).collect();
                row.e1_extrap = richardson(&e1);
                row.e2_extrap = richardson(&e2);
                row.split_extrap = richardson(&split);
            }
            analytic_columns(cfg, &mut row);
            row
        })
        .collect();
    let mut fits = Vec::new();
    for c in [Column::SplitFem, Column::SplitThm1, Column::SplitQuasi, Column::Split1d] {
        if let Ok(f) = fit_slope(&analytic, c) {
            fits.push((c.name().to_string(), f));
        }
    }
    Ok(Manifest {
        config: cfg.clone(),
        config_hash: cfg.hash(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        ordering: "nested_dissection".into(),
        tolerances: Tolerances {
            truncation: cfg.truncation_tol,
            solver: cfg.solver_tol,
            quadrature: cfg.quad_tol,
            cluster: CLUSTER_TOL,
            truncation_margin: TRUNCATION_MARGIN,
            agmon_cap_factor: AGMON_CAP_FACTOR,
        },
        rows: analytic,
        fits,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

/// CSV with one line per `(L, level)`; extrapolated values sit on the
/// finest level of each `L`.
pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let finest = r.levels.last().map(|lr| lr.level);
        let emit = |out: &mut String, lr: Option<&LevelResult>| {
            let is_finest = lr.map(|x| Some(x.level) == finest).unwrap_or(true);
            let ev = |j: usize| lr.and_then(|x| x.eigenvalues.get(j).copied());
            let res = |j: usize| lr.and_then(|x| x.residuals.get(j).copied());
            let fields = [
                format!("{:.16e}", r.l),
                lr.map(|x| x.level.to_string()).unwrap_or_default(),
                cell(ev(0)),
                cell(ev(1)),
                cell(res(0)),
                cell(res(1)),
                cell(if is_finest { r.e1_extrap.map(|e| e.value) } else { None }),
                cell(if is_finest { r.e2_extrap.map(|e| e.value) } else { None }),
                cell(r.e1_thm1),
                cell(r.e2_thm1),
                cell(if is_finest { r.split_fem() } else { ev(1).zip(ev(0)).map(|(b, a)| b - a) }),
                cell(r.split_thm1),
                cell(r.split_quasi),
                cell(r.e1_1d),
                cell(r.e2_1d),
            ];
            let _ = writeln!(out, "{}", fields.join(","));
        };
        if r.levels.is_empty() {
            emit(&mut out, None);
        }
        for lr in &r.levels {
            emit(&mut out, Some(lr));
        }
    }
    out
}

/// Log-scale plot of the splitting columns against `L`: one polyline per
/// series, a dashed fitted line and slope label for series with ≥ 3 points.
pub fn to_svg(rows: &[SweepRow]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const PAD: f64 = 60.0;
    let series: Vec<(Column, &str, Vec<(f64, f64)>)> = [
        (Column::SplitFem, "#1f77b4"),
        (Column::SplitThm1, "#d62728"),
        (Column::SplitQuasi, "#2ca02c"),
        (Column::Split1d, "#9467bd"),
    ]
    .into_iter()
    .map(|(c, color)| (c, color, rows.iter().filter_map(|r| c.get(r).filter(|v| *v > 0.0).map(|v| (r.l, v.ln()))).collect()))
    .filter(|(_, _, pts): &(Column, &str, Vec<(f64, f64)>)| !pts.is_empty())
    .collect();
    let mut svg = format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    );
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.2.iter().copied()).collect();
    if all.is_empty() {
        svg.push_str("<text x=\"20\" y=\"40\">no data</text>\n</svg>\n");
        return svg;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let _ = writeln!(
        svg,
        "<rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>",
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(svg, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">L</text>", W / 2.0, H - 15.0);
    let _ = writeln!(svg, "<text x=\"15\" y=\"{}\" transform=\"rotate(-90 15 {})\" text-anchor=\"middle\">ln(E2 - E1)</text>", H / 2.0, H / 2.0);
    for (i, (c, color, pts)) in series.iter().enumerate() {
        let p: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(svg, "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"><title>{}</title></polyline>", p.join(" "), c.name());
        let ly = PAD + 18.0 * (i as f64 + 1.0);
        let mut label = c.name().to_string();
        if pts.len() >= 3 {
            let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().map(|&(x, y)| (x, y.exp())).unzip();
            if let Ok(f) = fit_log_linear(&xs, &ys) {
                let _ = writeln!(
                    svg,
                    "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{color}\" stroke-dasharray=\"5,4\"/>",
                    px(x0),
                    py(f.intercept + f.slope * x0),
                    px(x1),
                    py(f.intercept + f.slope * x1)
                );
                let _ = write!(label, " slope {:.4}", f.slope);
            }
        }
        let _ = writeln!(svg, "<text x=\"{}\" y=\"{ly}\" fill=\"{color}\" font-size=\"12\">{label}</text>", PAD + 8.0);
    }
    svg.push_str("</svg>\n");
    svg
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Writes `sweep.csv`, `manifest.json` and `splitting.svg` as requested.
pub fn emit(manifest: &Manifest, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for f in formats {
        let (name, body) = match f {
            Format::Csv => ("sweep.csv", to_csv(&manifest.rows)),
            Format::Json => ("manifest.json", serde_json::to_string_pretty(manifest)?),
            Format::Svg => ("splitting.svg", to_svg(&manifest.rows)),
        };
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0.5"), Some(0.5));
        assert!((parse_angle("pi/2").unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((parse_angle("3pi/4").unwrap() - 0.75 * PI).abs() < 1e-15);
        assert!((parse_angle("3*pi/4").unwrap() - 0.75 * PI).abs() < 1e-15);
        assert!((parse_angle("pi").unwrap() - PI).abs() < 1e-15);
        assert_eq!(parse_angle("tau"), None);
    }

    #[test]
    fn config_round_trip() {
        let text = "# sweep\nomega = pi/2\nbeta = 1\nL_values = 2, 3\nmesh_levels = 3,4\ngrade_corners = true\nquad_tol = 1e-9\noutputs = /tmp/x\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.l_values, vec![2.0, 3.0]);
        assert!(c.grade_corners && c.quad_tol == 1e-9 && c.solver_tol == 1e-10);
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn config_errors() {
        let base = "omega = 1\nbeta = 1\nL_values = 3\nmesh_levels = 2\n";
        assert!(RunConfig::parse(base).is_ok());
        assert!(matches!(RunConfig::parse(&format!("{base}foo = 1\n")), Err(Error::Parse { line: 5, .. })));
        assert!(matches!(RunConfig::parse("omega = 1\n"), Err(Error::Config(_))));
        assert!(RunConfig::parse(&format!("{base}solver_tol = 2\n")).is_err());
        assert!(RunConfig::parse("omega = 1\nbeta = 1\nL_values = 3,2\nmesh_levels = 2\n").is_err());
        assert!(RunConfig::parse(&format!("{base}beta = 2\n")).is_err());
    }

    #[test]
    fn richardson_cases() {
        let e = richardson(&[1.0]).unwrap();
        assert_eq!(e.status, ExtrapolationStatus::SingleLevel);
        let v = [2.0 + 1.0, 2.0 + 0.25, 2.0 + 0.0625];
        let e = richardson(&v).unwrap();
        assert_eq!(e.status, ExtrapolationStatus::Validated);
        assert!((e.value - 2.0).abs() < 1e-15);
        let e = richardson(&[3.0, 2.5, 2.45]).unwrap();
        assert_eq!(e.status, ExtrapolationStatus::Rejected);
        assert_eq!(e.value, 2.45);
        assert!((e.observed_ratio.unwrap() - 10.0).abs() < 1e-9);
        assert_eq!(richardson(&[3.0, 2.25]).unwrap().status, ExtrapolationStatus::Unvalidated);
        assert!(richardson(&[]).is_none());
    }

    #[test]
    fn synthetic_slope() {
        let xs: Vec<f64> = (0..6).map(|i| 1.0 + 0.5 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * (-1.7 * x).exp()).collect();
        let f = fit_log_linear(&xs, &ys).unwrap();
        assert!((f.slope + 1.7).abs() < 1e-12 && (f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!(fit_log_linear(&[1.0, 2.0], &[1.0, -1.0]).is_err());
    }

    #[test]
    fn empty_sweep() {
        let mut c = RunConfig::new(FRAC_PI_2, 1.0, vec![], vec![]);
        c.outputs = PathBuf::from("unused");
        let m = run_sweep(&c).unwrap();
        assert!(m.rows.is_empty());
        assert_eq!(to_csv(&m.rows), format!("{CSV_HEADER}\n"));
    }
}
