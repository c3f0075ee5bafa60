//! Python bindings for `robin_tunneling`.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use robin_tunneling as rt;
use rt::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NoConvergence(_) | Error::Quadrature(_) | Error::SingularPivot { .. } | Error::Io(_) | Error::Json(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Leading-order asymptotics for one `(omega, L, beta)`.
#[pyclass(get_all, frozen)]
struct Prediction {
    omega: f64,
    l: f64,
    beta: f64,
    e_alpha: f64,
    e1: f64,
    e2: f64,
    splitting: f64,
    tau: f64,
    delta_exponent: f64,
    w: f64,
}

#[pymethods]
impl Prediction {
    fn __repr__(&self) -> String {
        format!("Prediction(omega={}, L={}, beta={}, E1={}, E2={}, splitting={:e})", self.omega, self.l, self.beta, self.e1, self.e2, self.splitting)
    }
}

#[pyfunction]
fn sector_ground_energy(alpha: f64, beta: f64) -> PyResult<f64> {
    rt::asymptotics::sector_ground_energy(alpha, beta).map_err(to_py)
}

#[pyfunction]
fn coupling_w(alpha: f64, l: f64, beta: f64) -> f64 {
    rt::asymptotics::coupling_w(alpha, l, beta)
}

#[pyfunction]
fn predict(omega: f64, l: f64, beta: f64) -> PyResult<Prediction> {
    let p = rt::asymptotics::two_corner_prediction(omega, l, beta).map_err(to_py)?;
    Ok(Prediction {
        omega,
        l,
        beta,
        e_alpha: p.e_alpha,
        e1: p.e1_leading,
        e2: p.e2_leading,
        splitting: p.splitting_leading,
        tau: p.tau,
        delta_exponent: p.delta_exponent,
        w: p.w_closed,
    })
}

/// Exact 1D energies `(E_neumann, E_dirichlet or None)` on `(0, ell)`.
#[pyfunction]
fn interval_energies(beta: f64, ell: f64) -> PyResult<(f64, Option<f64>)> {
    let p = rt::robin1d::interval_robin_pair(beta, ell).map_err(to_py)?;
    Ok((p.e1.energy, p.e2.map(|r| r.energy)))
}

/// Quasimode Gram matrix, coupling and residuals.
#[pyclass(get_all, frozen)]
struct Interaction {
    gram: [[f64; 2]; 2],
    w12: f64,
    w21: f64,
    residuals: [f64; 2],
    e_alpha: f64,
    quasi_energies: (f64, f64),
    quasi_splitting: f64,
    support_separation: f64,
}

#[pyfunction]
#[pyo3(signature = (omega, l, beta, quad_tol = rt::quasimodes::DEFAULT_QUAD_TOL))]
fn quasimode_interaction(py: Python<'_>, omega: f64, l: f64, beta: f64, quad_tol: f64) -> PyResult<Interaction> {
    let d = py.detach(|| rt::quasimodes::interaction_data(omega, l, beta, quad_tol)).map_err(to_py)?;
    Ok(Interaction {
        gram: d.gram,
        w12: d.w12,
        w21: d.w21,
        residuals: d.residuals,
        e_alpha: d.e_alpha,
        quasi_energies: d.quasi_energies(),
        quasi_splitting: d.quasi_splitting(),
        support_separation: d.support_separation,
    })
}

/// Domain of the family: two-corner (default) or `kind="sector"`.
#[pyclass(frozen)]
struct Domain {
    spec: rt::geometry::DomainSpec,
}

#[pymethods]
impl Domain {
    #[new]
    #[pyo3(signature = (omega, l, beta, height = None, trunc_tol = None, kind = "two_corner"))]
    fn new(omega: f64, l: f64, beta: f64, height: Option<f64>, trunc_tol: Option<f64>, kind: &str) -> PyResult<Self> {
        use rt::geometry::DomainSpec;
        let unbounded = kind == "sector" || omega >= std::f64::consts::FRAC_PI_2;
        let h = if unbounded { Some(height.unwrap_or(1.0)) } else { height };
        let mut spec = match kind {
            "two_corner" => DomainSpec::two_corner(omega, l, beta, h),
            "sector" => DomainSpec::sector(omega, l, beta, h),
            _ => return Err(PyValueError::new_err(format!("unknown domain kind '{kind}'"))),
        }
        .map_err(to_py)?;
        if unbounded && height.is_none() {
            spec = spec.with_truncation_tol(trunc_tol.unwrap_or(1e-10)).map_err(to_py)?;
        }
        Ok(Self { spec })
    }

    #[getter]
    fn truncation_height(&self) -> Option<f64> {
        self.spec.truncation_height
    }

    /// Polygon vertices, counterclockwise.
    fn vertices(&self) -> PyResult<Vec<(f64, f64)>> {
        let p = rt::geometry::build_domain(&self.spec).map_err(to_py)?;
        Ok(p.vertices.iter().map(|v| (v[0], v[1])).collect())
    }

    /// `k` lowest FEM eigenvalues at refinement `level` with residuals.
    #[pyo3(signature = (level, k = 2, grade = false, tol = 1e-10))]
    fn solve(&self, py: Python<'_>, level: usize, k: usize, grade: bool, tol: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let spec = self.spec;
        let s = py.detach(|| rt::harness::solve_fem(&spec, level, grade, k, tol)).map_err(to_py)?;
        Ok((s.result.eigenvalues, s.result.residuals))
    }
}

/// Runs a sweep from a config file and writes CSV, JSON and SVG to its
/// `outputs` directory. Returns the written paths.
#[pyfunction]
fn run_sweep(py: Python<'_>, config_path: PathBuf) -> PyResult<Vec<PathBuf>> {
    use rt::harness::{emit, Format, RunConfig};
    let cfg = RunConfig::from_file(&config_path).map_err(to_py)?;
    py.detach(|| {
        let m = rt::harness::run_sweep(&cfg)?;
        emit(&m, &cfg.outputs, &[Format::Csv, Format::Json, Format::Svg])
    })
    .map_err(to_py)
}

/// Acceptance criteria as `(id, name, passed, detail)` tuples.
#[pyfunction]
#[pyo3(signature = (ids = None))]
fn verify(py: Python<'_>, ids: Option<Vec<usize>>) -> PyResult<Vec<(usize, String, bool, String)>> {
    let reports = py.detach(|| match ids {
        None => Ok(rt::acceptance::run_all()),
        Some(ids) => ids.iter().map(|&i| rt::acceptance::run(i).ok_or(i)).collect(),
    });
    let reports = reports.map_err(|i| PyValueError::new_err(format!("no criterion {i}")))?;
    Ok(reports.into_iter().map(|r| (r.id, r.name.to_string(), r.passed, r.detail)).collect())
}

#[pymodule]
fn robin_tunneling_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Prediction>()?;
    m.add_class::<Interaction>()?;
    m.add_class::<Domain>()?;
    m.add_function(wrap_pyfunction!(sector_ground_energy, m)?)?;
    m.add_function(wrap_pyfunction!(coupling_w, m)?)?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(interval_energies, m)?)?;
    m.add_function(wrap_pyfunction!(quasimode_interaction, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
