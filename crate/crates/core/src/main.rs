use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use robin_tunneling::acceptance;
use robin_tunneling::asymptotics::{sector_ground_energy, two_corner_prediction};
use robin_tunneling::geometry::DomainSpec;
use robin_tunneling::harness::{emit, parse_angle, richardson, run_sweep, solve_fem, Format, RunConfig};
use robin_tunneling::quasimodes::{interaction_data, DEFAULT_QUAD_TOL};
use robin_tunneling::robin1d::{dirichlet_robin_k, neumann_robin_k, OneDResult};
use robin_tunneling::Error;

#[derive(Parser)]
#[command(version, about = "Robin Laplacian corner tunneling toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn angle(s: &str) -> Result<f64, String> {
    parse_angle(s).ok_or_else(|| format!("cannot read angle '{s}' (try 0.7, pi/4, 3pi/4)"))
}

#[derive(Subcommand)]
enum Command {
    /// FEM ground energy of an infinite sector of half-opening `alpha`.
    Sector {
        #[arg(long, value_parser = angle)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, value_delimiter = ',', default_value = "5,6,7")]
        levels: Vec<usize>,
        /// Length scale controlling the Agmon cap of the truncation rule.
        #[arg(long = "L", default_value_t = 3.0)]
        l: f64,
        #[arg(long, default_value_t = 1e-10)]
        trunc_tol: f64,
    },
    /// Two lowest eigenvalues on the two-corner domain.
    Solve {
        #[arg(long, value_parser = angle)]
        omega: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long = "L")]
        l: f64,
        #[arg(long, value_delimiter = ',', default_value = "5,6,7")]
        levels: Vec<usize>,
        #[arg(long, conflicts_with = "trunc_tol")]
        height: Option<f64>,
        #[arg(long)]
        trunc_tol: Option<f64>,
        #[arg(long)]
        grade: bool,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 1e-10)]
        solver_tol: f64,
    },
    /// Parameter sweep driven by a key=value config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Exact 1D Robin/Neumann and Robin/Dirichlet interval energies.
    Oned {
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long)]
        ell: f64,
    },
    /// Quasimode Gram matrix and interaction coefficient by quadrature.
    Quasimode {
        #[arg(long, value_parser = angle)]
        omega: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long = "L")]
        l: f64,
        #[arg(long, default_value_t = DEFAULT_QUAD_TOL)]
        quad_tol: f64,
    },
    /// Runs the acceptance suite.
    Verify {
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

enum Failure {
    Config(String),
    Solver(String),
    Acceptance,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::Parse { .. }
            | Error::InvalidArgument(_)
            | Error::InvalidDomain(_)
            | Error::ExcludedAngle { .. } => Failure::Config(e.to_string()),
            _ => Failure::Solver(e.to_string()),
        }
    }
}

fn print_levels(levels: &[usize], values: &[Vec<f64>], residuals: &[Vec<f64>]) {
    for (i, lev) in levels.iter().enumerate() {
        let es: Vec<String> = values[i].iter().map(|e| format!("{e:.12}")).collect();
        let rs: Vec<String> = residuals[i].iter().map(|r| format!("{r:.1e}")).collect();
        println!("level {lev}: E = [{}]  residuals [{}]", es.join(", "), rs.join(", "));
    }
    let k = values.first().map_or(0, Vec::len);
    for j in 0..k {
        let col: Vec<f64> = values.iter().map(|v| v[j]).collect();
        if let Some(x) = richardson(&col) {
            println!("E{} extrapolated: {:.12} ({:?})", j + 1, x.value, x.status);
        }
    }
}

fn solve_levels(spec: &DomainSpec, levels: &[usize], grade: bool, k: usize, tol: f64) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>), Failure> {
    let mut values = Vec::new();
    let mut residuals = Vec::new();
    for &lev in levels {
        let s = solve_fem(spec, lev, grade, k, tol).map_err(|e| Failure::Solver(format!("level {lev}: {e}")))?;
        values.push(s.result.eigenvalues);
        residuals.push(s.result.residuals);
    }
    Ok((values, residuals))
}

fn print_oned(label: &str, r: &OneDResult) {
    println!(
        "{label}: k = {:.15}  E = {:.15}  expansion = {:.15}  remainder = {:.3e}  ({:?})",
        r.k,
        r.energy,
        r.expansion_energy,
        r.expansion_remainder(),
        r.eigenfunction_kind
    );
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Sector { alpha, beta, levels, l, trunc_tol } => {
            let spec = DomainSpec::sector(2.0 * alpha, l, beta, Some(1.0))?.with_truncation_tol(trunc_tol)?;
            println!("sector alpha = {alpha}, beta = {beta}, cut H = {:.6}", spec.truncation_height.unwrap_or(f64::NAN));
            let (v, r) = solve_levels(&spec, &levels, false, 1, 1e-10)?;
            print_levels(&levels, &v, &r);
            println!("closed form -beta^2/sin^2(alpha): {:.12}", sector_ground_energy(alpha, beta)?);
        }
        Command::Solve { omega, beta, l, levels, height, trunc_tol, grade, k, solver_tol } => {
            let unbounded = omega >= std::f64::consts::FRAC_PI_2;
            let mut spec = DomainSpec::two_corner(omega, l, beta, unbounded.then_some(height.unwrap_or(1.0)))?;
            if height.is_none() {
                spec = spec.with_truncation_tol(trunc_tol.unwrap_or(1e-10))?;
            }
            if let Some(h) = spec.truncation_height {
                println!("cut H = {h:.6}");
            }
            let (v, r) = solve_levels(&spec, &levels, grade, k, solver_tol)?;
            print_levels(&levels, &v, &r);
            match two_corner_prediction(omega, l, beta) {
                Ok(p) => println!(
                    "leading-order prediction: E1 = {:.12}  E2 = {:.12}  splitting = {:.6e}",
                    p.e1_leading, p.e2_leading, p.splitting_leading
                ),
                Err(e) => println!("no leading-order prediction: {e}"),
            }
        }
        Command::Sweep { config } => {
            let cfg = RunConfig::from_file(&config)?;
            cfg.validate()?;
            let manifest = run_sweep(&cfg)?;
            let files = emit(&manifest, &cfg.outputs, &[Format::Csv, Format::Json, Format::Svg])?;
            for f in files {
                println!("wrote {}", f.display());
            }
            for fit in &manifest.fits {
                println!("{fit:?}");
            }
            let failures = manifest.failures();
            if !failures.is_empty() {
                return Err(Failure::Solver(failures.join("; ")));
            }
        }
        Command::Oned { beta, ell } => {
            print_oned("Robin/Neumann", &neumann_robin_k(beta, ell)?);
            match dirichlet_robin_k(beta, ell)? {
                Some(d) => print_oned("Robin/Dirichlet", &d),
                None => println!("Robin/Dirichlet: no negative eigenvalue (beta*ell <= 1)"),
            }
        }
        Command::Quasimode { omega, beta, l, quad_tol } => {
            let d = interaction_data(omega, l, beta, quad_tol)?;
            println!("E_alpha = {:.12}, ell = {:.6}, tau = {}", d.e_alpha, d.ell, d.tau);
            println!("gram = {:?}", d.gram);
            println!("w12 = {:.12e}  w21 = {:.12e}", d.w12, d.w21);
            println!("residual norms = {:?}", d.residuals);
            let (e1, e2) = d.quasi_energies();
            println!("quasimode energies: {e1:.12} {e2:.12}  splitting {:.6e}", d.quasi_splitting());
            println!("integrand evaluations: {}", d.evaluations);
        }
        Command::Verify { only } => {
            let reports: Vec<_> = if only.is_empty() {
                acceptance::run_all()
            } else {
                only.iter()
                    .map(|&i| acceptance::run(i).ok_or_else(|| Failure::Config(format!("no criterion {i}"))))
                    .collect::<Result<_, _>>()?
            };
            for r in &reports {
                println!("{r}");
            }
            if reports.iter().any(|r| !r.passed) {
                return Err(Failure::Acceptance);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("solver failure: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Acceptance) => ExitCode::from(4),
    }
}
