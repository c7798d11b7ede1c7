//! `heisenberg`: geodesic computations, invariant suites and scans on the
//! Heisenberg group, with CSV/JSON output.
//!
//! Exit codes: 0 success, 1 verification failure, 2 validation error,
//! 3 I/O error, 4 solver failure.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use heisenberg::export::{curve_csv, ray_csv};
use heisenberg::riemannian::{
    distance_probe, ray_scan, sample_riem_closed_form, RayScanOptions, RiemGeodesicParams,
};
use heisenberg::sr::{connect, sample_closed_form, sample_numeric, ConnectOptions, NormalExtremalParams};
use heisenberg::verify::{run_suite, Suite};
use heisenberg::GroupPoint;

use config::{load_config, ConnectArgs, DistanceArgs, Overlay, RayScanArgs, RiemArgs, SrArgs};

#[derive(Debug, Parser)]
#[command(name = "heisenberg", version, about = "Geodesics of the Heisenberg group")]
struct Cli {
    /// JSON file with default values for the subcommand's flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a sub-Riemannian normal extremal from the origin (CSV).
    SrGeodesic(SrArgs),
    /// Sample a unit-speed Riemannian geodesic from the origin (CSV).
    RiemGeodesic(RiemArgs),
    /// Shortest normal extremal from the origin to a target point (JSON).
    Connect(ConnectArgs),
    /// Run a named invariant suite.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },
    /// Classify Riemannian geodesic directions as rays or beaten (CSV).
    RayScan(RayScanArgs),
    /// Shortest geodesic length found to (0, ..., 0, Z) (JSON).
    DistanceProbe(DistanceArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuiteArg {
    Brackets,
    Connection,
    Contact,
    Curvature,
    Extremals,
    Rays,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Brackets => Suite::Brackets,
            SuiteArg::Connection => Suite::Connection,
            SuiteArg::Contact => Suite::Contact,
            SuiteArg::Curvature => Suite::Curvature,
            SuiteArg::Extremals => Suite::Extremals,
            SuiteArg::Rays => Suite::Rays,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug)]
enum CliError {
    Core(heisenberg::Error),
    Validation(String),
    Io(String),
    VerifyFailed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        use heisenberg::Error as E;
        match self {
            CliError::VerifyFailed(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
            CliError::Core(
                E::NoSolutionFound { .. }
                | E::MaxIterationsExceeded { .. }
                | E::SingularJacobian(_)
                | E::StepLimitExceeded(_)
                | E::NonFiniteState(_)
                | E::NonFiniteValue
                | E::NoConjugatePointFound(_),
            ) => 4,
            CliError::Core(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Validation(m) | CliError::Io(m) | CliError::VerifyFailed(m) => f.write_str(m),
        }
    }
}

impl From<heisenberg::Error> for CliError {
    fn from(e: heisenberg::Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn emit(out: Option<&Path>, content: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, content).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("--{name} must be positive (got {v})")))
    }
}

fn resolve_n(given: Option<usize>, inferred: Option<usize>) -> CliResult<usize> {
    let n = given.or(inferred).unwrap_or(1);
    if n == 0 {
        return Err(invalid("--n must be at least 1"));
    }
    Ok(n)
}

fn check_len(name: &str, v: &[f64], n: usize) -> CliResult<()> {
    if v.len() != n {
        return Err(invalid(format!("--{name} needs {n} entries (got {})", v.len())));
    }
    Ok(())
}

fn cmd_sr_geodesic(a: SrArgs) -> CliResult<()> {
    let n = resolve_n(a.n, a.r.as_ref().map(Vec::len))?;
    let r = a.r.ok_or_else(|| invalid("--r is required"))?;
    let theta = a.theta.ok_or_else(|| invalid("--theta is required"))?;
    check_len("r", &r, n)?;
    check_len("theta", &theta, n)?;
    let zeta = a.zeta.ok_or_else(|| invalid("--zeta is required"))?;
    let t_max = positive("t-max", a.t_max.ok_or_else(|| invalid("--t-max is required"))?)?;
    let dt = positive("dt", a.dt.unwrap_or(0.01))?;
    let p = NormalExtremalParams::new(r, theta, zeta)?;
    let curve = sample_closed_form(&p, t_max, dt)?;
    let csv = if a.numeric {
        let twin = sample_numeric(&p, t_max, dt)?;
        let deviation: Vec<f64> = curve.points.iter().zip(&twin.points).map(|(a, b)| a.sup_distance(b)).collect();
        curve_csv(&curve, &[("deviation", &deviation)])?
    } else {
        curve_csv(&curve, &[])?
    };
    emit(a.out.as_deref(), &csv)
}

fn cmd_riem_geodesic(a: RiemArgs) -> CliResult<()> {
    let gamma = a.gamma.ok_or_else(|| invalid("--gamma is required"))?;
    if !(gamma.abs() <= 1.0) {
        return Err(invalid(format!("--gamma must lie in [-1, 1] (got {gamma})")));
    }
    let t_max = positive("t-max", a.t_max.unwrap_or(10.0))?;
    let dt = positive("dt", a.dt.unwrap_or(0.01))?;
    let p = if let Some(u0) = a.u0.as_ref().or(a.v0.as_ref()) {
        if a.rho.is_some() || a.phi.is_some() {
            return Err(invalid("give either --u0/--v0 or --rho/--phi, not both"));
        }
        let n = resolve_n(a.n, Some(u0.len()))?;
        let u0 = a.u0.clone().unwrap_or_else(|| vec![0.0; n]);
        let v0 = a.v0.clone().unwrap_or_else(|| vec![0.0; n]);
        check_len("u0", &u0, n)?;
        check_len("v0", &v0, n)?;
        RiemGeodesicParams::from_initial_velocity(&u0, &v0, gamma)?
    } else {
        let n = resolve_n(a.n, a.rho.as_ref().map(Vec::len))?;
        let rho = a.rho.clone().unwrap_or_else(|| {
            let mut r = vec![0.0; n];
            r[0] = (1.0 - gamma * gamma).sqrt();
            r
        });
        let phi = a.phi.clone().unwrap_or_else(|| vec![0.0; n]);
        check_len("rho", &rho, n)?;
        check_len("phi", &phi, n)?;
        RiemGeodesicParams::new(rho, phi, gamma)?
    };
    let curve = sample_riem_closed_form(&p, t_max, dt)?;
    emit(a.out.as_deref(), &curve_csv(&curve, &[])?)
}

fn cmd_connect(a: ConnectArgs) -> CliResult<()> {
    let target = a.target.ok_or_else(|| invalid("--target is required"))?;
    if target.len() < 3 || target.len() % 2 == 0 {
        return Err(invalid(format!("--target needs 2n+1 coordinates (got {})", target.len())));
    }
    if let Some(n) = a.n {
        check_len("target", &target, 2 * n + 1)?;
    }
    let opts = ConnectOptions {
        tol: positive("tol", a.tol.unwrap_or(1e-6))?,
        ..ConnectOptions::default()
    };
    let point = GroupPoint::from_coords(&target)?;
    let sol = connect(&point, &opts)?;
    emit(a.out.as_deref(), &to_json(&sol))
}

fn cmd_verify(suite: Suite, format: ReportFormat) -> CliResult<()> {
    let report = run_suite(suite)?;
    match format {
        ReportFormat::Text => print!("{}", report.to_text()),
        ReportFormat::Json => print!("{}", to_json(&report)),
    }
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::VerifyFailed(format!(
            "suite {suite}: {} checks failed",
            report.failures().count()
        )))
    }
}

fn cmd_ray_scan(a: RayScanArgs) -> CliResult<()> {
    let n = resolve_n(a.n, None)?;
    let grid = a.gamma_grid.unwrap_or_default();
    if grid.is_empty() {
        return Err(invalid("--gamma-grid must not be empty"));
    }
    let defaults = RayScanOptions::default();
    let opts = RayScanOptions {
        t_step: positive("t-step", a.t_step.unwrap_or(defaults.t_step))?,
        directions: a.directions.unwrap_or(defaults.directions),
        ..defaults
    };
    let horizon = positive("horizon", a.horizon.unwrap_or(50.0))?;
    let rows = ray_scan(n, &grid, horizon, &opts)?;
    emit(a.out.as_deref(), &ray_csv(&rows))
}

fn cmd_distance_probe(a: DistanceArgs) -> CliResult<()> {
    let n = resolve_n(a.n, None)?;
    let z = positive("z", a.z.ok_or_else(|| invalid("--z is required"))?)?;
    emit(a.out.as_deref(), &to_json(&distance_probe(n, z)?))
}

fn run(cli: Cli) -> CliResult<()> {
    let config = match &cli.config {
        Some(path) => Some(load_config(path)?),
        None => None,
    };
    let pick = |key: &str| config.as_ref().and_then(|c| c.get(key).cloned());
    match cli.command {
        Command::SrGeodesic(a) => cmd_sr_geodesic(a.overlay(pick("sr-geodesic"), &config)?),
        Command::RiemGeodesic(a) => cmd_riem_geodesic(a.overlay(pick("riem-geodesic"), &config)?),
        Command::Connect(a) => cmd_connect(a.overlay(pick("connect"), &config)?),
        Command::Verify { suite, format } => cmd_verify(suite.into(), format),
        Command::RayScan(a) => cmd_ray_scan(a.overlay(pick("ray-scan"), &config)?),
        Command::DistanceProbe(a) => cmd_distance_probe(a.overlay(pick("distance-probe"), &config)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
