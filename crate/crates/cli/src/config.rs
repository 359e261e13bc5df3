//! Run configuration from flags and an optional TOML file.

use std::path::PathBuf;

use bundle_newton::problems::ProblemParams;
use bundle_newton::{ConnectionKind, SolverConfig, TransportKind};
use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::literal::{parse_matrix, parse_vector};
use crate::CliError;

/// Environment variable naming the directory for traces when `--output` is
/// not given.
pub const OUTPUT_DIR_ENV: &str = "BUNDLE_NEWTON_OUTPUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Local,
    Damped,
    Diffpath,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConnectionChoice {
    Tangential,
    Retraction,
    DualRetraction,
    DualTangential,
}

impl From<ConnectionChoice> for ConnectionKind {
    fn from(c: ConnectionChoice) -> Self {
        match c {
            ConnectionChoice::Tangential => ConnectionKind::Tangential,
            ConnectionChoice::Retraction => ConnectionKind::RetractionDerived,
            ConnectionChoice::DualRetraction => ConnectionKind::DualRetraction,
            ConnectionChoice::DualTangential => ConnectionKind::DualTangential,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransportChoice {
    Projection,
    Retraction,
}

impl From<TransportChoice> for TransportKind {
    fn from(t: TransportChoice) -> Self {
        match t {
            TransportChoice::Projection => TransportKind::Projection,
            TransportChoice::Retraction => TransportKind::Retraction,
        }
    }
}

/// Flags shared by `solve` and `check`. Every flag overrides the matching
/// key of `--config`.
#[derive(Clone, Debug, Default, Args)]
pub struct RunArgs {
    /// TOML file with any of the keys below (flag names with underscores)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Registered problem name (see `list`)
    #[arg(long)]
    pub problem: Option<String>,
    /// Symmetric matrix: diag:a,b,c or file:<path>
    #[arg(long = "A", value_name = "MATRIX")]
    pub a: Option<String>,
    /// Vector: a,b,c
    #[arg(long = "b", value_name = "VECTOR", allow_hyphen_values = true)]
    pub b: Option<String>,
    /// Square matrix: diag:a,b,c or file:<path>
    #[arg(long = "M", value_name = "MATRIX")]
    pub m: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub shift: Option<f64>,
    #[arg(long, value_enum)]
    pub solver: Option<SolverChoice>,
    #[arg(long)]
    pub theta_des: Option<f64>,
    #[arg(long)]
    pub theta_acc: Option<f64>,
    #[arg(long)]
    pub lambda_fail: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_outer: Option<usize>,
    #[arg(long)]
    pub max_inner: Option<usize>,
    #[arg(long)]
    pub initial_lambda: Option<f64>,
    /// Runge-Kutta steps of the diffpath solver
    #[arg(long)]
    pub steps: Option<usize>,
    /// Endpoint residual below which a diffpath run counts as converged
    #[arg(long)]
    pub path_tol: Option<f64>,
    /// coords:a,b,c | ones | e<i> | zero<k> | perturb:<base>:<magnitude>
    #[arg(long)]
    pub start: Option<String>,
    /// Seed for perturbed starts
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub connection: Option<ConnectionChoice>,
    #[arg(long, value_enum)]
    pub transport: Option<TransportChoice>,
    /// Trace file; `-` writes to standard output
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Keys accepted in a TOML config file.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    problem: Option<String>,
    #[serde(rename = "A")]
    a: Option<String>,
    b: Option<String>,
    #[serde(rename = "M")]
    m: Option<String>,
    shift: Option<f64>,
    solver: Option<SolverChoice>,
    theta_des: Option<f64>,
    theta_acc: Option<f64>,
    lambda_fail: Option<f64>,
    tol: Option<f64>,
    max_outer: Option<usize>,
    max_inner: Option<usize>,
    initial_lambda: Option<f64>,
    steps: Option<usize>,
    path_tol: Option<f64>,
    start: Option<String>,
    seed: Option<u64>,
    connection: Option<ConnectionChoice>,
    transport: Option<TransportChoice>,
    output: Option<PathBuf>,
}

/// Fully resolved configuration of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    pub params: ProblemParams,
    pub solver: SolverChoice,
    pub solver_config: SolverConfig,
    pub steps: usize,
    pub path_tol: f64,
    pub start: String,
    pub seed: u64,
    pub connection: Option<ConnectionKind>,
    pub output: Option<PathBuf>,
}

macro_rules! pick {
    ($flag:expr, $file:expr) => {
        $flag.clone().or($file.clone())
    };
}

impl RunConfig {
    pub fn resolve(args: &RunArgs) -> Result<RunConfig, CliError> {
        let file = match &args.config {
            Some(path) => read_file_config(path)?,
            None => FileConfig::default(),
        };
        let problem = pick!(args.problem, file.problem)
            .ok_or_else(|| CliError::config("no problem given (use --problem)".into()))?;
        let field = |name: &str, e: CliError| CliError::config(format!("{name}: {}", e.message));
        let params = ProblemParams {
            a: pick!(args.a, file.a)
                .map(|s| parse_matrix(&s))
                .transpose()
                .map_err(|e| field("A", e))?,
            b: pick!(args.b, file.b)
                .map(|s| parse_vector(&s))
                .transpose()
                .map_err(|e| field("b", e))?,
            m: pick!(args.m, file.m)
                .map(|s| parse_matrix(&s))
                .transpose()
                .map_err(|e| field("M", e))?,
            shift: pick!(args.shift, file.shift),
            transport: pick!(args.transport, file.transport).map(Into::into),
        };
        let defaults = SolverConfig::default();
        let solver_config = SolverConfig {
            theta_des: pick!(args.theta_des, file.theta_des).unwrap_or(defaults.theta_des),
            theta_acc: pick!(args.theta_acc, file.theta_acc).unwrap_or(defaults.theta_acc),
            lambda_fail: pick!(args.lambda_fail, file.lambda_fail).unwrap_or(defaults.lambda_fail),
            tol: pick!(args.tol, file.tol).unwrap_or(defaults.tol),
            max_outer: pick!(args.max_outer, file.max_outer).unwrap_or(defaults.max_outer),
            max_inner: pick!(args.max_inner, file.max_inner).unwrap_or(defaults.max_inner),
            initial_lambda: pick!(args.initial_lambda, file.initial_lambda)
                .unwrap_or(defaults.initial_lambda),
        };
        solver_config
            .validate()
            .map_err(|e| CliError::config(e.to_string()))?;
        let steps = pick!(args.steps, file.steps).unwrap_or(64);
        if steps == 0 {
            return Err(CliError::config("steps must be at least 1".into()));
        }
        let path_tol = pick!(args.path_tol, file.path_tol).unwrap_or(1e-6);
        if !(path_tol > 0.0) {
            return Err(CliError::config(format!(
                "path_tol must be positive, got {path_tol}"
            )));
        }
        Ok(RunConfig {
            problem,
            params,
            solver: pick!(args.solver, file.solver).unwrap_or(SolverChoice::Damped),
            solver_config,
            steps,
            path_tol,
            start: pick!(args.start, file.start).unwrap_or_else(|| "ones".into()),
            seed: pick!(args.seed, file.seed).unwrap_or(0),
            connection: pick!(args.connection, file.connection).map(Into::into),
            output: pick!(args.output, file.output),
        })
    }
}

fn read_file_config(path: &PathBuf) -> Result<FileConfig, CliError> {
    let body = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config '{}': {e}", path.display())))?;
    toml::from_str(&body).map_err(|e| {
        let location = e
            .span()
            .map(|span| {
                let line = body[..span.start].matches('\n').count() + 1;
                format!(" (line {line})")
            })
            .unwrap_or_default();
        CliError::config(format!("{}{location}: {}", path.display(), e.message()))
    })
}
