//! Command-line front end for `bundle-newton`: problem selection, solver
//! runs with JSON-lines traces, the problem registry and the consistency
//! checks.

pub mod config;
pub mod literal;
mod trace;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use bundle_newton::bundle::residual_norm;
use bundle_newton::diagnostics::run_all;
use bundle_newton::problems::{self, build};
use bundle_newton::solver::{damped_newton, integrate_differential_newton_path, local_newton};
use bundle_newton::{ConnectionMap, NewtonProblem, Point, SolveStatus};
use clap::{Parser, Subcommand};

pub use config::{RunArgs, RunConfig, SolverChoice, OUTPUT_DIR_ENV};
pub use trace::{RecordLine, SummaryLine};

pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NEWTON_FAILED: i32 = 2;
pub const EXIT_SINGULAR: i32 = 3;
pub const EXIT_MAX_ITERATIONS: i32 = 4;
pub const EXIT_CHECK_FAILED: i32 = 5;

/// An error that ends the program with `code`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: String) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "bundle-newton",
    version,
    about = "Newton's method for sections of vector bundles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a solver and write its trace as JSON lines
    Solve(RunArgs),
    /// List registered problems whose name contains FILTER
    List { filter: Option<String> },
    /// Run the consistency and tangency checks at the start point
    Check(RunArgs),
}

pub fn status_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Converged => EXIT_CONVERGED,
        SolveStatus::NewtonFailed => EXIT_NEWTON_FAILED,
        SolveStatus::SingularOperator => EXIT_SINGULAR,
        SolveStatus::MaxIterations => EXIT_MAX_ITERATIONS,
    }
}

/// Runs the parsed command, writing human-readable text to `out`/`err`.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Solve(args) => solve(args, out, err),
        Command::List { filter } => list(filter.as_deref().unwrap_or(""), out),
        Command::Check(args) => check(args, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

fn io_error(e: io::Error) -> CliError {
    CliError::config(format!("cannot write output: {e}"))
}

fn list(filter: &str, out: &mut dyn Write) -> Result<i32, CliError> {
    for info in problems::list(filter) {
        writeln!(out, "{}\t{}\t{}", info.name, info.kind, info.parameters).map_err(io_error)?;
    }
    Ok(EXIT_CONVERGED)
}

struct Setup {
    problem: Box<dyn NewtonProblem>,
    connection: ConnectionMap,
    start: Point,
}

fn setup(cfg: &RunConfig) -> Result<Setup, CliError> {
    let problem = build(&cfg.problem, &cfg.params).map_err(|e| CliError::config(e.to_string()))?;
    let connection = match cfg.connection {
        None => problem.default_connection(),
        Some(kind) if kind.supports(problem.kind()) => ConnectionMap::new(kind),
        Some(kind) => ConnectionMap::forced(kind),
    };
    let start = literal::parse_start(&cfg.start, problem.as_ref(), cfg.seed)?;
    Ok(Setup {
        problem,
        connection,
        start,
    })
}

fn check(args: &RunArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = RunConfig::resolve(args)?;
    let s = setup(&cfg)?;
    let reports = run_all(s.problem.as_ref(), &s.connection, &s.start);
    let mut passed = true;
    for r in &reports {
        writeln!(out, "{}", r.line()).map_err(io_error)?;
        passed &= r.passed;
    }
    Ok(if passed {
        EXIT_CONVERGED
    } else {
        EXIT_CHECK_FAILED
    })
}

fn solve(args: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = RunConfig::resolve(args)?;
    let s = setup(&cfg)?;
    let pb = s.problem.as_ref();
    let run_error = |e: bundle_newton::Error| CliError::config(e.to_string());
    let (records, status, final_point, iterations) = match cfg.solver {
        SolverChoice::Local => {
            let o = local_newton(
                pb,
                &s.connection,
                &s.start,
                cfg.solver_config.tol,
                cfg.solver_config.max_outer,
            )
            .map_err(run_error)?;
            (
                trace::records(&o.trace),
                o.status,
                o.final_point,
                o.iterations,
            )
        }
        SolverChoice::Damped => {
            let o = damped_newton(pb, &s.connection, &s.start, &cfg.solver_config)
                .map_err(run_error)?;
            (
                trace::records(&o.trace),
                o.status,
                o.final_point,
                o.iterations,
            )
        }
        SolverChoice::Diffpath => {
            match integrate_differential_newton_path(pb, &s.connection, &s.start, cfg.steps) {
                Ok(points) => {
                    let records = trace::path_records(pb, &points).map_err(run_error)?;
                    let end = points.last().cloned().unwrap_or_else(|| s.start.clone());
                    let residual = residual_norm(pb, &end).map_err(run_error)?;
                    let status = if residual <= cfg.path_tol {
                        SolveStatus::Converged
                    } else {
                        SolveStatus::MaxIterations
                    };
                    (records, status, end, cfg.steps)
                }
                Err(bundle_newton::Error::SingularNewtonOperator { .. }) => (
                    Vec::new(),
                    SolveStatus::SingularOperator,
                    s.start.clone(),
                    0,
                ),
                Err(e) => return Err(run_error(e)),
            }
        }
    };
    let summary = SummaryLine {
        status: status.as_str().to_string(),
        iterations,
        final_residual: residual_norm(pb, &final_point).map_err(run_error)?,
        final_point: final_point.coords().as_slice().to_vec(),
    };
    let text = trace::render(&records, &summary);

    match output_path(&cfg) {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(io_error)?;
            }
            fs::write(&path, text).map_err(io_error)?;
        }
        None => out.write_all(text.as_bytes()).map_err(io_error)?,
    }
    let _ = writeln!(
        err,
        "{}: {} after {} iterations, residual {:.3e}",
        cfg.problem, summary.status, summary.iterations, summary.final_residual
    );
    Ok(status_code(status))
}

fn output_path(cfg: &RunConfig) -> Option<PathBuf> {
    match &cfg.output {
        Some(p) if p.as_os_str() == "-" => None,
        Some(p) => Some(p.clone()),
        None => std::env::var_os(OUTPUT_DIR_ENV).map(|dir| {
            let solver = match cfg.solver {
                SolverChoice::Local => "local",
                SolverChoice::Damped => "damped",
                SolverChoice::Diffpath => "diffpath",
            };
            PathBuf::from(dir).join(format!("{}-{solver}.jsonl", cfg.problem))
        }),
    }
}

/// Parses `args` and runs the command; clap usage errors map to exit 1.
pub fn run_from<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli, out, err),
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_CONFIG
            } else {
                EXIT_CONVERGED
            };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            code
        }
    }
}
