//! Command-line front end: `solve`, `certify`, `compare` and `sweep` over a
//! TOML run configuration.
//!
//! Every subcommand writes `report.json` and `table.csv` into `--out`.
//!
//! | exit | meaning |
//! |------|---------|
//! | 0 | ok |
//! | 1 | certificate failed |
//! | 2 | iteration hit `max_iterations` |
//! | 3 | iteration diverged |
//! | 4 | singular operator |
//! | 64 | configuration error |

pub mod config;
pub mod expr;
pub mod report;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::baselines::{newton_solve, picard_solve};
use crate::certify::{certify, parallel_map};
use crate::error::Error;
use crate::iterate::{empirical_contraction, run_iteration, IterationReport, Method, Termination};
use config::RunConfig;
use report::{CompareEntry, SweepRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CERTIFICATE_FAILED: i32 = 1;
pub const EXIT_MAX_ITER: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_SINGULAR: i32 = 4;
pub const EXIT_CONFIG: i32 = 64;

/// A failure carrying the process exit code it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }

    /// Output files that cannot be written are reported as configuration errors.
    pub fn io(e: impl fmt::Display) -> Self {
        Self::config(format!("output: {e}"))
    }

    fn from_library(e: Error) -> Self {
        let code = if e.is_singular() { EXIT_SINGULAR } else { EXIT_CONFIG };
        Self { code, message: e.to_string() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Parser)]
#[command(name = "globlin", version, about = "Global-linearization solver for nonlinear operator equations A(u) = f")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the global iteration and write its convergence table.
    Solve(Common),
    /// Estimate the contraction and invertibility constants.
    Certify(Common),
    /// Run global, Newton and Picard iterations from the same start.
    Compare(Common),
    /// Repeat `solve` over a grid of parameter values.
    Sweep(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for report.json and table.csv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the certificate sampling seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress the summary on stdout.
    #[arg(long)]
    quiet: bool,
}

/// Parses `args` (including the program name) and runs the subcommand,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (common, result) = match &cli.command {
        Command::Solve(c) => (c, cmd_solve(c)),
        Command::Certify(c) => (c, cmd_certify(c)),
        Command::Compare(c) => (c, cmd_compare(c)),
        Command::Sweep(c) => (c, cmd_sweep(c)),
    };
    match result {
        Ok((code, summary)) => {
            if !common.quiet {
                println!("{summary}");
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

type Outcome = Result<(i32, String), CliError>;

pub fn termination_code(t: Termination) -> i32 {
    match t {
        Termination::ConvergedStep | Termination::ConvergedResidual => EXIT_OK,
        Termination::MaxIter => EXIT_MAX_ITER,
        Termination::Diverged => EXIT_DIVERGED,
        Termination::SingularL => EXIT_SINGULAR,
    }
}

fn load(path: &Path) -> Result<RunConfig, CliError> {
    RunConfig::from_path(path).map_err(|e| CliError { code: e.code, message: format!("{}: {}", path.display(), e.message) })
}

fn describe(report: &IterationReport) -> String {
    format!(
        "{}: {} after {} iterations, residual {:.3e}",
        report.method.name(),
        report.termination.name(),
        report.iterations,
        report.final_residual()
    )
}

fn cmd_solve(args: &Common) -> Outcome {
    let config = load(&args.config)?;
    let inst = config.build()?;
    let report = run_iteration(inst.problem.as_ref(), &inst.f, &inst.u0, &config.iteration_options())
        .map_err(CliError::from_library)?;
    report::write_outputs(&args.out, &report, &report::convergence_table(&report)?)?;
    Ok((termination_code(report.termination), describe(&report)))
}

fn cmd_certify(args: &Common) -> Outcome {
    let config = load(&args.config)?;
    let inst = config.build()?;
    let opts = config.certify_options(&inst, args.seed)?;
    let cert = certify(inst.problem.as_ref(), &inst.f, &inst.u0, &opts).map_err(CliError::from_library)?;
    report::write_outputs(&args.out, &cert, &report::certificate_table(&cert)?)?;
    let code = if cert.all_verified() { EXIT_OK } else { EXIT_CERTIFICATE_FAILED };
    let summary = format!(
        "p = {:.4e}, s = {:.4e}, q = {:.4e}, Q = {:.4e}; invertibility {}, contraction {}",
        cert.p,
        cert.s,
        cert.q,
        cert.contraction_q,
        if cert.invertibility_verified { "holds" } else { "fails" },
        if cert.contraction_verified { "holds" } else { "fails" },
    );
    Ok((code, summary))
}

fn cmd_compare(args: &Common) -> Outcome {
    let config = load(&args.config)?;
    let methods = config.compare.as_ref().map_or_else(|| vec![Method::Global, Method::Newton, Method::Picard], |c| c.methods.clone());
    let inst = config.build()?;
    let opts = config.iteration_options();
    let (problem, f, u0) = (inst.problem.as_ref(), &inst.f, &inst.u0);

    let mut entries = Vec::with_capacity(methods.len());
    for method in methods {
        let start = Instant::now();
        let result = match method {
            Method::Global => run_iteration(problem, f, u0, &opts),
            Method::Newton => newton_solve(problem, f, u0, &opts),
            Method::Picard => picard_solve(problem, f, u0, &opts),
        };
        let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        let entry = match result {
            Ok(report) => CompareEntry { method, wall_time_ms, report: Some(report), error: None },
            Err(Error::Unsupported(msg)) => CompareEntry { method, wall_time_ms, report: None, error: Some(msg) },
            Err(e) => return Err(CliError::from_library(e)),
        };
        entries.push(entry);
    }
    report::write_outputs(&args.out, &entries, &report::compare_table(&entries)?)?;

    let code = entries
        .iter()
        .filter_map(|e| e.report.as_ref())
        .map(|r| termination_code(r.termination))
        .find(|&c| c != EXIT_OK)
        .unwrap_or(EXIT_OK);
    let summary = entries
        .iter()
        .map(|e| match &e.report {
            Some(r) => describe(r),
            None => format!("{}: unsupported", e.method.name()),
        })
        .collect::<Vec<_>>()
        .join("\n");
    Ok((code, summary))
}

fn sweep_row(config: &RunConfig, sweep: &config::SweepConfig, value: f64, seed: Option<u64>) -> SweepRow {
    let mut row = SweepRow {
        parameter: sweep.parameter.name().to_string(),
        value,
        converged: false,
        iterations: None,
        q_hat: None,
        certified_q: None,
        report: None,
        error: None,
    };
    let config = config.with_parameter(sweep.parameter, value);
    let inst = match config.build() {
        Ok(inst) => inst,
        Err(e) => {
            row.error = Some(e.message);
            return row;
        }
    };
    let problem = inst.problem.as_ref();
    match run_iteration(problem, &inst.f, &inst.u0, &config.iteration_options()) {
        Ok(report) => {
            row.converged = report.converged();
            row.iterations = Some(report.iterations);
            row.q_hat = empirical_contraction(&report).ok();
            row.report = Some(report);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    if config.certify.is_some() {
        match config.certify_options(&inst, seed).map_err(|e| e.message).and_then(|opts| {
            certify(problem, &inst.f, &inst.u0, &opts).map_err(|e| e.to_string())
        }) {
            Ok(cert) => row.certified_q = Some(cert.contraction_q),
            Err(e) => {
                let note = format!("certify: {e}");
                row.error = Some(row.error.map_or(note.clone(), |prev| format!("{prev}; {note}")));
            }
        }
    }
    row
}

fn cmd_sweep(args: &Common) -> Outcome {
    let config = load(&args.config)?;
    let sweep = config.sweep.clone().ok_or_else(|| CliError::config("sweep: section is required"))?;
    let mut values = sweep.values.clone();
    values.sort_by(f64::total_cmp);

    let rows = parallel_map(values.len(), |i| sweep_row(&config, &sweep, values[i], args.seed));
    report::write_outputs(&args.out, &rows, &report::sweep_table(&rows)?)?;

    let converged = rows.iter().filter(|r| r.converged).count();
    Ok((EXIT_OK, format!("{} of {} sweep values converged", converged, rows.len())))
}
