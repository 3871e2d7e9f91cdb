// SPDX-License-Identifier: Apache-2.0
//! Command-line front end: `sdutm <solve|converge|bench|validate> [flags]`.
//!
//! Exit status 0 on success, 1 on numerical failure, 2 on configuration errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use sdutm::harness::{cmd_bench, cmd_converge, cmd_solve, cmd_validate, ProblemRef, Report, RunConfig, SolverKind};
use sdutm::Error;

#[derive(Parser)]
#[command(name = "sdutm", version, about = "Semi-discrete transform solvers and comparison harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solution values at the requested final times.
    Solve(Flags),
    /// Error against the exact solution over an h sweep.
    Converge(Flags),
    /// Wall-clock cost of reaching a target accuracy.
    Bench(Flags),
    /// Check the stencil/boundary pairing.
    Validate(Flags),
}

#[derive(clap::Args)]
struct Flags {
    #[arg(long)]
    config: Option<String>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
}

fn load(flags: &Flags) -> Result<RunConfig, Error> {
    let mut config = match (&flags.config, &flags.problem) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidArgument(format!("cannot read config {path}: {e}")))?;
            RunConfig::from_json(&text)?
        }
        (None, Some(name)) => RunConfig::named(name),
        (None, None) => return Err(Error::InvalidArgument("give --config or --problem".into())),
    };
    if let (Some(_), Some(name)) = (&flags.config, &flags.problem) {
        config.problem = ProblemRef::Named(name.to_string());
    }
    if let Some(s) = &flags.solver {
        config.solver = Some(SolverKind::parse(s)?);
        config.solvers.clear();
    }
    if let Some(out) = &flags.out {
        config.out = Some(PathBuf::from(out));
    }
    if let Some(tol) = flags.tol {
        config.tol = Some(tol);
    }
    Ok(config)
}

fn summary_path(config: &RunConfig) -> Option<PathBuf> {
    config.summary.clone().or_else(|| config.out.as_ref().map(|p| p.with_extension("json")))
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))
}

fn emit(config: &RunConfig, report: &Report) -> Result<(), Error> {
    let summary = serde_json::to_string_pretty(&report.summary).expect("summary serializes");
    match &config.out {
        Some(path) => {
            write(path, &report.csv)?;
            if let Some(sp) = summary_path(config) {
                write(&sp, &summary)?;
            }
            println!("{summary}");
        }
        None => {
            print!("{}", report.csv);
            eprintln!("{summary}");
        }
    }
    Ok(())
}

type Handler = fn(&RunConfig) -> Result<Report, Error>;

fn run(command: Command) -> Result<bool, Error> {
    let (flags, f): (Flags, Handler) = match command {
        Command::Solve(fl) => (fl, cmd_solve),
        Command::Converge(fl) => (fl, cmd_converge),
        Command::Bench(fl) => (fl, cmd_bench),
        Command::Validate(fl) => (fl, cmd_validate),
    };
    let config = load(&flags)?;
    let report = f(&config)?;
    emit(&config, &report)?;
    Ok(report.summary.get("accepted").and_then(|v| v.as_bool()).unwrap_or(true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            let body = json!({
                "error": {
                    "code": e.code(),
                    "reason": e.reason(),
                    "message": e.to_string(),
                }
            });
            println!("{body}");
            ExitCode::from(if e.is_config_error() { 2 } else { 1 })
        }
    }
}
