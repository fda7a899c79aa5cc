//! `multimatrix`: densities, sampling, fitting and self-checks of
//! multimatrix variate distributions from the command line.
//!
//! Exit codes: 0 success, 1 a check failed, 2 invalid input, 3 input outside
//! the support of the model.

mod commands;
mod dataset;
mod error;
mod params;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::check::CheckArgs;
use commands::fit::FitArgs;
use commands::logpdf::LogpdfArgs;
use commands::sample::SampleArgs;
use commands::transform::TransformCommand;
use commands::Outcome;
use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "multimatrix", version, about = "Multimatrix variate distributions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Log density of every replicate in a dataset.
    Logpdf(LogpdfArgs),
    /// Seeded draws written as a dataset.
    Sample(SampleArgs),
    /// Maximum likelihood fit of the beta type II model.
    Fit(FitArgs),
    /// Normalization, consistency and Monte Carlo self-checks.
    Check(CheckArgs),
    /// Matrix transforms and raw-data preparation.
    #[command(subcommand)]
    Transform(TransformCommand),
}

fn out_path(command: &Command) -> Option<&PathBuf> {
    match command {
        Command::Logpdf(a) => a.out.as_ref(),
        Command::Sample(a) => a.out.as_ref(),
        Command::Fit(a) => a.out.as_ref(),
        Command::Check(a) => a.out.as_ref(),
        Command::Transform(TransformCommand::Compress(a) | TransformCommand::Expand(a)) => a.out.as_ref(),
        Command::Transform(TransformCommand::Derive(a)) => a.out.as_ref(),
    }
}

fn run(command: &Command) -> CliResult<Outcome> {
    match command {
        Command::Logpdf(args) => commands::logpdf::run(args),
        Command::Sample(args) => commands::sample::run(args),
        Command::Fit(args) => commands::fit::run(args),
        Command::Check(args) => commands::check::run(args),
        Command::Transform(command) => commands::transform::run(command),
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json_line());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.kind().to_string();
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or(&message).trim_start_matches("error: ");
            return fail(&CliError::invalid(first));
        }
    };
    let outcome = run(&cli.command).and_then(|o| {
        report::emit(&o.text, out_path(&cli.command).map(PathBuf::as_path))?;
        Ok(o.exit_code)
    });
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => fail(&e),
    }
}
