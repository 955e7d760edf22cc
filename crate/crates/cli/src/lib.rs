//! `rfcs`: generate instances, solve them, train the policy and run
//! benchmark sweeps from the command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O error, 3
//! infeasible/refused, 4 internal invariant breach.

mod bench;
mod gen;
mod methods;
mod solve;
mod train_cmd;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use std::ffi::OsString;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Infeasible(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Infeasible(m) | CliError::Internal(m) => m,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) fn io_err(context: &str, err: std::io::Error) -> CliError {
    CliError::Io(format!("{context}: {err}"))
}

/// `--seed` falls back to the RFCS_SEED environment variable, then 0.
pub(crate) fn resolve_seed(flag: Option<u64>) -> CliResult<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("RFCS_SEED") {
        Ok(text) => text
            .parse()
            .map_err(|_| CliError::Usage(format!("RFCS_SEED must be an integer, got `{text}`"))),
        Err(_) => Ok(0),
    }
}

#[derive(Parser)]
#[command(
    name = "rfcs",
    version,
    about = "Route-first/cluster-second solvers for sixteen CVRP variants"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate seeded instance files plus a manifest
    Gen(gen::GenArgs),
    /// Solve one instance file with a chosen method
    Solve(solve::SolveArgs),
    /// Train the route-first policy and write parameters and a curve
    Train(train_cmd::TrainArgs),
    /// Run a method matrix over a variant matrix and aggregate
    Bench(bench::BenchArgs),
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Gen(args) => gen::run(args),
        Command::Solve(args) => solve::run(args),
        Command::Train(args) => train_cmd::run(args),
        Command::Bench(args) => bench::run(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.exit_code()
        }
    }
}
