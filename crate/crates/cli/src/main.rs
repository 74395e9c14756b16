use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Map;

mod commands;
mod config;

use commands::{BlocksArgs, CheckArgs, FitArgs, ParaproductArgs, RemainderArgs, SynthArgs};

/// Littlewood-Paley blocks, paraproducts and Taylor remainders on the torus.
///
/// Exit status: 0 pass, 1 usage error, 2 violated assumption or numeric
/// precondition, 3 result outside tolerance.
#[derive(Parser, Debug)]
#[command(name = "paratorus", version)]
struct Cli {
    /// JSON object whose keys mirror the long flags of the subcommand;
    /// flags given on the command line take precedence. A report written by
    /// `remainder` or `check` can be passed as is.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Size of the worker pool. Output does not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize a field of prescribed regularity and write it as PFLD.
    Synth(SynthArgs),
    /// Block sup-norms of a field as CSV, with the fitted decay slope.
    Blocks(BlocksArgs),
    /// Paraproduct, resonant product or plain product of two fields.
    Paraproduct(ParaproductArgs),
    /// Sample a remainder over scale bins and fit its exponent.
    Remainder(RemainderArgs),
    /// Run an identity check or a decay suite.
    Check(CheckArgs),
    /// Fit a remainder-sample or decay CSV.
    Fit(FitArgs),
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numeric(String),
    Tolerance(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numeric(_) => 2,
            Failure::Tolerance(_) => 3,
        }
    }
}

impl From<paratorus::Error> for Failure {
    fn from(e: paratorus::Error) -> Self {
        if e.is_numeric_precondition() {
            Failure::Numeric(format!("assumption violated: {e}"))
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Usage(format!("csv: {e}"))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(path) => config::load(path)?,
        None => Map::new(),
    };
    let jobs = cli.jobs.or(config::jobs(&file)?);
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Synth(a) => commands::synth(config::merge(&a, &file)?),
        Command::Blocks(a) => commands::blocks(config::merge(&a, &file)?),
        Command::Paraproduct(a) => commands::paraproduct(config::merge(&a, &file)?),
        Command::Remainder(a) => commands::remainder(config::merge(&a, &file)?),
        Command::Check(a) => commands::check(config::merge(&a, &file)?),
        Command::Fit(a) => commands::fit(config::merge(&a, &file)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) | Failure::Numeric(m) | Failure::Tolerance(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
