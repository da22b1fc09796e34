//! `nrgeom`: batch verification of exact solutions, Proca-type reductions and
//! autoparallel runs.
//!
//! Exit codes: 0 when every residual passes, 1 when a verification fails,
//! 2 on input, parse or domain errors.

mod commands;
mod docs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "nrgeom", version, about = "Residual checks for non-Riemannian geometries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Relative residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Number of sample points.
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// Seed for every random draw.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; JSON for reports and CSV for tables by default.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Verify a catalog solution document.
    Verify {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Check the Proca cancellation for a model document on a random background.
    Cancellation {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Dump the Cartan solution of a model document at a sample point.
    CartanSolve {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Integrate an autoparallel from a trace document.
    Trace {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Residuals of a solution over a grid of values of one constant.
    Sweep {
        path: PathBuf,
        /// Constant to vary.
        #[arg(long)]
        constant: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify { path, common } => commands::verify(&path, &common),
        Command::Cancellation { path, common } => commands::cancellation(&path, &common),
        Command::CartanSolve { path, common } => commands::cartan_solve(&path, &common),
        Command::Trace { path, common } => commands::trace(&path, &common),
        Command::Sweep { path, constant, values, common } => commands::sweep(&path, &constant, &values, &common),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
