//! Command line front end for the graded operator engine.
//!
//! The library half exists so the integration tests can drive parsing and
//! dispatch without spawning processes; `main.rs` is a thin shell around
//! [`run`]. Exit codes are a stable contract: 0 when every check passes,
//! 1 when a mathematical check fails (the report carries a witness), and
//! 2 for any input problem, be it a parse error, a dimension mismatch, or
//! a degenerate metric.

pub mod commands;
pub mod error;
pub mod expr;
pub mod model;
pub mod report;

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::CliError;
use crate::model::ModelFile;
use crate::report::Report;

#[derive(Parser, Debug)]
#[command(
    name = "dgo",
    about = "exact checks and invariants for Courant algebroids and their Dirac generating operators",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write the machine readable key=value report to this path.
    #[arg(long, global = true, value_name = "path")]
    pub machine_output: Option<PathBuf>,

    /// Seed for the randomized identity checks (overrides DGO_SEED).
    #[arg(long, global = true, value_name = "u64")]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the structure axioms and the master equation.
    Check { model_file: PathBuf },
    /// Print the generating cubic of a Courant model.
    Theta { model_file: PathBuf },
    /// Build the Dirac generating operator both ways and compare.
    Dirac { model_file: PathBuf },
    /// Compute the scalar invariant and cross check it against the
    /// squared generating operator.
    Invariant { model_file: PathBuf },
    /// Expand the star product of two graded function expressions.
    Star {
        model_file: PathBuf,
        /// First factor, e.g. "x1*xi1 + p2".
        f: String,
        /// Second factor.
        g: String,
        /// Only report components b0..bK up to this degree.
        #[arg(long, value_name = "k")]
        max_degree: Option<u32>,
    },
    /// Print the principal symbol of an operator expression.
    Symbol {
        model_file: PathBuf,
        /// Operator in the c/d calculus, e.g. "c1*d1 + x2*d2^2".
        expr: String,
    },
    /// Verify a dual pair of Lie algebroids three equivalent ways.
    BialgCheck { model_file: PathBuf },
    /// Compute the invariant of a Lie bialgebroid through both paths.
    BialgInvariant { model_file: PathBuf },
}

impl Command {
    fn model_path(&self) -> &PathBuf {
        match self {
            Command::Check { model_file }
            | Command::Theta { model_file }
            | Command::Dirac { model_file }
            | Command::Invariant { model_file }
            | Command::Star { model_file, .. }
            | Command::Symbol { model_file, .. }
            | Command::BialgCheck { model_file }
            | Command::BialgInvariant { model_file } => model_file,
        }
    }
}

/// Flag beats environment beats the default of 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("DGO_SEED") {
        Ok(text) => text.trim().parse().map_err(|_| {
            CliError::Usage(format!("DGO_SEED must be an unsigned integer, got '{text}'"))
        }),
        Err(_) => Ok(0),
    }
}

fn load(path: &PathBuf) -> Result<ModelFile, CliError> {
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|error| CliError::Io {
        path: display.clone(),
        message: error.to_string(),
    })?;
    model::parse_model(&text).map_err(|error| CliError::Model {
        path: display,
        error,
    })
}

/// Parse, dispatch, and produce the report. Errors here mean exit code 2.
pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let seed = resolve_seed(cli.seed)?;
    let path = cli.command.model_path();
    let label = path.display().to_string();
    let file = load(path)?;
    match &cli.command {
        Command::Check { .. } => commands::check(&file, &label, seed),
        Command::Theta { .. } => commands::theta(&file, &label),
        Command::Dirac { .. } => commands::dirac(&file, &label),
        Command::Invariant { .. } => commands::invariant(&file, &label),
        Command::Star { f, g, max_degree, .. } => {
            commands::star(&file, &label, f, g, *max_degree)
        }
        Command::Symbol { expr, .. } => commands::symbol(&file, &label, expr),
        Command::BialgCheck { .. } => commands::bialg_check(&file, &label, seed),
        Command::BialgInvariant { .. } => commands::bialg_invariant_cmd(&file, &label),
    }
}

/// The process entry point behind `main`, returning the exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(report) => {
            print!("{}", report.human_text());
            if let Some(path) = &cli.machine_output {
                if let Err(error) = fs::write(path, report.machine_text()) {
                    eprintln!("input error (io): {}: {}", path.display(), error);
                    return 2;
                }
            }
            report.exit_code()
        }
        Err(error) => {
            eprintln!("{error}");
            2
        }
    }
}
