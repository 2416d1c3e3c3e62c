//! Command-line driver for the `flipflop` learners.
//!
//! Four subcommands: `gen` writes a synthetic loss stream, `run` runs one
//! learner and reports its trace and bounds, `sweep` evaluates fixed-rate
//! Hedge over a grid of rates, and `check` verifies bounds, affine
//! invariance, or the inequalities recorded in an existing trace file.
//!
//! Exit codes: 0 success, 1 usage error, 2 bad input data, 3 a bound or
//! invariance violation.

pub mod args;
pub mod commands;
pub mod tracefile;

use thiserror::Error;

pub use args::{Algo, Cli, Command};
pub use commands::execute;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Input(#[from] flipflop::Error),
    #[error("{} violation(s):\n{}", .0.len(), .0.join("\n"))]
    Violation(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Violation(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.into())
    }
}
