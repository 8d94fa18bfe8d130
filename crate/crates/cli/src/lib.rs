//! Command-line front end for `shellstat-core`.
//!
//! Subcommands: `analyze`, `sweep`, `scaling`, `walk`, `verify-paper`. The
//! binary in `main.rs` only parses arguments, builds a [`config::RunConfig`]
//! and dispatches to [`commands`] / [`verify`].

pub mod commands;
pub mod config;
pub mod format;
pub mod report;
pub mod verify;

use shellstat_core::ShellError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const INFEASIBLE_ENERGY: i32 = 3;
    pub const SAMPLER: i32 = 4;
    pub const VERIFICATION: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("infeasible energy: {0}")]
    InfeasibleEnergy(String),
    #[error("sampler failure: {0}")]
    Sampler(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("verification failed")]
    Verification,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::InfeasibleEnergy(_) => exit::INFEASIBLE_ENERGY,
            CliError::Sampler(_) => exit::SAMPLER,
            CliError::Io(_) => exit::IO,
            CliError::Verification => exit::VERIFICATION,
        }
    }
}

impl From<ShellError> for CliError {
    fn from(e: ShellError) -> Self {
        let msg = e.to_string();
        match e {
            ShellError::InfeasibleEnergy { .. }
            | ShellError::NoFiniteBeta { .. }
            | ShellError::DegenerateShell(_) => CliError::InfeasibleEnergy(msg),
            ShellError::Sampler(_) | ShellError::FitNotConverged { .. } => CliError::Sampler(msg),
            _ => CliError::Config(msg),
        }
    }
}
