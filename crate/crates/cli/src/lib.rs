//! Command-line surface: config ingestion, one subcommand per capability,
//! CSV emission with embedded run manifests, deterministic seeding.
//!
//! Exit codes are part of the contract: `0` success, `2` configuration or
//! usage error, `3` numerical failure, `4` resource budget breach (`1` is
//! reserved for I/O failures outside those classes).

pub mod commands;
pub mod manifest;
pub mod output;
pub mod schema;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config:\n{}", .0.join("\n"))]
    InvalidConfig(Vec<String>),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("resource budget breached: {0}")]
    Budget(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse(_) | CliError::InvalidConfig(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Budget(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<frog_core::Error> for CliError {
    fn from(e: frog_core::Error) -> Self {
        use frog_core::Error as E;
        match e {
            E::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            E::InvalidDistribution(_) | E::InvalidSubsequence(_) => CliError::Usage(e.to_string()),
            E::ToleranceRange { .. } | E::QuadratureStalled(_) | E::NonFiniteTerm { .. }
            | E::PgfDomain { .. } => CliError::Numerical(e.to_string()),
        }
    }
}
