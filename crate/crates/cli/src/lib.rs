//! Command-line front end: worked-example reproductions, certification of user-supplied
//! approximations, and majorant minimization, all writing deterministic
//! reports.
//!
//! Exit codes: 0 success, 2 invalid arguments or configuration, 3 evaluation
//! or output failure, 4 missing constant.

pub mod config;
pub mod registry;
pub mod report;
pub mod run;

use thiserror::Error;

pub use config::CaseConfig;
pub use report::{ReportFile, Row};
pub use run::{run_certify, run_minimize, run_reproduce, Outcome, ReproduceArgs};

/// Environment variable holding the worker count; affects speed only.
pub const WORKERS_ENV: &str = "THINOBST_WORKERS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] thinobst_core::Error),
    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use thinobst_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Core(E::IncompleteConstants(_)) => 4,
            CliError::Core(E::InvalidParameter(_) | E::UnsupportedRepresentation(_)) => 2,
            CliError::Core(_) | CliError::Output(_) => 3,
        }
    }
}

/// Reads the worker count from [`WORKERS_ENV`]; `None` when unset.
pub fn workers_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got `{s}`"))),
        },
    }
}
