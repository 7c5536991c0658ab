//! Implementation of the `ssd` experiment CLI.
//!
//! Subcommands:
//! * `run <config.json>` — execute a solver grid of seeded replicates and
//!   aggregate percentile bands;
//! * `theory <params.json>` — emit closed-form bound curves and the
//!   embedding-probability grid;
//! * `profile <dir>` — Dolan-More performance profiles over finished runs;
//! * `validate-sampler` — Monte-Carlo spot checks of a direction sampler.
//!
//! Exit codes: 0 success, 2 input error, 3 configuration mismatch.

pub mod config;
pub mod experiment;
pub mod profile;
pub mod theory;
pub mod validate;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or unparsable input (exit 2).
    #[error("{0}")]
    Input(String),
    /// Internally inconsistent configuration (exit 3).
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Mismatch(_) => 3,
        }
    }

    pub fn input(err: impl std::fmt::Display) -> Self {
        CliError::Input(err.to_string())
    }

    pub fn mismatch(err: impl std::fmt::Display) -> Self {
        CliError::Mismatch(err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(format!("i/o error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(format!("json error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(format!("csv error: {e}"))
    }
}

impl From<ssd_core::SsdError> for CliError {
    fn from(e: ssd_core::SsdError) -> Self {
        match e {
            ssd_core::SsdError::InvalidConfig(msg) => CliError::Mismatch(msg),
            other => CliError::Input(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Worker-pool size from `SSD_THREADS`; `None` means machine parallelism.
pub fn thread_cap() -> CliResult<Option<usize>> {
    match std::env::var("SSD_THREADS") {
        Err(_) => Ok(None),
        Ok(raw) => {
            let n: usize = raw
                .trim()
                .parse()
                .map_err(|_| CliError::Input(format!("SSD_THREADS must be a positive integer, got `{raw}`")))?;
            if n == 0 {
                return Err(CliError::Input("SSD_THREADS must be at least 1".into()));
            }
            Ok(Some(n))
        }
    }
}
