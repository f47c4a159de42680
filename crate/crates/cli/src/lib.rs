//! Command implementations behind the `goodwin-net` binary.

pub mod commands;
pub mod config;
pub mod output;
pub mod report;
pub mod tables;

use thiserror::Error;

/// Failures mapped onto the process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, malformed or invalid input (exit 2).
    #[error("config error: {0}")]
    Config(String),
    /// A run or solver failed on valid input (exit 3).
    #[error("numerical error: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
        }
    }
}

impl From<goodwin_core::Error> for CliError {
    fn from(e: goodwin_core::Error) -> Self {
        use goodwin_core::Error as E;
        match e {
            E::InvalidParameter { .. }
            | E::InvalidTopology(_)
            | E::DimensionMismatch { .. }
            | E::Domain(_)
            | E::InvalidConfig(_) => Self::Config(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Config(format!("output: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Config(format!("output: {e}"))
    }
}
