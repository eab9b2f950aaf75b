//! Command-line front end: experiment configs, CSV output and the
//! subcommands of the `normal-shrink` binary.

pub mod commands;
pub mod config;
pub mod table;

use crate::error::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const DOMAIN: i32 = 3;
    pub const INVARIANT: i32 = 4;
}

/// Failure of a subcommand, carrying the exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Domain(#[from] Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io(_) => exit::CONFIG,
            HarnessError::Domain(_) => exit::DOMAIN,
        }
    }
}
