use std::path::PathBuf;

use thiserror::Error;

/// Harness-level errors, mapped onto process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration, bad data, or a violated plan hypothesis. Exit 2.
    #[error("{0}")]
    Validation(String),

    /// A self-test mode ran to completion and a check failed. Exit 3.
    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io { .. } => 2,
            CliError::CheckFailed(_) => 3,
        }
    }
}

impl From<umom_core::Error> for CliError {
    fn from(e: umom_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
