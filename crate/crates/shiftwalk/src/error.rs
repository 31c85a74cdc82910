//! Errors of the experiment runner and their process exit codes.

use shiftwalk_core::Error as CoreError;

/// Failure of a run, classified for the exit status.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// The configuration does not parse or names invalid parameters.
    #[error("configuration error: {0}")]
    Config(String),
    /// The map lacks a property the experiment needs.
    #[error("validation failed: {0}")]
    Validation(String),
    /// A numerical procedure failed.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// Reading or writing artifacts failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    /// Exit status: 2 for configuration, 3 for validation, 4 for numeric and 1 for i/o failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Validation(_) => 3,
            RunError::Numeric(_) => 4,
            RunError::Io(_) => 1,
        }
    }
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { .. } => RunError::Config(e.to_string()),
            CoreError::Cover(_) | CoreError::Condition(_) => RunError::Validation(e.to_string()),
            _ => RunError::Numeric(e.to_string()),
        }
    }
}

impl From<csv::Error> for RunError {
    fn from(e: csv::Error) -> Self {
        RunError::Io(std::io::Error::other(e))
    }
}

impl From<serde_json::Error> for RunError {
    fn from(e: serde_json::Error) -> Self {
        RunError::Io(std::io::Error::other(e))
    }
}

/// Result of a run.
pub type RunResult<T> = std::result::Result<T, RunError>;
