use mhd_core::MhdError;
use mhd_verify::VerifyError;
use thiserror::Error;

use crate::config::{ConfigError, Violation};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solver(#[from] MhdError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("{} assertion(s) failed: {}", .0.len(), .0.join(", "))]
    Assertion(Vec<String>),
}

impl CliError {
    /// A single configuration violation.
    pub fn config(key: &str, message: impl Into<String>) -> Self {
        CliError::Config(ConfigError::Invalid(vec![Violation::new(key, message)]))
    }

    /// Process exit status for this failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Verify(VerifyError::Unknown { .. } | VerifyError::Parameter { .. }) => 2,
            CliError::Solver(_) | CliError::Verify(_) => 3,
            CliError::Assertion(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
