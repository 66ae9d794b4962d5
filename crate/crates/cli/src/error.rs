use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Data(String),

    #[error("gradient check failed: max relative error {max_error:e} exceeds {tolerance:e}")]
    GradcheckFailed { max_error: f64, tolerance: f64 },

    #[error(transparent)]
    Core(#[from] gva_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for usage errors, 2 for data and I/O errors, 3 for failed gradient checks.
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => 1,
            CliError::Core(gva_core::Error::InvalidConfig(_)) => 1,
            CliError::GradcheckFailed { .. } => 3,
            _ => 2,
        })
    }
}

pub type CliResult<T> = Result<T, CliError>;
