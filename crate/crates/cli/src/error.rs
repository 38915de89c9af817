use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in {path}: {message}")]
    Config { path: String, message: String },
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error("numerical divergence: {0}")]
    Divergence(String),
    #[error(transparent)]
    Core(#[from] mildns::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> CliError {
        CliError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code: 1 assertion failure, 2 configuration error,
    /// 3 numerical divergence. Other failures report as configuration errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Assertion(_) => 1,
            CliError::Divergence(_) => 3,
            CliError::Core(mildns::Error::Divergence(_)) | CliError::Core(mildns::Error::NonFinite(_)) => 3,
            _ => 2,
        }
    }
}
