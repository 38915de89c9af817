use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field is not divergence free (max |xi . u_hat| = {residual:e}, allowed {allowed:e})")]
    NotDivergenceFree { residual: f64, allowed: f64 },

    #[error("field is not Hermitian symmetric (max defect {0:e})")]
    NotHermitian(f64),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invalid time: {0}")]
    InvalidTime(String),

    #[error("parameter outside the admissible domain: {0}")]
    Domain(String),

    #[error("field is identically zero: {0}")]
    ZeroField(String),

    #[error("frequency support violated: {0}")]
    Support(String),

    #[error("lattice resolution insufficient: {0}")]
    Resolution(String),

    #[error("profile not representable on the grid: {0}")]
    Representability(String),

    #[error("numerical divergence: {0}")]
    Divergence(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
