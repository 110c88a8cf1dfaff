use thiserror::Error;

/// Errors surfaced by the solver and diagnostics layers.
#[derive(Debug, Error)]
pub enum RswError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-positive height: min h = {min:.6e}")]
    NonPositiveHeight { min: f64 },
    #[error("non-positive lambda: min lambda = {min:.6e}")]
    NonPositiveLambda { min: f64 },
    #[error("non-finite sample at t = {t:.6e}")]
    NonFinite { t: f64 },
    #[error("fixed-point map not contracting (last ratio {ratio:.3}); window too large")]
    NotContracting { ratio: f64 },
    #[error("too few samples: need at least {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, RswError>;
