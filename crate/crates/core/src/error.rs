use thiserror::Error;

/// Errors produced by the operator, solver and optimizer layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("drive ratios undefined: both drive strengths are zero")]
    UndefinedDriveRatio,

    #[error("asymmetric parameters: {0} (closed forms require kappa_a = kappa_b and delta_a = delta_b)")]
    Asymmetric(&'static str),

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("integration unstable: trace drift {drift:.3e} at t = {time:.4}; try a smaller dt")]
    Unstable { drift: f64, time: f64 },

    #[error("no root found: {0}")]
    NoRoot(String),

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
