use thiserror::Error;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("backward requires a scalar loss, got shape {0:?}")]
    NonScalarLoss(Vec<usize>),

    #[error("gradient check failed: max relative error {max_rel_err:.3e} exceeds tolerance {tol:.1e}")]
    GradCheckFailed { max_rel_err: f64, tol: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid tensor file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, TensorError>;
