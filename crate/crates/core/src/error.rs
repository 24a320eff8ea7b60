use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("size limit exceeded: {0}")]
    Size(String),

    #[error("unsupported parity: {0}")]
    UnsupportedParity(String),

    #[error("step {dt} is too coarse, need 0 < dt <= {max}")]
    Resolution { dt: f64, max: f64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("empty time grid")]
    EmptyGrid,
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
