use thiserror::Error;

/// Errors raised by the learners, bound evaluators and data loaders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("at least 2 experts are required, got {0}")]
    TooFewExperts(usize),

    #[error("non-finite value {value} for expert {expert}")]
    NonFinite { expert: usize, value: f64 },

    #[error("learning rate must be positive, got {0}")]
    InvalidRate(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("round {round}: expected {expected} experts, got {found}")]
    DimensionMismatch {
        round: usize,
        expected: usize,
        found: usize,
    },

    #[error("loss stream is empty")]
    EmptyStream,

    #[error("line {row}: {reason}")]
    Csv { row: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
