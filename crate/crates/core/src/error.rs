use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vector {index} has norm {norm} and lies outside the unit ball")]
    OutsideUnitBall { index: usize, norm: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("instance too large: {count} enumeration steps exceed the limit {limit}")]
    TooLarge { count: f64, limit: f64 },

    /// A numerical invariant of an algorithm broke; carries diagnostics.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
