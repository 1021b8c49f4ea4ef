use thiserror::Error;

/// Errors shared across the scheduling and routing modules.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A row or column of the demand matrix exceeds the scheduling window.
    #[error("infeasible demand: {0}")]
    InfeasibleDemand(String),

    /// Two operands disagree on the port count.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An operation that requires positive demand was given an all-zero matrix.
    #[error("empty demand")]
    EmptyDemand,

    /// Instance exceeds the size limits of a brute-force oracle.
    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),

    /// Matrix is not doubly balanced (row/column sums unequal).
    #[error("not doubly balanced: {0}")]
    NotDoublyBalanced(String),

    /// Traffic spec is internally inconsistent.
    #[error("spec mismatch: {0}")]
    SpecMismatch(String),

    /// Malformed configuration value.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Malformed input file or JSON payload.
    #[error("invalid format: {0}")]
    InvalidFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
