use thiserror::Error;

/// Errors raised by the library. Variants carry enough context to be
/// surfaced verbatim by the command-line front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid sector: {0}")]
    InvalidSector(String),

    #[error("sector violation: {0}")]
    SectorViolation(String),

    #[error("invalid mode {mode} for a basis with {modes} modes")]
    InvalidMode { mode: usize, modes: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid site pair: {0}")]
    InvalidPair(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate limit: {0}")]
    DegenerateLimit(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported reduction: {0}")]
    UnsupportedReduction(String),

    #[error("unsupported measure: {0}")]
    UnsupportedMeasure(String),

    #[error("unsupported sector ({n_a},{n_b}): {reason}")]
    UnsupportedSector { n_a: usize, n_b: usize, reason: String },

    #[error("state is not of Werner form (distance from twirl {distance:.3e})")]
    NotWerner { distance: f64 },

    #[error("correlation inconsistency: {0}")]
    CorrelationInconsistency(String),

    #[error("invalid separation {0}")]
    InvalidSeparation(usize),

    #[error("block of dimension {dim} exceeds the dense limit {limit}")]
    BlockTooLarge { dim: usize, limit: usize },

    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("operators do not commute (max deviation {0:.3e})")]
    NotCommuting(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
