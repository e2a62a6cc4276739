use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("graph not connected")]
    Disconnected,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("uncertain point {point}: {reason}")]
    InvalidUncertainPoint { point: usize, reason: String },

    #[error("uncertain point {point}, location {location}: {reason}")]
    InvalidLocation {
        point: usize,
        location: usize,
        reason: String,
    },

    #[error("offset {t} outside the function domain [0, {end}]")]
    OutOfDomain { t: f64, end: f64 },

    #[error("center set is empty")]
    EmptyCenters,

    #[error("k must be at least 1")]
    InvalidK,

    #[error("box dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
