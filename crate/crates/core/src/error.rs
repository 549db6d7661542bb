use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("model mismatch: expected {expected}, found {found}")]
    ModelMismatch { expected: &'static str, found: &'static str },

    #[error("boundary points coincide")]
    DegeneratePair,

    #[error("boundary points are not joined by a geodesic line")]
    NotJoinable,

    #[error("point is a fixed point of the element")]
    FixedPoint,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("enumeration budget of {budget} nodes exceeded after completing depth {completed_depth}")]
    BudgetExceeded { budget: u64, completed_depth: usize },

    #[error("exponent {s} must exceed the estimated critical exponent {delta}")]
    ExponentTooSmall { s: f64, delta: f64 },

    #[error("completeness audit failed: {0}")]
    AuditFailed(String),

    #[error("ping-pong verification failed: {0}")]
    PingPong(String),
}

pub type Result<T> = std::result::Result<T, Error>;
