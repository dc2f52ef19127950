use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("symbol invalid: index {value} repeated at orbit step {step}")]
    SymbolCollision { step: usize, value: usize },
    #[error("orbit enumeration exhausted: index {index} not reached within {limit} steps")]
    EnumerationExhausted { index: usize, limit: usize },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("scalar type cannot represent the value exactly: {0}")]
    NotExact(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no witness found: {0}")]
    WitnessNotFound(String),
    #[error("hint rejected: {hint} contradicted at {at}")]
    HintRejected { hint: String, at: String },
    #[error("implication lattice violated: {0}")]
    LatticeViolation(String),
    #[error("unknown gallery entry `{0}`")]
    UnknownEntry(String),
    #[error("{0}")]
    Parse(#[from] crate::dsl::Diagnostic),
}

pub type Result<T> = std::result::Result<T, Error>;
