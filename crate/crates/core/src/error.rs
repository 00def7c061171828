use thiserror::Error;

/// Errors raised across the crate.
///
/// Constraint violations of a well-formed box are not errors; they are
/// reported through [`crate::boxes::ValidationReport`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("table has {found} entries but shape requires {expected}")]
    TableSize { expected: usize, found: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("box violates {count} constraint(s), first: {first}")]
    InvalidBox { count: usize, first: String },
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("polytope is unbounded")]
    Unbounded,
    #[error("wiring error: {0}")]
    Wiring(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
