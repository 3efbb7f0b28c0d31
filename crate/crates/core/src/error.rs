//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed instance text; carries the 1-based line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Structurally valid input that breaks an invariant.
    #[error("invalid instance: {0}")]
    Validation(String),

    /// Edge-weight types other than EUC_2D are not handled.
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    /// Degenerate model request (no customers, no trucks, ...).
    #[error("empty model: {0}")]
    EmptyModel(String),

    /// A count does not fit the integer type.
    #[error("overflow: {0}")]
    Overflow(String),

    /// Penalty configuration does not cover a constraint kind.
    #[error("penalty config error: {0}")]
    Config(String),

    /// Assignment length does not match the model dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// Exhaustive search refused: the problem is too large.
    #[error("size guard: {0}")]
    SizeGuard(String),

    /// Route set cannot be encoded as arc variables.
    #[error("encoding error: {0}")]
    Encoding(String),

    /// Metric asked for outside its domain (e.g. non-positive reference cost).
    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Remote(#[from] crate::remote::RemoteError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
