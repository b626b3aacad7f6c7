use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("index out of range: {0}")]
    Range(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid module: {0}")]
    InvalidModule(String),
    #[error("malformed input: {0}")]
    Parse(String),
    /// A computed quantity disagreed with a closed formula or with another
    /// criterion that must agree with it.
    #[error("invariant failure: {0}")]
    Invariant(String),
    #[error("too large: {0}")]
    TooLarge(String),
}

pub type Result<T> = std::result::Result<T, Error>;
