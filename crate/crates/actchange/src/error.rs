//! Error types shared by every module.

use thiserror::Error;

/// A DSL syntax error with a 1-based source position.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// Library error.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    /// An argument is malformed or refers to unknown symbols.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A configured size cap would be exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// An operation's precondition does not hold (for instance non-modular input).
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// The requested change has no result.
    #[error("{0}")]
    Impossible(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
