use thiserror::Error;

/// Errors raised by constructions and checks.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed or out-of-range arguments.
    #[error("input error: {0}")]
    Input(String),
    /// A structural invariant failed (the message names the witness).
    #[error("invariant violation: {0}")]
    Invariant(String),
    /// The requested computation needs a larger truncation.
    #[error("truncation too small: {0}")]
    Truncation(String),
    /// Input file could not be parsed.
    #[error("{file}:{line}:{column}: {message}")]
    Parse { file: String, line: usize, column: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
