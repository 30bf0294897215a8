//! Error type shared across the crate.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Vector/matrix dimensions do not line up.
    DimensionMismatch { expected: usize, got: usize, context: &'static str },
    /// Two values from different finite fields were combined.
    FieldMismatch { context: &'static str },
    /// A module description violates a structural invariant.
    InvalidModule(String),
    /// A value is outside the supported parameter range.
    InvalidInput(String),
    /// A computation would exceed a hard size guard.
    TooLarge(String),
    /// A pipeline refused to run (e.g. the module fails a required axiom).
    Refused(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, got, context } => {
                write!(f, "dimension mismatch in {context}: expected {expected}, got {got}")
            }
            Error::FieldMismatch { context } => write!(f, "field mismatch in {context}"),
            Error::InvalidModule(msg) => write!(f, "invalid module: {msg}"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::TooLarge(msg) => write!(f, "computation too large: {msg}"),
            Error::Refused(msg) => write!(f, "refused: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
