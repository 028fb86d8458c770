//! Error type shared by every stage.
//!
//! Errors fall into four classes that the CLI maps onto exit codes:
//! validation (bad input, 1), capacity (a requested order or arity is beyond
//! what is implemented, 2), internal consistency (an identity that must hold
//! failed, 3) and structural mismatches, which are programming errors and
//! are reported as internal.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("structural mismatch: {0}")]
    Structural(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("residual nonzero at y-degree {degree}: {detail}")]
    Residual { degree: u32, detail: String },
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for the CLI contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Validation(_) | Error::Precondition(_) | Error::Io(_) => 1,
            Error::Capacity(_) => 2,
            Error::Structural(_) | Error::Residual { .. } | Error::Internal(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
