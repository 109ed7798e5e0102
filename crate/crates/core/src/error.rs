use std::fmt;

use serde::Serialize;

/// A falsified property together with the evidence that falsifies it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub property: String,
    pub witness: String,
}

impl Violation {
    pub fn new(property: impl Into<String>, witness: impl Into<String>) -> Self {
        Self {
            property: property.into(),
            witness: witness.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated: {}", self.property, self.witness)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed or inconsistent user input (unknown ids, empty agent sets, ...).
    #[error("input error: {0}")]
    Input(String),

    /// A market or scenario file failed to load. `location` is a line/column or a field path.
    #[error("{location}: {message}")]
    Format { location: String, message: String },

    /// The arguments do not satisfy the hypotheses of the operation.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// An exhaustive routine refused to run on an instance above its cap.
    #[error("size error: {what} has {size} contracts, above the cap of {cap}")]
    TooLarge { what: String, size: usize, cap: usize },

    #[error("{0}")]
    Violation(Violation),

    /// An internal step produced something outside its contract (e.g. a proposal
    /// strategy leaving the admissible range). Always a bug in the caller or library.
    #[error("internal contract violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn violation(property: impl Into<String>, witness: impl Into<String>) -> Self {
        Error::Violation(Violation::new(property, witness))
    }

    /// Process exit code used by the command-line interface.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Violation(_) | Error::Internal(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
