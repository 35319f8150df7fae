use thiserror::Error;

/// Errors raised by the library.
///
/// Validation failures carry the name of the invariant that was violated so
/// front ends can report it verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value produced at step {step}")]
    NonFinite { step: usize },

    #[error("{invariant} violated: {detail}")]
    Invariant {
        invariant: &'static str,
        detail: String,
    },

    #[error("power {power} exceeds the supported cap of {cap}")]
    PowerCap { power: usize, cap: usize },

    #[error("unknown {what} `{tag}`")]
    UnknownTag { what: &'static str, tag: String },

    #[error("operator `{0}` has no known fixed point")]
    MissingFixedPoint(String),

    #[error("operator `{0}` declares no contractive constants")]
    MissingConstants(String),

    #[error("{0}")]
    Parse(String),

    #[error("i/o failure: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invariant(invariant: &'static str, detail: impl Into<String>) -> Self {
        Error::Invariant {
            invariant,
            detail: detail.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
