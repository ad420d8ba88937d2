use thiserror::Error;

/// Errors raised by the numerical and arithmetic routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The field is outside the supported class (for example narrow class number > 1).
    #[error("unsupported field: {0}")]
    UnsupportedField(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("missing coefficient for prime of norm {0}")]
    MissingCoefficient(u64),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
