use thiserror::Error;

/// Errors raised by code construction, decoding and analysis routines.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A parameter exceeds a configured resource cap.
    #[error("{what} = {value} exceeds the cap of {cap}{hint}")]
    Size {
        what: &'static str,
        value: usize,
        cap: usize,
        hint: &'static str,
    },

    /// An argument is out of range or inconsistent with another argument.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A code specification or generator file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// A fit or estimate was requested with too little data.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// An exact EXIT polynomial violated monotonicity, which can only happen
    /// if it was not produced from a failure set.
    #[error("exact EXIT polynomial is not monotone: {0}")]
    NotMonotone(String),
}

impl Error {
    pub(crate) fn size(what: &'static str, value: usize, cap: usize) -> Self {
        Error::Size {
            what,
            value,
            cap,
            hint: "",
        }
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
