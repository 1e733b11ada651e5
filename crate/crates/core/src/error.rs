use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid nucleotide {symbol:?} at offset {offset}")]
    InvalidBase { symbol: char, offset: usize },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("collection of {symbols} symbols exceeds the configured budget of {limit}")]
    Capacity { symbols: u64, limit: u64 },

    #[error("integrity check failed: {0}")]
    Integrity(String),

    #[error("position {index} out of range (length {len})")]
    OutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    Domain(String),

    #[error("missing input {0}")]
    MissingInput(PathBuf),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn integrity(msg: impl Into<String>) -> Self {
        Error::Integrity(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(source: std::io::Error) -> Self {
        Error::io("i/o", source)
    }
}
