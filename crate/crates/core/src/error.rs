use std::path::PathBuf;

/// Errors produced by the linking toolkit.
#[derive(thiserror::Error, Debug)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A record could not be parsed. `line` is 1-based.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("format error: {0}")]
    Format(String),

    /// Same identifier defined twice, or a reference to an unknown identifier.
    #[error("integrity error: {0}")]
    Integrity(String),

    /// Non-finite or otherwise unusable values.
    #[error("data error: {0}")]
    Data(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("numerical error: {0}")]
    Numerical(String),

    /// No row could be built for the document matrix.
    #[error("document has no embeddable candidates")]
    EmptyDocument,

    /// Argument outside the domain of a function (e.g. rank 0).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("undefined input: {0}")]
    UndefinedInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
