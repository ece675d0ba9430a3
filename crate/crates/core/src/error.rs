use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter is outside the operation's domain.
    #[error("invalid argument: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// Regularity is undefined for the all-zero vector.
    #[error("regularity is undefined for a zero vector")]
    UndefinedRegularity,

    #[error("no defined rows or pairs to estimate regularity from")]
    NoDefinedRows,

    #[error("degenerate spectrum: top-{k} eigenvalues sum to zero")]
    DegenerateSpectrum { k: usize },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// Errors that originate from reading or decoding input files.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Format { .. } | Error::Io(_))
    }
}
