use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Shapes or kinds that do not fit together (dimension mismatch, labeled
    /// point in an unlabeled space, ...).
    #[error("structural error: {0}")]
    Structural(String),

    /// Caller supplied an argument outside its domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("{path}: row {row}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("row {row}: {message}")]
    BoundViolation { row: usize, message: String },

    /// A solver reached a state that valid inputs cannot produce.
    #[error("solver failure: {0}")]
    Solver(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Config(_) => 1,
            Error::Structural(_)
            | Error::EmptyDataset
            | Error::Parse { .. }
            | Error::BoundViolation { .. }
            | Error::Io(_)
            | Error::Json(_) => 2,
            Error::Solver(_) => 3,
        }
    }
}
