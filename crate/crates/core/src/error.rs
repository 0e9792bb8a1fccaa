use std::path::PathBuf;

use crate::masking::LevelMask;
use crate::selection::EliminationTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}, level {level}: {message}")]
    Validation {
        line: usize,
        level: usize,
        message: String,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error("fitness evaluation failed for mask {mask}: {message}")]
    Fitness { mask: LevelMask, message: String },

    #[error("backward elimination aborted after {} rounds: {source}", partial.rounds.len())]
    Elimination {
        partial: Box<EliminationTrace>,
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("no run records found in {}", .0.display())]
    NoRecords(PathBuf),

    #[error("data: {0}")]
    Data(String),

    #[error("cell {cell} failed: {source}")]
    Cell { cell: String, source: Box<Error> },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn arg(message: impl Into<String>) -> Self {
        Error::Argument(message.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by malformed or invariant-violating input data.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::Validation { .. } | Error::NoRecords(_) | Error::Data(_)
        ) || matches!(self, Error::Cell { source, .. } if source.is_data_error())
    }
}
