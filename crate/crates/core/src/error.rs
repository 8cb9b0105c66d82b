use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("token {token_index} ({piece:?}) cannot be aligned to any word")]
    Alignment { token_index: usize, piece: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("cannot tokenize {0:?}: character not covered by the vocabulary")]
    Untokenizable(String),

    #[error("zero spread in {0}")]
    ZeroVariance(&'static str),

    #[error("rank-deficient design matrix; collinear columns: {}", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("insufficient repetition for MTLD: {0}")]
    InsufficientRepetition(String),

    #[error("search space of {size} sequences exceeds the limit of {limit}")]
    SearchSpaceTooLarge { size: u128, limit: u128 },

    #[error("timestamps are not sorted at sample {0}")]
    UnsortedSamples(usize),

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. } | Error::ZeroVariance(_) | Error::InsufficientRepetition(_)
        )
    }
}
