use std::path::PathBuf;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid label set: {0}")]
    InvalidLabelSet(String),

    #[error("row {row}: target is not a permutation of 1..{n}")]
    NonPermutationTarget { row: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("row {row}, column {col}: feature value is not finite")]
    NonFiniteFeature { row: usize, col: usize },

    #[error("ranking has every label tied")]
    DegenerateRanking,

    #[error("dataset has no instances")]
    EmptyDataset,

    #[error("every instance has zero loss")]
    AllZeroLoss,

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("first boosting iteration already had average loss {avg_loss} >= 0.5")]
    NoUsableModel { avg_loss: f64 },

    #[error("{m} instances cannot be split into {folds} folds")]
    TooFewInstances { m: usize, folds: usize },

    #[error("baseline Kendall tau {single_kt} is too close to zero for a relative improvement")]
    BaselineNearZero { single_kt: f64 },

    #[error("score table is degenerate: {0}")]
    DegenerateTable(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },

    #[error("malformed model file (line {line}): {msg}")]
    ModelFormat { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
