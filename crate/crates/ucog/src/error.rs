//! Crate-wide error type.

use std::path::PathBuf;

/// Result alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure mode surfaced by the library.
///
/// Row and column indices in CSV errors are 1-based and count data rows
/// only (the header is row 0 in neither scheme).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),
    #[error("target column {0:?} is not in the header")]
    MissingTargetColumn(String),
    #[error("row {row}, column {column}: cannot parse {value:?} as a finite number")]
    UnparsableCell {
        row: usize,
        column: usize,
        value: String,
    },
    #[error("row {row}, column {column}: missing value")]
    MissingValue { row: usize, column: usize },
    #[error("dataset has no samples")]
    EmptyDataset,
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { got: usize, needed: usize },
    #[error("feature set is empty")]
    EmptyFeatureSet,
    #[error("feature index {index} out of range for {count} features")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("input vector must be normalized to [0, 1]")]
    NotNormalized,
    #[error("model has not been trained")]
    ModelUntrained,
    #[error("target kind mismatch: {0}")]
    KindMismatch(String),
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("need at least 3 patterns, got {0}")]
    TooFewPatterns(usize),
    #[error("pattern {0} does not belong to a single class")]
    ImpurePattern(usize),
    #[error("no feature passed the selection thresholds")]
    NoRelevantFeatures,
    #[error("invalid threshold: {0}")]
    InvalidThreshold(String),
    #[error("ensemble has no members")]
    EmptyEnsemble,
    #[error("datasets do not line up: {0}")]
    DatasetMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for filesystem-level failures, as opposed to validation ones.
    pub fn is_io(&self) -> bool {
        match self {
            Error::MissingFile(_) | Error::Io(_) => true,
            Error::Csv(e) => matches!(e.kind(), csv::ErrorKind::Io(_)),
            _ => false,
        }
    }
}
