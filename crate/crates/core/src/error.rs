use thiserror::Error;

/// Every failure the toolkit can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input is empty")]
    EmptyInput,

    #[error("data contains a non-finite value at row {row}, column {col}")]
    NonFiniteData { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid dissimilarity matrix: {0}")]
    InvalidDissimilarity(String),

    #[error("neighbor count t={t} must satisfy 1 <= t < m={m}")]
    InvalidNeighborCount { t: usize, m: usize },

    #[error("neighbor graph is disconnected")]
    DisconnectedGraph,

    #[error("bandwidth must be positive, got {0}")]
    InvalidBandwidth(f64),

    #[error("radius must be positive, got {0}")]
    InvalidRadius(f64),

    #[error("cutoff distance must be positive, got {0}")]
    InvalidCutoff(f64),

    #[error("score input {value} at index {index} lies outside [0, 1]")]
    InvalidScore { index: usize, value: f64 },

    #[error("at least {needed} points are required, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("k={k} must satisfy 1 <= k <= m={m}")]
    KTooLarge { k: usize, m: usize },

    #[error("parameter grid is empty")]
    EmptyGrid,

    #[error("could not estimate the number of clusters (tau* below threshold)")]
    KEstimationFailed,

    #[error("could not place {k} centers with minimum separation {min_sep} after {attempts} attempts")]
    CannotPlaceCenters { k: usize, min_sep: f64, attempts: usize },

    #[error("label vectors differ in length: {0} vs {1}")]
    LabelMismatch(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed point file at line {line}: {reason}")]
    MalformedFile { line: usize, reason: String },

    #[error("cannot parse '{token}' at line {line}")]
    ParseError { line: usize, token: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
