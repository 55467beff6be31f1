use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty set")]
    EmptySet,
    #[error("empty test set")]
    EmptyTestSet,
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("class label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("invalid class distribution: {0}")]
    InvalidDistribution(String),
    #[error("committee needs at least two members, got {0}")]
    EmptyCommittee(usize),
    #[error("need at least {needed} labelled examples, got {found}")]
    TooFewExamples { needed: usize, found: usize },
    #[error("score vector has no evaluated ids")]
    EmptyScoreVector,
    #[error("empty grid")]
    EmptyGrid,
    #[error("closed-form Q^m requires the balanced (-1, +1) problem")]
    UnsupportedPrior,
    #[error("bad problem spec: {0}")]
    BadSpec(String),
    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: row {row}, column '{column}' is not numeric: {value:?}")]
    NonNumericCovariate {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },
    #[error("{path}: no label column named '{column}'")]
    MissingLabelColumn { path: PathBuf, column: String },
    #[error("not enough data: requested {requested} rows, have {available}")]
    NotEnoughData { requested: usize, available: usize },
    #[error("cannot cover all {n_classes} classes in the labelled split")]
    ClassCoverageImpossible { n_classes: usize },
    #[error("metric requires error-rate losses")]
    WrongLossKind,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("values have zero variance")]
    ZeroVariance,
    #[error("degenerate spatial weights: {0}")]
    DegenerateWeights(String),
    #[error("problem kind '{0}' has no known generating distribution")]
    UnsupportedProblem(String),
    #[error("no rs baseline run for cell {0}")]
    MissingBaseline(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
