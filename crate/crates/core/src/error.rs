use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    // dataset loading
    #[error("label column `{0}` not found in header")]
    MissingLabelColumn(String),
    #[error("non-numeric cell at row {row}, column `{column}`: `{value}`")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("non-finite value at row {row}, column `{column}`")]
    NonFiniteValue { row: usize, column: String },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("row {row} has {found} cells, header has {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("bad IDX magic in {what}: expected {expected:#010x}, found {found:#010x}")]
    BadMagic {
        what: &'static str,
        expected: u32,
        found: u32,
    },
    #[error("IDX count mismatch: {images} images vs {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("truncated IDX file {what}: need {needed} bytes, have {have}")]
    TruncatedFile {
        what: &'static str,
        needed: usize,
        have: usize,
    },

    // culling
    #[error("requested {requested} classes but dataset has {available}")]
    TooManyClassesRequested { requested: usize, available: usize },
    #[error("class `{0}` has no samples after culling")]
    EmptyAfterCull(String),

    // metrics
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("cosine distance undefined for a zero vector")]
    ZeroVectorCosine,
    #[error("unsupported metric `{0}` (expected euclidean, manhattan or cosine)")]
    UnsupportedMetric(String),
    #[error("unsupported kernel `{0}` (expected inverse or softmax)")]
    UnsupportedKernel(String),

    // pipeline
    #[error("class `{0}` has no samples")]
    EmptyClass(String),
    #[error("centroid of class `{0}` sits at the ball center; anchor direction is undefined")]
    CentroidAtCenter(String),
    #[error("need at least 2 classes, found {0}")]
    TooFewClasses(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    // layout
    #[error("lin_space needs num >= 2, got {0}")]
    NumTooSmall(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("weight row {row} is not a convex combination (sum {sum}, min {min})")]
    NonConvexRow { row: usize, sum: f64, min: f64 },

    // bench
    #[error("class `{class}` has {count} samples, fewer than {folds} folds")]
    ClassSmallerThanFolds {
        class: String,
        count: usize,
        folds: usize,
    },
    #[error("k = {k} exceeds training size {available}")]
    KTooLarge { k: usize, available: usize },
    #[error("power iteration did not converge after {0} iterations")]
    ConvergenceFailure(usize),

    // render
    #[error("curve needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("curve x values must be strictly increasing (index {0})")]
    NonMonotonicX(usize),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
