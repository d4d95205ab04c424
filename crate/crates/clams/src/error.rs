//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by any operation in this crate.
#[derive(Debug, Error)]
pub enum ClamsError {
    /// Fewer than two points were supplied.
    #[error("scatterplot needs at least 2 points, got {0}")]
    EmptyInput(usize),
    /// A coordinate or value was NaN or infinite.
    #[error("non-finite value: {0}")]
    NonFinite(String),
    /// A precondition on an operation's arguments was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Every EM restart collapsed (tiny component weight or singular covariance).
    #[error("degenerate GMM fit: {0}")]
    DegenerateFit(String),
    /// Curve too short for knee detection.
    #[error("kneedle needs at least 3 curve points, got {0}")]
    TooShort(usize),
    /// A component had a zero minor axis, so density/ellipticity are undefined.
    #[error("degenerate component: minor_sd is 0")]
    DegenerateComponent,
    /// Not enough training rows.
    #[error("training needs at least {min} rows, got {got}")]
    TooFewRows { got: usize, min: usize },
    /// A probability argument was outside [0, 1].
    #[error("value {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// Model file is not in a readable version of the format.
    #[error("model format mismatch: {0}")]
    FormatVersionMismatch(String),
    /// Model file checksum does not match its tree payload.
    #[error("model checksum mismatch (expected {expected}, found {found})")]
    ChecksumMismatch { expected: String, found: String },
    /// A data file failed to parse; `line` is 1-based.
    #[error("parse error at {path}:{line}: {msg}")]
    ParseError {
        path: String,
        line: u64,
        msg: String,
    },
    /// A parsed value was outside its documented range; `line` is 1-based.
    #[error("range error at {path}:{line}: {msg}")]
    RangeError {
        path: String,
        line: u64,
        msg: String,
    },
    /// Sequence lengths disagree.
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    /// No point is assigned in both clusterings.
    #[error("no co-assigned points between clusterings")]
    EmptyOverlap,
    /// Need at least two clusterings to measure disagreement.
    #[error("need at least 2 clusterings, got {0}")]
    TooFewClusterings(usize),
    /// Rank correlation is undefined when an input is entirely tied.
    #[error("zero variance: all values tied in input")]
    ZeroVariance,
    /// Clustering metric needs at least two clusters.
    #[error("metric undefined for a single cluster")]
    SingleCluster,
    /// k-nearest-neighbour size must be below the point count.
    #[error("k = {k} too large for {n} points")]
    KTooLarge { k: usize, n: usize },
    /// Every hyperparameter draw failed to produce a scorable clustering.
    #[error("all {0} search runs failed")]
    AllRunsFailed(usize),
    /// A configuration struct failed validation.
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, ClamsError>;
