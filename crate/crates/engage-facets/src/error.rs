use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    TierParse { line: usize, message: String },

    #[error("tier '{tier}': segments overlap at {at_ms} ms")]
    OverlappingSegments { tier: String, at_ms: u64 },

    #[error("invalid segment [{start_ms}, {end_ms}): {message}")]
    InvalidSegment {
        start_ms: u64,
        end_ms: u64,
        message: String,
    },

    #[error("invalid frame rate {0} Hz (must be in (0, 1000])")]
    InvalidFrameRate(f64),

    #[error("bundle '{0}' has zero duration")]
    ZeroDuration(String),

    #[error("duplicate channel '{0}' in bundle")]
    DuplicateChannel(String),

    #[error("missing channel '{0}'")]
    MissingChannel(String),

    #[error("empty input stream")]
    EmptyStream,

    #[error("stream length mismatch in {context}: {left} vs {right}")]
    LengthMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    #[error("unknown engagement state '{label}' at frame {frame}")]
    UnknownState { label: String, frame: usize },

    #[error("facet '{0}' has no rows")]
    MissingFacet(&'static str),

    #[error("facet '{class}' has {count} rows, fewer than k = {k}")]
    ClassSmallerThanK {
        class: &'static str,
        count: usize,
        k: usize,
    },

    #[error("k must be at least 2, got {0}")]
    InvalidK(usize),

    #[error("feature schema mismatch: expected {expected}, got {found}")]
    SchemaMismatch { expected: String, found: String },

    #[error("training loss is not finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("classifier '{kind}' does not support {operation}")]
    UnsupportedOperation { kind: String, operation: String },

    #[error("fold {fold}: {source}")]
    FoldFailed {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("confusion matrix column '{0}' sums to zero")]
    ZeroColumn(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed model file: {0}")]
    ModelFormat(String),

    #[error("malformed matrix: {0}")]
    MalformedMatrix(String),

    #[error("malformed dataset file: {0}")]
    DatasetFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
