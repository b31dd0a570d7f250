use std::io;

use thiserror::Error;

/// Errors raised by sketch construction, queries, I/O and metrics.
#[derive(Debug, Error)]
pub enum SketchError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("memory budget too small: {budget} bytes yields matrix dimension {dimension}")]
    BudgetTooSmall { budget: usize, dimension: usize },

    #[error("label {label} out of range for a sketch with {num_labels} labels")]
    LabelOutOfRange { label: usize, num_labels: usize },

    #[error("invalid weight {0}: weights must be finite and non-negative")]
    InvalidWeight(f64),

    #[error("invalid query: {0}")]
    Query(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error("metric undefined: {0}")]
    Metric(String),

    #[error("exact oracle refuses more than {cap} events")]
    EventCapExceeded { cap: usize },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = SketchError> = std::result::Result<T, E>;
