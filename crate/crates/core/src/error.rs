//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by dataset handling, feature extraction, training and
/// model persistence.
#[derive(Debug, Error)]
pub enum Error {
    #[error("column '{0}' not found in CSV header")]
    MissingColumn(String),

    #[error("empty input file: {0}")]
    EmptyFile(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("label out of range at row {row}: {detail}")]
    LabelOutOfRange { row: usize, detail: String },

    #[error("no token survives min_df={min_df}; vocabulary is empty")]
    EmptyVocabulary { min_df: usize },

    #[error("shape mismatch in {op}: {lhs:?} vs {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },

    #[error("backward requires a scalar, got shape {0:?}")]
    NotScalar(Vec<usize>),

    #[error("non-finite value produced by {op}")]
    NonFinite { op: &'static str },

    #[error("mask rate {0} selects no positions")]
    NoMaskedPositions(f64),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("tap layer {tap} out of range for a {n_layers}-layer encoder")]
    TapOutOfRange { tap: usize, n_layers: usize },

    #[error("ensemble members use different vocabularies")]
    VocabMismatch,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed model bundle: {0}")]
    BadBundle(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
