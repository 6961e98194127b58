use std::path::PathBuf;

use thiserror::Error;

/// Every failure the engine reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path} line {line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("unknown node id {id:?} in link {link}")]
    UnknownNodeId { link: String, id: String },
    #[error("link {link} declared single-valued but row {row} has {count} targets")]
    CardinalityViolation { link: String, row: String, count: usize },
    #[error("unknown link type {0}")]
    UnknownLink(String),
    #[error("unknown node type {0}")]
    UnknownNodeType(String),
    #[error("meta-path halves end at different node types ({left} vs {right})")]
    EndTypeMismatch { left: String, right: String },
    #[error("dense oracle refused: {size} exceeds cap {cap}")]
    OracleCapExceeded { size: usize, cap: usize },
    #[error("training set contains a single class")]
    SingleClassTrainingSet,
    #[error("non-finite feature at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },
    #[error("shape mismatch: expected {expected} columns, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("timestamps do not cover {needed} distinct spans")]
    InsufficientSpan { needed: usize },
    #[error("baseline metric is zero")]
    BaselineZero,
    #[error("degenerate group: {0}")]
    DegenerateGroup(String),
    #[error("model file: {0}")]
    Model(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for errors caused by bad input data or configuration rather than
    /// an internal failure.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::OracleCapExceeded { .. })
    }
}
