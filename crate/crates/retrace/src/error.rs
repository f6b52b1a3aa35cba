//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

use crate::graph::VertexId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid coordinate: {0}")]
    InvalidCoordinate(String),

    #[error("undefined direction: identical points")]
    UndefinedDirection,

    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),

    #[error("edge ({from}, {to}) references unknown vertex {missing}")]
    DanglingEdge {
        from: VertexId,
        to: VertexId,
        missing: VertexId,
    },

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(VertexId, VertexId),

    #[error("no edge between consecutive path vertices {0} and {1}")]
    MissingEdge(VertexId, VertexId),

    #[error("path too short: need at least {need} vertices, got {got}")]
    PathTooShort { need: usize, got: usize },

    #[error("graph bounds violated: {0}")]
    BoundsViolation(String),

    #[error("invalid value for {field}: {message}")]
    InvalidValue { field: String, message: String },

    #[error("parse error in {path} line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("cornering log is empty")]
    EmptyCorneringLog,

    #[error("cornering log times not strictly increasing at row {row}")]
    NonMonotonicLog { row: usize },

    #[error("path already matched all {0} cornering events")]
    ExhaustedCorneringLog(usize),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("empty graph")]
    EmptyGraph,

    #[error("search exceeded node-expansion cap of {0}; use a smaller instance")]
    ExpansionCapExceeded(u64),

    #[error("no candidate paths: attack failed")]
    NoCandidates,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("route has no cornering event; cannot derive an attack input")]
    NoTurnEvents,

    #[error("edge ({0}, {1}) has no road-class label")]
    UnlabeledEdge(VertexId, VertexId),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wrap an I/O error with the path it concerns.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
