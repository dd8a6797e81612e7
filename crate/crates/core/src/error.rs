use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the DC PSE toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty cloud")]
    EmptyCloud,

    #[error("unsupported dimension {0} (expected 1, 2 or 3)")]
    BadDimension(usize),

    #[error("node {node}: coordinate vector has length {found}, expected {expected}")]
    CoordinateLength {
        node: usize,
        expected: usize,
        found: usize,
    },

    #[error("node {node}: non-finite coordinate")]
    NonFiniteCoordinate { node: usize },

    #[error("insufficient nodes: requested {requested} neighbors but only {available} available")]
    InsufficientNodes { requested: usize, available: usize },

    #[error("node {node} out of range (cloud has {len} nodes)")]
    NodeOutOfRange { node: usize, len: usize },

    #[error("insufficient support: {neighbors} neighbors for {conditions} moment conditions")]
    InsufficientSupport { neighbors: usize, conditions: usize },

    #[error("ill-conditioned node {node} (condition estimate {condition:e})")]
    IllConditioned { node: usize, condition: f64 },

    #[error("node {node} has a duplicate neighbor {neighbor} at zero distance")]
    DuplicateNode { node: usize, neighbor: usize },

    #[error("operator build failed at {} node(s) {nodes:?}; first failure: {reason}", nodes.len())]
    BuildFailed { nodes: Vec<usize>, reason: String },

    #[error("invalid operator spec: {0}")]
    InvalidSpec(String),

    #[error("field length {found} does not match node count {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value at node {node}")]
    NonFiniteValue { node: usize },

    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("incompressible limit (nu = 0.5)")]
    IncompressibleLimit,

    #[error("point ({x}, {y}) lies inside the hole (r = {r} < a = {a})")]
    OutsideDomain { x: f64, y: f64, r: f64, a: f64 },

    #[error("reference field has zero range")]
    ZeroRange,

    #[error("{0}")]
    Invalid(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: unsupported format: {message}")]
    UnsupportedFormat { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("report serialization: {0}")]
    Report(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by the numerics (ill-conditioned supports)
    /// rather than by invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IllConditioned { .. } | Error::BuildFailed { .. } | Error::DuplicateNode { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
