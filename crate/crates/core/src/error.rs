use std::path::PathBuf;

use thiserror::Error;

use crate::dsl::SpecParseError;
use crate::network::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node {node} not in layer {layer}")]
    NodeNotInLayer { layer: String, node: NodeId },

    #[error("unknown layer {0}")]
    UnknownLayer(String),

    #[error("layer {0} already present")]
    DuplicateLayer(String),

    #[error("layers {0} and {1} already coupled")]
    DuplicateInterLayer(String, String),

    #[error("layers {0} and {1} not coupled")]
    LayersNotCoupled(String, String),

    #[error("modularity undefined for edgeless graph")]
    EdgelessModularity,

    #[error("partition does not cover node {0}")]
    PartialPartition(NodeId),

    #[error("stats undefined for singleton")]
    SingletonStats,

    #[error("node {node} assigned to more than one community in layer {layer}")]
    OverlappingCommunities { layer: String, node: NodeId },

    #[error("unknown community {local} in layer {layer}")]
    UnknownCommunity { layer: String, local: u32 },

    #[error("no community assignment for layer {0}")]
    MissingAssignment(String),

    #[error("invalid k-community spec: {}", .0.join("; "))]
    InvalidSpec(Vec<String>),

    #[error(transparent)]
    SpecParse(#[from] SpecParseError),

    #[error("invalid network: {}", .0.join("; "))]
    InvalidNetwork(Vec<String>),

    #[error("{path}:{line}: {kind} endpoint {node} not in layer {layer}")]
    DanglingEndpoint {
        path: PathBuf,
        line: usize,
        kind: &'static str,
        node: NodeId,
        layer: String,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("feature vector length mismatch for node {node}: expected {expected}, got {got}")]
    DimensionMismatch {
        node: NodeId,
        expected: usize,
        got: usize,
    },

    #[error("{0}")]
    InvalidInput(String),

    #[error("value {value} of node {node} outside range [{lo}, {hi}]")]
    OutOfRange {
        node: NodeId,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by malformed or inconsistent input data rather
    /// than by the filesystem.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Io { .. } | Error::Json { .. } | Error::Parse { .. }
        )
    }
}
