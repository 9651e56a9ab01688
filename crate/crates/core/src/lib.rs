//! Community detection for heterogeneous multilayer networks.
//!
//! Each layer is analyzed once with a community detector, then layers are
//! composed pairwise, left to right, by coupling their communities through
//! the inter-layer links. The result of a k-community specification is a set
//! of tuples that keeps every matched community and the links that couple
//! them, so any element can be expanded back into a sub-network.

pub mod community;
pub mod coupling;
pub mod dsl;
pub mod error;
pub mod ingest;
pub mod kcommunity;
pub mod network;
pub mod synth;

pub use community::{
    detect_communities, CommunityAssignment, CommunityDetector, CommunityId, CommunityStats,
    Louvain,
};
pub use coupling::{
    build_cbg, mwbc, weigh_cbg, CommunityBipartiteGraph, MatchPairs, MetaEdge, WeightMetric,
};
pub use dsl::{parse_spec, print_spec, validate_spec, SpecParseError};
pub use error::{Error, Result};
pub use kcommunity::{
    detect_k_community, Assignments, KCommunityResult, KCommunitySpec, KCommunityTuple, Step,
};
pub use network::{layer_adjacency, validate_hemln, HeMLN, InterLayerGraph, Layer, NodeId};
