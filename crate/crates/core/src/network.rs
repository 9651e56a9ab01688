//! Layers, inter-layer bipartite graphs and the heterogeneous multilayer
//! network that holds them.
//!
//! Construction is deliberately permissive: a [`Layer`] or [`HeMLN`] can hold
//! self-loops, duplicate edges or dangling endpoints so that [`validate_hemln`]
//! can report them. Loaders in [`crate::ingest`] normalize data before it gets
//! here, so networks read from disk are valid.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node identifier, unique across all layers of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u64> for NodeId {
    fn from(v: u64) -> Self {
        NodeId(v)
    }
}

/// Undirected edge with endpoints stored in ascending order.
pub type Edge = (NodeId, NodeId);

fn ordered(a: NodeId, b: NodeId) -> Edge {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// One layer of the network: a simple undirected graph over a single entity type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer {
    name: String,
    nodes: BTreeMap<NodeId, Option<String>>,
    edges: Vec<Edge>,
}

impl Layer {
    pub fn new(name: impl Into<String>) -> Self {
        Layer {
            name: name.into(),
            nodes: BTreeMap::new(),
            edges: Vec::new(),
        }
    }

    /// Builds an unlabeled layer from node and edge lists, without validation.
    pub fn from_edges(
        name: impl Into<String>,
        nodes: impl IntoIterator<Item = u64>,
        edges: impl IntoIterator<Item = (u64, u64)>,
    ) -> Self {
        let mut layer = Layer::new(name);
        for n in nodes {
            layer.add_node(NodeId(n), None);
        }
        for (a, b) in edges {
            layer.add_edge(NodeId(a), NodeId(b));
        }
        layer
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn add_node(&mut self, id: NodeId, label: Option<String>) {
        self.nodes.insert(id, label);
    }

    /// Appends an edge as given. Duplicates and self-loops are kept; see
    /// [`Layer::simplify`].
    pub fn add_edge(&mut self, a: NodeId, b: NodeId) {
        self.edges.push(ordered(a, b));
    }

    /// Drops duplicate edges and returns how many were removed. Self-loops
    /// are rejected.
    pub fn simplify(&mut self) -> Result<usize> {
        if let Some(&(a, _)) = self.edges.iter().find(|(a, b)| a == b) {
            return Err(Error::InvalidNetwork(vec![format!(
                "self-loop on node {a} in layer {}",
                self.name
            )]));
        }
        let before = self.edges.len();
        self.edges.sort_unstable();
        self.edges.dedup();
        Ok(before - self.edges.len())
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn label(&self, id: NodeId) -> Option<&str> {
        self.nodes.get(&id).and_then(|l| l.as_deref())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Node ids in ascending order.
    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn labeled_nodes(&self) -> impl Iterator<Item = (NodeId, Option<&str>)> + '_ {
        self.nodes.iter().map(|(&id, l)| (id, l.as_deref()))
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Number of edges incident to `v`.
    pub fn degree(&self, v: NodeId) -> Result<usize> {
        if !self.contains(v) {
            return Err(Error::NodeNotInLayer {
                layer: self.name.clone(),
                node: v,
            });
        }
        Ok(self
            .edges
            .iter()
            .map(|&(a, b)| usize::from(a == v) + usize::from(b == v))
            .sum())
    }

    /// Neighbor lists for every node, sorted ascending.
    pub fn adjacency(&self) -> BTreeMap<NodeId, Vec<NodeId>> {
        let mut adj: BTreeMap<NodeId, Vec<NodeId>> =
            self.nodes.keys().map(|&n| (n, Vec::new())).collect();
        for &(a, b) in &self.edges {
            adj.entry(a).or_default().push(b);
            if a != b {
                adj.entry(b).or_default().push(a);
            }
        }
        for list in adj.values_mut() {
            list.sort_unstable();
        }
        adj
    }

    /// Subgraph induced by `keep`, labels included.
    pub fn induced(&self, keep: &BTreeSet<NodeId>) -> Layer {
        Layer {
            name: self.name.clone(),
            nodes: self
                .nodes
                .iter()
                .filter(|(id, _)| keep.contains(id))
                .map(|(&id, l)| (id, l.clone()))
                .collect(),
            edges: self
                .edges
                .iter()
                .filter(|(a, b)| keep.contains(a) && keep.contains(b))
                .copied()
                .collect(),
        }
    }
}

/// Unordered pair of layer names, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LayerPair(String, String);

impl LayerPair {
    pub fn new(a: impl Into<String>, b: impl Into<String>) -> Self {
        let (a, b) = (a.into(), b.into());
        if a <= b {
            LayerPair(a, b)
        } else {
            LayerPair(b, a)
        }
    }

    pub fn first(&self) -> &str {
        &self.0
    }

    pub fn second(&self) -> &str {
        &self.1
    }
}

/// Bipartite link set between two layers. Each link is stored as
/// `(node of layer_a, node of layer_b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterLayerGraph {
    layer_a: String,
    layer_b: String,
    links: Vec<Edge>,
}

impl InterLayerGraph {
    pub fn new(layer_a: impl Into<String>, layer_b: impl Into<String>) -> Self {
        InterLayerGraph {
            layer_a: layer_a.into(),
            layer_b: layer_b.into(),
            links: Vec::new(),
        }
    }

    pub fn from_links(
        layer_a: impl Into<String>,
        layer_b: impl Into<String>,
        links: impl IntoIterator<Item = (u64, u64)>,
    ) -> Self {
        let mut g = InterLayerGraph::new(layer_a, layer_b);
        for (a, b) in links {
            g.add_link(NodeId(a), NodeId(b));
        }
        g
    }

    pub fn layer_a(&self) -> &str {
        &self.layer_a
    }

    pub fn layer_b(&self) -> &str {
        &self.layer_b
    }

    pub fn add_link(&mut self, a: NodeId, b: NodeId) {
        self.links.push((a, b));
    }

    pub fn links(&self) -> &[Edge] {
        &self.links
    }

    /// Drops duplicate links, returning how many were removed.
    pub fn dedup(&mut self) -> usize {
        let before = self.links.len();
        self.links.sort_unstable();
        self.links.dedup();
        before - self.links.len()
    }

    /// Links oriented as `(node of from, node of to)`. `from` must be one of
    /// the two layers.
    pub fn oriented<'a>(&'a self, from: &str) -> impl Iterator<Item = Edge> + 'a {
        let flip = from != self.layer_a;
        self.links
            .iter()
            .map(move |&(a, b)| if flip { (b, a) } else { (a, b) })
    }
}

/// Heterogeneous multilayer network: named layers plus at most one
/// inter-layer graph per unordered layer pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HeMLN {
    layers: BTreeMap<String, Layer>,
    interlayer: BTreeMap<LayerPair, InterLayerGraph>,
}

impl HeMLN {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_layer(&mut self, layer: Layer) -> Result<()> {
        if self.layers.contains_key(layer.name()) {
            return Err(Error::DuplicateLayer(layer.name().to_owned()));
        }
        self.layers.insert(layer.name().to_owned(), layer);
        Ok(())
    }

    pub fn add_interlayer(&mut self, graph: InterLayerGraph) -> Result<()> {
        for name in [graph.layer_a(), graph.layer_b()] {
            if !self.layers.contains_key(name) {
                return Err(Error::UnknownLayer(name.to_owned()));
            }
        }
        if graph.layer_a() == graph.layer_b() {
            return Err(Error::InvalidInput(format!(
                "inter-layer graph must join two distinct layers, got {} twice",
                graph.layer_a()
            )));
        }
        let key = LayerPair::new(graph.layer_a(), graph.layer_b());
        if self.interlayer.contains_key(&key) {
            return Err(Error::DuplicateInterLayer(
                graph.layer_a().to_owned(),
                graph.layer_b().to_owned(),
            ));
        }
        self.interlayer.insert(key, graph);
        Ok(())
    }

    pub fn layer(&self, name: &str) -> Option<&Layer> {
        self.layers.get(name)
    }

    pub fn layers(&self) -> impl Iterator<Item = &Layer> {
        self.layers.values()
    }

    pub fn layer_names(&self) -> impl Iterator<Item = &str> {
        self.layers.keys().map(String::as_str)
    }

    pub fn interlayer(&self, a: &str, b: &str) -> Option<&InterLayerGraph> {
        self.interlayer.get(&LayerPair::new(a, b))
    }

    pub fn interlayers(&self) -> impl Iterator<Item = &InterLayerGraph> {
        self.interlayer.values()
    }

    /// Name of the layer holding `node`, if any.
    pub fn layer_of(&self, node: NodeId) -> Option<&str> {
        self.layers
            .values()
            .find(|l| l.contains(node))
            .map(Layer::name)
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate_hemln(self)
    }
}

/// A broken structural invariant found by [`validate_hemln`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    SelfLoop {
        layer: String,
        node: NodeId,
    },
    DuplicateEdge {
        layer: String,
        edge: Edge,
    },
    EdgeEndpointMissing {
        layer: String,
        node: NodeId,
    },
    DuplicateLink {
        pair: LayerPair,
        link: Edge,
    },
    LinkEndpointMissing {
        layer: String,
        node: NodeId,
        link: Edge,
    },
    SharedNode {
        node: NodeId,
        layers: Vec<String>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SelfLoop { layer, node } => {
                write!(f, "self-loop on node {node} in layer {layer}")
            }
            Violation::DuplicateEdge { layer, edge } => {
                write!(f, "duplicate edge ({}, {}) in layer {layer}", edge.0, edge.1)
            }
            Violation::EdgeEndpointMissing { layer, node } => {
                write!(f, "edge endpoint {node} not in layer {layer}")
            }
            Violation::DuplicateLink { pair, link } => write!(
                f,
                "duplicate link ({}, {}) between {} and {}",
                link.0,
                link.1,
                pair.first(),
                pair.second()
            ),
            Violation::LinkEndpointMissing { layer, node, link } => write!(
                f,
                "link endpoint not in counterpart layer: node {node} of link ({}, {}) missing from {layer}",
                link.0, link.1
            ),
            Violation::SharedNode { node, layers } => {
                write!(f, "node id shared across layers: {node} in {}", layers.join(", "))
            }
        }
    }
}

/// Reports every invariant violation in `h`; empty iff the network is valid.
pub fn validate_hemln(h: &HeMLN) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut owners: BTreeMap<NodeId, Vec<String>> = BTreeMap::new();
    for layer in h.layers.values() {
        for id in layer.nodes() {
            owners.entry(id).or_default().push(layer.name.clone());
        }
    }
    for (node, layers) in owners {
        if layers.len() > 1 {
            out.push(Violation::SharedNode { node, layers });
        }
    }

    for layer in h.layers.values() {
        let mut seen = BTreeSet::new();
        for &(a, b) in &layer.edges {
            if a == b {
                out.push(Violation::SelfLoop {
                    layer: layer.name.clone(),
                    node: a,
                });
            }
            for v in [a, b] {
                if !layer.contains(v) {
                    out.push(Violation::EdgeEndpointMissing {
                        layer: layer.name.clone(),
                        node: v,
                    });
                }
            }
            if !seen.insert((a, b)) {
                out.push(Violation::DuplicateEdge {
                    layer: layer.name.clone(),
                    edge: (a, b),
                });
            }
        }
    }

    for (pair, g) in &h.interlayer {
        let (la, lb) = (&h.layers[g.layer_a()], &h.layers[g.layer_b()]);
        let mut seen = BTreeSet::new();
        for &link in &g.links {
            for (layer, node) in [(la, link.0), (lb, link.1)] {
                if !layer.contains(node) {
                    out.push(Violation::LinkEndpointMissing {
                        layer: layer.name.clone(),
                        node,
                        link,
                    });
                }
            }
            if !seen.insert(link) {
                out.push(Violation::DuplicateLink {
                    pair: pair.clone(),
                    link,
                });
            }
        }
    }
    out
}

/// The network viewed as a simple graph over layers: one node per layer,
/// one edge per coupled layer pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerAdjacencyGraph {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeSet<LayerPair>,
}

impl LayerAdjacencyGraph {
    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        self.edges.contains(&LayerPair::new(a, b))
    }

    /// Whether the given pairs, taken as an edge set, form one connected
    /// subgraph.
    pub fn is_connected<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> bool {
        let pairs: Vec<_> = pairs.into_iter().collect();
        let Some(&(start, _)) = pairs.first() else {
            return true;
        };
        let mut reached = BTreeSet::from([start]);
        loop {
            let before = reached.len();
            for &(a, b) in &pairs {
                if reached.contains(a) || reached.contains(b) {
                    reached.insert(a);
                    reached.insert(b);
                }
            }
            if reached.len() == before {
                break;
            }
        }
        pairs
            .iter()
            .all(|(a, b)| reached.contains(a) && reached.contains(b))
    }
}

pub fn layer_adjacency(h: &HeMLN) -> LayerAdjacencyGraph {
    LayerAdjacencyGraph {
        nodes: h.layers.keys().cloned().collect(),
        edges: h.interlayer.keys().cloned().collect(),
    }
}
