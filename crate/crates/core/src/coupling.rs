//! Community bipartite graphs, meta-edge weight metrics and maximum
//! weighted bipartite coupling (MWBC).
//!
//! MWBC is not a matching: every left meta node is paired with all right
//! meta nodes reached by its heaviest outgoing meta edge, ties included.
//! Weights are exact rationals so that ties are never lost to rounding.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::community::{CommunityAssignment, CommunityId, CommunityStats};
use crate::error::{Error, Result};
use crate::network::{HeMLN, NodeId};

pub type Weight = Ratio<u128>;

/// An inter-layer link oriented `(left node, right node)`.
pub type Link = (NodeId, NodeId);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum WeightMetric {
    /// ω_e: number of inter-community links, normalized by the largest
    /// meta edge of the graph.
    #[serde(rename = "we")]
    EdgeCount,
    /// ω_d: both community densities times the edge fraction.
    #[serde(rename = "wd")]
    DensityEdgeFraction,
    /// ω_h: participating hub ratios of both sides times the edge fraction.
    #[serde(rename = "wh")]
    HubParticipation,
}

impl WeightMetric {
    pub const ALL: [WeightMetric; 3] = [
        WeightMetric::EdgeCount,
        WeightMetric::DensityEdgeFraction,
        WeightMetric::HubParticipation,
    ];

    pub fn token(self) -> &'static str {
        match self {
            WeightMetric::EdgeCount => "we",
            WeightMetric::DensityEdgeFraction => "wd",
            WeightMetric::HubParticipation => "wh",
        }
    }
}

impl fmt::Display for WeightMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for WeightMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "we" => Ok(WeightMetric::EdgeCount),
            "wd" => Ok(WeightMetric::DensityEdgeFraction),
            "wh" => Ok(WeightMetric::HubParticipation),
            other => Err(Error::InvalidInput(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaEdge {
    pub left: u32,
    pub right: u32,
    /// The inter-layer links between the two communities, sorted.
    pub expanded: Arc<Vec<Link>>,
    pub weight: Weight,
}

/// Bipartite graph whose nodes are communities of two layers, with one meta
/// edge per community pair joined by at least one inter-layer link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityBipartiteGraph {
    left_layer: String,
    right_layer: String,
    left_set: BTreeSet<u32>,
    right_set: BTreeSet<u32>,
    /// Sorted by `(left, right)`.
    meta_edges: Vec<MetaEdge>,
}

impl CommunityBipartiteGraph {
    /// Assembles a graph from explicit parts; edges are sorted by
    /// `(left, right)`.
    pub fn from_parts(
        left_layer: impl Into<String>,
        right_layer: impl Into<String>,
        left_set: BTreeSet<u32>,
        right_set: BTreeSet<u32>,
        mut meta_edges: Vec<MetaEdge>,
    ) -> Self {
        meta_edges.sort_by_key(|e| (e.left, e.right));
        CommunityBipartiteGraph {
            left_layer: left_layer.into(),
            right_layer: right_layer.into(),
            left_set,
            right_set,
            meta_edges,
        }
    }

    pub fn left_layer(&self) -> &str {
        &self.left_layer
    }

    pub fn right_layer(&self) -> &str {
        &self.right_layer
    }

    pub fn left_set(&self) -> &BTreeSet<u32> {
        &self.left_set
    }

    pub fn right_set(&self) -> &BTreeSet<u32> {
        &self.right_set
    }

    pub fn meta_edges(&self) -> &[MetaEdge] {
        &self.meta_edges
    }

    pub fn meta_edges_mut(&mut self) -> &mut [MetaEdge] {
        &mut self.meta_edges
    }

    pub fn left_id(&self, local: u32) -> CommunityId {
        CommunityId::new(&self.left_layer, local)
    }

    pub fn right_id(&self, local: u32) -> CommunityId {
        CommunityId::new(&self.right_layer, local)
    }

    pub fn meta_edge(&self, left: u32, right: u32) -> Option<&MetaEdge> {
        self.meta_edges
            .binary_search_by_key(&(left, right), |e| (e.left, e.right))
            .ok()
            .map(|i| &self.meta_edges[i])
    }

    /// Total number of inter-layer links covered by meta edges.
    pub fn link_count(&self) -> usize {
        self.meta_edges.iter().map(|e| e.expanded.len()).sum()
    }

    pub fn weigh(
        mut self,
        metric: WeightMetric,
        left: &CommunityAssignment,
        right: &CommunityAssignment,
    ) -> Self {
        weigh_in_place(&mut self, metric, left, right);
        self
    }

    /// Tab-separated dump: `left_id right_id |expanded| weight_num weight_den`.
    pub fn to_table(&self) -> String {
        let mut out =
            String::from("# left_id\tright_id\texpanded\tweight_numerator\tweight_denominator\n");
        for e in &self.meta_edges {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                self.left_id(e.left),
                self.right_id(e.right),
                e.expanded.len(),
                e.weight.numer(),
                e.weight.denom()
            ));
        }
        out
    }
}

/// Builds the community bipartite graph between the given communities of
/// two coupled layers. Weights are left at zero.
pub fn build_cbg(
    h: &HeMLN,
    left: (&str, &BTreeSet<u32>),
    right: (&str, &BTreeSet<u32>),
    left_assignment: &CommunityAssignment,
    right_assignment: &CommunityAssignment,
) -> Result<CommunityBipartiteGraph> {
    let (left_layer, left_set) = left;
    let (right_layer, right_set) = right;
    let graph = h
        .interlayer(left_layer, right_layer)
        .ok_or_else(|| Error::LayersNotCoupled(left_layer.to_owned(), right_layer.to_owned()))?;
    for (set, a) in [(left_set, left_assignment), (right_set, right_assignment)] {
        if let Some(&bad) = set.iter().find(|c| a.stats(**c).is_none()) {
            return Err(Error::UnknownCommunity {
                layer: a.layer().to_owned(),
                local: bad,
            });
        }
    }

    let mask = |set: &BTreeSet<u32>| {
        let mut m = vec![false; set.last().map_or(0, |&c| c as usize + 1)];
        for &c in set {
            m[c as usize] = true;
        }
        m
    };
    let (left_mask, right_mask) = (mask(left_set), mask(right_set));
    let selected = |m: &[bool], c: u32| m.get(c as usize).copied().unwrap_or(false);
    let mut keyed: Vec<(u64, Link)> = graph
        .oriented(left_layer)
        .filter_map(|(u, v)| {
            let (cu, cv) = (
                left_assignment.community_of(u)?,
                right_assignment.community_of(v)?,
            );
            (selected(&left_mask, cu) && selected(&right_mask, cv))
                .then_some(((cu as u64) << 32 | cv as u64, (u, v)))
        })
        .collect();
    keyed.sort_unstable_by_key(|k| k.0);
    let meta_edges = keyed
        .chunk_by(|a, b| a.0 == b.0)
        .map(|run| {
            let mut links: Vec<Link> = run.iter().map(|k| k.1).collect();
            links.sort_unstable();
            MetaEdge {
                left: (run[0].0 >> 32) as u32,
                right: run[0].0 as u32,
                expanded: Arc::new(links),
                weight: Weight::zero(),
            }
        })
        .collect();
    Ok(CommunityBipartiteGraph {
        left_layer: left_layer.to_owned(),
        right_layer: right_layer.to_owned(),
        left_set: left_set.clone(),
        right_set: right_set.clone(),
        meta_edges,
    })
}

/// Assigns meta-edge weights under `metric`.
pub fn weigh_cbg(
    cbg: CommunityBipartiteGraph,
    metric: WeightMetric,
    left: &CommunityAssignment,
    right: &CommunityAssignment,
) -> CommunityBipartiteGraph {
    cbg.weigh(metric, left, right)
}

fn weigh_in_place(
    cbg: &mut CommunityBipartiteGraph,
    metric: WeightMetric,
    left: &CommunityAssignment,
    right: &CommunityAssignment,
) {
    let max = cbg
        .meta_edges
        .iter()
        .map(|e| e.expanded.len())
        .max()
        .unwrap_or(0);
    for e in &mut cbg.meta_edges {
        let (ls, rs) = (
            left.stats(e.left).expect("meta node has stats"),
            right.stats(e.right).expect("meta node has stats"),
        );
        e.weight = match metric {
            WeightMetric::EdgeCount => Ratio::new(e.expanded.len() as u128, max as u128),
            WeightMetric::DensityEdgeFraction => density_weight(ls, rs, e.expanded.len()),
            WeightMetric::HubParticipation => hub_weight(ls, rs, &e.expanded),
        };
    }
}

fn edge_fraction(left: &CommunityStats, right: &CommunityStats, links: usize) -> Weight {
    Ratio::new(links as u128, left.size as u128 * right.size as u128)
}

/// `density(left) · |x|/(size_l·size_r) · density(right)`
pub fn density_weight(left: &CommunityStats, right: &CommunityStats, links: usize) -> Weight {
    left.density() * edge_fraction(left, right, links) * right.density()
}

/// `|H_l→r|/|H_l| · |x|/(size_l·size_r) · |H_r→l|/|H_r|`, zero when either
/// community has no hubs.
pub fn hub_weight(left: &CommunityStats, right: &CommunityStats, expanded: &[Link]) -> Weight {
    if left.hubs.is_empty() || right.hubs.is_empty() {
        return Weight::zero();
    }
    let left_part: BTreeSet<NodeId> = expanded
        .iter()
        .map(|l| l.0)
        .filter(|v| left.hubs.contains(v))
        .collect();
    let right_part: BTreeSet<NodeId> = expanded
        .iter()
        .map(|l| l.1)
        .filter(|v| right.hubs.contains(v))
        .collect();
    Ratio::new(left_part.len() as u128, left.hubs.len() as u128)
        * edge_fraction(left, right, expanded.len())
        * Ratio::new(right_part.len() as u128, right.hubs.len() as u128)
}

/// Result of MWBC: for each left community with outgoing meta edges, the
/// right communities attaining its maximum outgoing weight.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatchPairs {
    pub pairs: BTreeMap<u32, BTreeSet<u32>>,
}

impl MatchPairs {
    pub fn get(&self, left: u32) -> Option<&BTreeSet<u32>> {
        self.pairs.get(&left)
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Number of matched left communities.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// Number of (left, right) pairs.
    pub fn pair_count(&self) -> usize {
        self.pairs.values().map(BTreeSet::len).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.pairs
            .iter()
            .flat_map(|(&l, rs)| rs.iter().map(move |&r| (l, r)))
    }
}

/// Maximum weighted bipartite coupling in a single pass over the meta edges.
pub fn mwbc(cbg: &CommunityBipartiteGraph) -> MatchPairs {
    let mut best: BTreeMap<u32, (Weight, BTreeSet<u32>)> = BTreeMap::new();
    for e in &cbg.meta_edges {
        match best.get_mut(&e.left) {
            None => {
                best.insert(e.left, (e.weight, BTreeSet::from([e.right])));
            }
            Some((w, set)) => {
                if e.weight > *w {
                    *w = e.weight;
                    set.clear();
                    set.insert(e.right);
                } else if e.weight == *w {
                    set.insert(e.right);
                }
            }
        }
    }
    MatchPairs {
        pairs: best.into_iter().map(|(l, (_, set))| (l, set)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{InterLayerGraph, Layer};

    fn edge(l: u32, r: u32, w: u128) -> MetaEdge {
        MetaEdge {
            left: l,
            right: r,
            expanded: Arc::new(vec![(NodeId(l as u64), NodeId(100 + r as u64))]),
            weight: Ratio::from_integer(w),
        }
    }

    fn graph(edges: Vec<MetaEdge>, left: &[u32], right: &[u32]) -> CommunityBipartiteGraph {
        CommunityBipartiteGraph::from_parts(
            "C",
            "D",
            left.iter().copied().collect(),
            right.iter().copied().collect(),
            edges,
        )
    }

    #[test]
    fn mwbc_ties_and_isolated() {
        let g = graph(
            vec![edge(1, 1, 3), edge(1, 2, 3), edge(2, 1, 5)],
            &[1, 2, 3],
            &[1, 2],
        );
        let mp = mwbc(&g);
        assert_eq!(mp.get(1), Some(&BTreeSet::from([1, 2])));
        assert_eq!(mp.get(2), Some(&BTreeSet::from([1])));
        assert!(mp.get(3).is_none());
        assert_eq!(mp.len(), 2);
    }

    #[test]
    fn mwbc_scale_invariant() {
        let mut g = graph(
            vec![edge(1, 1, 3), edge(1, 2, 3), edge(2, 1, 5)],
            &[1, 2, 3],
            &[1, 2],
        );
        let before = mwbc(&g);
        for e in g.meta_edges_mut() {
            e.weight *= Ratio::new(73, 10);
        }
        assert_eq!(mwbc(&g), before);
    }

    #[test]
    fn mwbc_empty() {
        assert!(mwbc(&graph(vec![], &[1], &[1])).is_empty());
    }

    #[test]
    fn mwbc_not_symmetric() {
        // c1 prefers d1, but d1 prefers c2
        let g = graph(
            vec![edge(1, 1, 2), edge(1, 2, 1), edge(2, 1, 3)],
            &[1, 2],
            &[1, 2],
        );
        let forward: BTreeSet<(u32, u32)> = mwbc(&g).iter().collect();
        let swapped = graph(
            g.meta_edges()
                .iter()
                .map(|e| MetaEdge {
                    left: e.right,
                    right: e.left,
                    ..e.clone()
                })
                .collect(),
            &[1, 2],
            &[1, 2],
        );
        let backward: BTreeSet<(u32, u32)> = mwbc(&swapped).iter().map(|(r, l)| (l, r)).collect();
        assert_eq!(forward, BTreeSet::from([(1, 1), (2, 1)]));
        assert_eq!(backward, BTreeSet::from([(2, 1), (1, 2)]));
        assert_ne!(forward, backward);
    }

    struct Fixture {
        h: HeMLN,
        a: CommunityAssignment,
        b: CommunityAssignment,
    }

    fn fixture(
        a_layer: Layer,
        a_groups: Vec<Vec<u64>>,
        b_layer: Layer,
        b_groups: Vec<Vec<u64>>,
        links: Vec<(u64, u64)>,
    ) -> Fixture {
        let a = CommunityAssignment::from_groups(&a_layer, a_groups).unwrap();
        let b = CommunityAssignment::from_groups(&b_layer, b_groups).unwrap();
        let mut h = HeMLN::new();
        h.add_layer(a_layer).unwrap();
        h.add_layer(b_layer).unwrap();
        h.add_interlayer(InterLayerGraph::from_links("A", "B", links))
            .unwrap();
        Fixture { h, a, b }
    }

    fn all(a: &CommunityAssignment) -> BTreeSet<u32> {
        a.communities().keys().copied().collect()
    }

    fn cbg(f: &Fixture) -> CommunityBipartiteGraph {
        build_cbg(&f.h, ("A", &all(&f.a)), ("B", &all(&f.b)), &f.a, &f.b).unwrap()
    }

    #[test]
    fn build_examples() {
        let f = fixture(
            Layer::from_edges("A", [1, 2], [(1, 2)]),
            vec![vec![1, 2]],
            Layer::from_edges("B", [10, 11], [(10, 11)]),
            vec![vec![10, 11]],
            vec![(1, 10), (2, 11)],
        );
        let g = cbg(&f);
        assert_eq!(g.meta_edges().len(), 1);
        assert_eq!(
            *g.meta_edges()[0].expanded,
            vec![(NodeId(1), NodeId(10)), (NodeId(2), NodeId(11))]
        );

        let f = fixture(
            Layer::from_edges("A", [1, 2, 3], [(1, 2)]),
            vec![vec![1, 2]],
            Layer::from_edges("B", [10, 11], [(10, 11)]),
            vec![vec![10, 11]],
            vec![(3, 10)],
        );
        assert!(cbg(&f).meta_edges().is_empty());

        let f = fixture(
            Layer::from_edges("A", [1, 2], [(1, 2)]),
            vec![vec![1, 2]],
            Layer::from_edges("B", [10, 11, 12, 13], [(10, 11), (12, 13)]),
            vec![vec![10, 11], vec![12, 13]],
            vec![(1, 10), (2, 13)],
        );
        assert_eq!(cbg(&f).meta_edges().len(), 2);
    }

    #[test]
    fn build_errors() {
        let f = fixture(
            Layer::from_edges("A", [1, 2], [(1, 2)]),
            vec![vec![1, 2]],
            Layer::from_edges("B", [10, 11], [(10, 11)]),
            vec![vec![10, 11]],
            vec![],
        );
        let mut h = f.h.clone();
        h.add_layer(Layer::from_edges("C", [20], [])).unwrap();
        assert!(matches!(
            build_cbg(&h, ("A", &all(&f.a)), ("C", &BTreeSet::new()), &f.a, &f.b),
            Err(Error::LayersNotCoupled(..))
        ));
        assert!(matches!(
            build_cbg(
                &f.h,
                ("A", &BTreeSet::from([7])),
                ("B", &all(&f.b)),
                &f.a,
                &f.b
            ),
            Err(Error::UnknownCommunity { .. })
        ));
    }

    #[test]
    fn density_weight_boundary() {
        let f = fixture(
            Layer::from_edges("A", [1, 2, 3], [(1, 2), (2, 3), (1, 3)]),
            vec![vec![1, 2, 3]],
            Layer::from_edges("B", [10, 11], [(10, 11)]),
            vec![vec![10, 11]],
            vec![(1, 10), (1, 11), (2, 10), (2, 11), (3, 10), (3, 11)],
        );
        let g = cbg(&f).weigh(WeightMetric::DensityEdgeFraction, &f.a, &f.b);
        assert_eq!(g.meta_edges()[0].weight, Ratio::from_integer(1));
    }

    #[test]
    fn density_weight_path() {
        let f = fixture(
            Layer::from_edges("A", [1, 2, 3], [(1, 2), (2, 3)]),
            vec![vec![1, 2, 3]],
            Layer::from_edges("B", [10, 11], [(10, 11)]),
            vec![vec![10, 11]],
            vec![(1, 10), (2, 11), (3, 10)],
        );
        let g = cbg(&f).weigh(WeightMetric::DensityEdgeFraction, &f.a, &f.b);
        assert_eq!(g.meta_edges()[0].weight, Ratio::new(1, 3));
    }

    #[test]
    fn hub_weight_path() {
        let f = fixture(
            Layer::from_edges("A", [1, 2, 3], [(1, 2), (2, 3)]),
            vec![vec![1, 2, 3]],
            Layer::from_edges("B", [10, 11], [(10, 11)]),
            vec![vec![10, 11]],
            vec![(2, 10)],
        );
        let g = cbg(&f).weigh(WeightMetric::HubParticipation, &f.a, &f.b);
        assert_eq!(g.meta_edges()[0].weight, Ratio::new(1, 12));
    }

    #[test]
    fn hub_weight_zero_for_hubless() {
        let f = fixture(
            Layer::from_edges("A", [1, 2], []),
            vec![vec![1, 2]],
            Layer::from_edges("B", [10, 11], [(10, 11)]),
            vec![vec![10, 11]],
            vec![(1, 10)],
        );
        let g = cbg(&f).weigh(WeightMetric::HubParticipation, &f.a, &f.b);
        assert!(g.meta_edges()[0].weight.is_zero());
        assert_eq!(mwbc(&g).get(1), Some(&BTreeSet::from([1])));
    }

    #[test]
    fn edge_count_normalized() {
        let f = fixture(
            Layer::from_edges("A", [1, 2], [(1, 2)]),
            vec![vec![1, 2]],
            Layer::from_edges("B", [10, 11, 12, 13], [(10, 11), (12, 13)]),
            vec![vec![10, 11], vec![12, 13]],
            vec![(1, 10), (2, 11), (1, 13)],
        );
        let g = cbg(&f).weigh(WeightMetric::EdgeCount, &f.a, &f.b);
        let w: Vec<_> = g.meta_edges().iter().map(|e| e.weight).collect();
        assert_eq!(w, vec![Ratio::from_integer(1), Ratio::new(1, 2)]);
        assert!(g.to_table().contains("A1\tB1\t2\t1\t1"));
    }

    #[test]
    fn metric_tokens() {
        for m in WeightMetric::ALL {
            assert_eq!(m.token().parse::<WeightMetric>().unwrap(), m);
        }
        assert!("wx".parse::<WeightMetric>().is_err());
    }
}
