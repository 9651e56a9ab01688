//! Per-layer community detection and community statistics.

mod louvain;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Layer, NodeId};

pub use louvain::{louvain_levels, Louvain};

/// A community of one layer. Local ids are dense `1..=k`; `0` is reserved
/// for the null community in result tuples.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CommunityId {
    pub layer: String,
    pub local: u32,
}

impl CommunityId {
    pub fn new(layer: impl Into<String>, local: u32) -> Self {
        CommunityId {
            layer: layer.into(),
            local,
        }
    }
}

impl fmt::Display for CommunityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.layer, self.local)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityStats {
    pub size: usize,
    pub internal_edges: usize,
    pub members: BTreeSet<NodeId>,
    pub hubs: BTreeSet<NodeId>,
}

impl CommunityStats {
    /// `2·edges / (size·(size−1))`, exact.
    pub fn density(&self) -> Ratio<u128> {
        let n = self.size as u128;
        Ratio::new(2 * self.internal_edges as u128, n * (n - 1))
    }

    pub fn density_f64(&self) -> f64 {
        let n = self.size as f64;
        2.0 * self.internal_edges as f64 / (n * (n - 1.0))
    }
}

/// Output of a community detector for one layer: a partition of the layer's
/// nodes plus statistics for every community with at least two members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityAssignment {
    layer: String,
    membership: BTreeMap<NodeId, u32>,
    communities: BTreeMap<u32, CommunityStats>,
    dense: Option<DenseIndex>,
}

/// Flat lookup table for layers whose ids fill most of a contiguous range;
/// 0 marks ids outside the layer.
#[derive(Debug, Clone, PartialEq, Eq)]
struct DenseIndex {
    base: u64,
    table: Vec<u32>,
}

impl DenseIndex {
    fn build(membership: &BTreeMap<NodeId, u32>) -> Option<Self> {
        let (lo, hi) = (
            membership.keys().next()?.0,
            membership.keys().next_back()?.0,
        );
        let span = usize::try_from(hi - lo).ok()?.checked_add(1)?;
        if span > 4 * membership.len() + 64 {
            return None;
        }
        let mut table = vec![0; span];
        for (v, &c) in membership {
            table[(v.0 - lo) as usize] = c;
        }
        Some(DenseIndex { base: lo, table })
    }
}

impl CommunityAssignment {
    /// Builds an assignment from arbitrary partition labels. Communities are
    /// numbered `1..=k` in order of their smallest member.
    pub fn from_membership<P: Ord>(layer: &Layer, labels: &BTreeMap<NodeId, P>) -> Result<Self> {
        let mut renumber: BTreeMap<&P, u32> = BTreeMap::new();
        let mut membership = BTreeMap::new();
        for v in layer.nodes() {
            let label = labels.get(&v).ok_or(Error::PartialPartition(v))?;
            let next = renumber.len() as u32 + 1;
            let local = *renumber.entry(label).or_insert(next);
            membership.insert(v, local);
        }
        if let Some(stray) = labels.keys().find(|v| !layer.contains(**v)) {
            return Err(Error::NodeNotInLayer {
                layer: layer.name().to_owned(),
                node: *stray,
            });
        }
        Ok(Self::with_membership(layer, membership))
    }

    /// Builds an assignment from explicit groups. Group `i` gets local id
    /// `i + 1`; nodes outside every group become singletons numbered after
    /// the groups in ascending node order.
    pub fn from_groups<G, I>(layer: &Layer, groups: G) -> Result<Self>
    where
        G: IntoIterator<Item = I>,
        I: IntoIterator<Item = u64>,
    {
        let mut membership = BTreeMap::new();
        let mut next = 1u32;
        for group in groups {
            for v in group {
                let v = NodeId(v);
                if !layer.contains(v) {
                    return Err(Error::NodeNotInLayer {
                        layer: layer.name().to_owned(),
                        node: v,
                    });
                }
                if membership.insert(v, next).is_some_and(|prev| prev != next) {
                    return Err(Error::OverlappingCommunities {
                        layer: layer.name().to_owned(),
                        node: v,
                    });
                }
            }
            next += 1;
        }
        for v in layer.nodes() {
            if let std::collections::btree_map::Entry::Vacant(e) = membership.entry(v) {
                e.insert(next);
                next += 1;
            }
        }
        Ok(Self::with_membership(layer, membership))
    }

    fn with_membership(layer: &Layer, membership: BTreeMap<NodeId, u32>) -> Self {
        let communities = compute_stats(layer, &membership);
        CommunityAssignment {
            layer: layer.name().to_owned(),
            dense: DenseIndex::build(&membership),
            membership,
            communities,
        }
    }

    pub fn layer(&self) -> &str {
        &self.layer
    }

    pub fn membership(&self) -> &BTreeMap<NodeId, u32> {
        &self.membership
    }

    pub fn community_of(&self, v: NodeId) -> Option<u32> {
        match &self.dense {
            Some(d) => {
                let c = *d
                    .table
                    .get(usize::try_from(v.0.checked_sub(d.base)?).ok()?)?;
                (c != 0).then_some(c)
            }
            None => self.membership.get(&v).copied(),
        }
    }

    /// Stats of communities with at least two members, keyed by local id.
    pub fn communities(&self) -> &BTreeMap<u32, CommunityStats> {
        &self.communities
    }

    pub fn stats(&self, local: u32) -> Option<&CommunityStats> {
        self.communities.get(&local)
    }

    /// Total number of communities, singletons included.
    pub fn community_count(&self) -> usize {
        self.membership.values().collect::<BTreeSet<_>>().len()
    }
}

/// Pluggable per-layer community detection.
pub trait CommunityDetector: Sync {
    fn detect(&self, layer: &Layer) -> CommunityAssignment;
}

impl<F> CommunityDetector for F
where
    F: Fn(&Layer) -> CommunityAssignment + Sync,
{
    fn detect(&self, layer: &Layer) -> CommunityAssignment {
        self(layer)
    }
}

/// Detects communities with the built-in deterministic Louvain procedure.
pub fn detect_communities(layer: &Layer) -> CommunityAssignment {
    Louvain.detect(layer)
}

/// Newman modularity of `partition` over `layer`.
pub fn modularity<P: Ord>(layer: &Layer, partition: &BTreeMap<NodeId, P>) -> Result<f64> {
    let m = layer.edge_count() as i128;
    if m == 0 {
        return Err(Error::EdgelessModularity);
    }
    let mut index: BTreeMap<&P, usize> = BTreeMap::new();
    let mut of = BTreeMap::new();
    for v in layer.nodes() {
        let p = partition.get(&v).ok_or(Error::PartialPartition(v))?;
        let next = index.len();
        of.insert(v, *index.entry(p).or_insert(next));
    }
    let mut internal = vec![0i128; index.len()];
    let mut degree = vec![0i128; index.len()];
    for &(a, b) in layer.edges() {
        let (ca, cb) = (of[&a], of[&b]);
        degree[ca] += 1;
        degree[cb] += 1;
        if ca == cb {
            internal[ca] += 1;
        }
    }
    // Q = Σ (4m·l_c − d_c²) / 4m²
    let num: i128 = internal
        .iter()
        .zip(&degree)
        .map(|(&l, &d)| 4 * m * l - d * d)
        .sum();
    Ok(num as f64 / (4 * m * m) as f64)
}

/// Statistics of the node set `c` within `layer`.
pub fn community_stats(layer: &Layer, c: &BTreeSet<NodeId>) -> Result<CommunityStats> {
    if c.len() < 2 {
        return Err(Error::SingletonStats);
    }
    if let Some(v) = c.iter().find(|v| !layer.contains(**v)) {
        return Err(Error::NodeNotInLayer {
            layer: layer.name().to_owned(),
            node: *v,
        });
    }
    let (internal_edges, within) = within_degrees(layer, c);
    Ok(CommunityStats {
        size: c.len(),
        internal_edges,
        members: c.clone(),
        hubs: hub_rule(&within, internal_edges),
    })
}

/// Members whose within-community degree is at least the community mean.
/// Communities without internal edges have no hubs.
pub fn hubs(layer: &Layer, c: &BTreeSet<NodeId>) -> BTreeSet<NodeId> {
    let (internal_edges, within) = within_degrees(layer, c);
    hub_rule(&within, internal_edges)
}

fn within_degrees(layer: &Layer, c: &BTreeSet<NodeId>) -> (usize, BTreeMap<NodeId, usize>) {
    let mut within: BTreeMap<NodeId, usize> = c.iter().map(|&v| (v, 0)).collect();
    let mut internal = 0;
    for &(a, b) in layer.edges() {
        if c.contains(&a) && c.contains(&b) {
            internal += 1;
            *within.get_mut(&a).unwrap() += 1;
            *within.get_mut(&b).unwrap() += 1;
        }
    }
    (internal, within)
}

// deg ≥ mean  ⇔  deg·size ≥ 2·edges
fn hub_rule(within: &BTreeMap<NodeId, usize>, internal_edges: usize) -> BTreeSet<NodeId> {
    if internal_edges == 0 {
        return BTreeSet::new();
    }
    let size = within.len();
    within
        .iter()
        .filter(|(_, &d)| d * size >= 2 * internal_edges)
        .map(|(&v, _)| v)
        .collect()
}

fn compute_stats(
    layer: &Layer,
    membership: &BTreeMap<NodeId, u32>,
) -> BTreeMap<u32, CommunityStats> {
    let mut members: BTreeMap<u32, BTreeSet<NodeId>> = BTreeMap::new();
    for (&v, &c) in membership {
        members.entry(c).or_default().insert(v);
    }
    members.retain(|_, m| m.len() >= 2);

    let mut within: BTreeMap<NodeId, usize> = BTreeMap::new();
    let mut internal: BTreeMap<u32, usize> = BTreeMap::new();
    for &(a, b) in layer.edges() {
        let (ca, cb) = (membership[&a], membership[&b]);
        if ca == cb && members.contains_key(&ca) {
            *internal.entry(ca).or_default() += 1;
            *within.entry(a).or_default() += 1;
            *within.entry(b).or_default() += 1;
        }
    }

    members
        .into_iter()
        .map(|(c, m)| {
            let edges = internal.get(&c).copied().unwrap_or(0);
            let degrees: BTreeMap<NodeId, usize> = m
                .iter()
                .map(|v| (*v, within.get(v).copied().unwrap_or(0)))
                .collect();
            let stats = CommunityStats {
                size: m.len(),
                internal_edges: edges,
                hubs: hub_rule(&degrees, edges),
                members: m,
            };
            (c, stats)
        })
        .collect()
}
