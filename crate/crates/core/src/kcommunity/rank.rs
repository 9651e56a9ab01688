use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use num_traits::Zero;

use super::{Assignments, KCommunityResult, KCommunityTuple};
use crate::coupling::Weight;
use crate::error::{Error, Result};
use crate::network::{HeMLN, InterLayerGraph, LayerPair, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Total,
    Partial,
}

pub fn classify(t: &KCommunityTuple) -> Classification {
    if t.is_total() {
        Classification::Total
    } else {
        Classification::Partial
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankKey {
    TotalFirst,
    CommunitySizeSum,
    MinDensity,
    CouplingWeightSum,
}

/// Key values of one tuple, all "larger is better".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleKeys {
    pub total: bool,
    pub community_size_sum: usize,
    /// Smallest density over non-null slots; zero when every slot is null.
    pub min_density: Ratio<u128>,
    pub coupling_weight_sum: Weight,
}

pub fn rank_keys(
    r: &KCommunityResult,
    t: &KCommunityTuple,
    assignments: &Assignments,
) -> Result<TupleKeys> {
    let mut size_sum = 0;
    let mut min_density: Option<Ratio<u128>> = None;
    for slot in t.communities.iter().filter(|s| !s.is_null()) {
        let stats = assignments
            .get(&slot.layer)
            .ok_or_else(|| Error::MissingAssignment(slot.layer.clone()))?
            .stats(slot.id)
            .ok_or_else(|| Error::UnknownCommunity {
                layer: slot.layer.clone(),
                local: slot.id,
            })?;
        size_sum += stats.size;
        let d = stats.density();
        min_density = Some(min_density.map_or(d, |m| m.min(d)));
    }

    let mut weight_sum = Weight::zero();
    for c in t.couplings.iter().filter(|c| !c.is_empty()) {
        let ends = t.community(&c.left_layer).zip(t.community(&c.right_layer));
        let edge = r
            .trace
            .get(c.step)
            .zip(ends)
            .and_then(|(s, (lc, rc))| s.cbg.meta_edge(lc, rc));
        if let Some(e) = edge {
            weight_sum += e.weight;
        }
    }

    Ok(TupleKeys {
        total: t.is_total(),
        community_size_sum: size_sum,
        min_density: min_density.unwrap_or_else(Ratio::zero),
        coupling_weight_sum: weight_sum,
    })
}

/// Tuples in descending key order; ties fall back to ascending community id
/// sequence.
pub fn rank<'a>(
    r: &'a KCommunityResult,
    key: RankKey,
    assignments: &Assignments,
) -> Result<Vec<&'a KCommunityTuple>> {
    let mut keyed = r
        .tuples
        .iter()
        .map(|t| Ok((rank_keys(r, t, assignments)?, t)))
        .collect::<Result<Vec<_>>>()?;
    keyed.sort_by(|(ka, ta), (kb, tb)| {
        let by_key = match key {
            RankKey::TotalFirst => kb.total.cmp(&ka.total),
            RankKey::CommunitySizeSum => kb.community_size_sum.cmp(&ka.community_size_sum),
            RankKey::MinDensity => kb.min_density.cmp(&ka.min_density),
            RankKey::CouplingWeightSum => kb.coupling_weight_sum.cmp(&ka.coupling_weight_sum),
        };
        match by_key {
            Ordering::Equal => ta.ids().cmp(&tb.ids()),
            o => o,
        }
    });
    Ok(keyed.into_iter().map(|(_, t)| t).collect())
}

/// Reconstructs the part of `h` a tuple describes: the induced subgraph of
/// every non-null community and the links of every non-empty coupling.
pub fn drill_down(t: &KCommunityTuple, h: &HeMLN, assignments: &Assignments) -> Result<HeMLN> {
    let mut out = HeMLN::new();
    for slot in t.communities.iter().filter(|s| !s.is_null()) {
        let layer = h
            .layer(&slot.layer)
            .ok_or_else(|| Error::UnknownLayer(slot.layer.clone()))?;
        let members = &assignments
            .get(&slot.layer)
            .ok_or_else(|| Error::MissingAssignment(slot.layer.clone()))?
            .stats(slot.id)
            .ok_or_else(|| Error::UnknownCommunity {
                layer: slot.layer.clone(),
                local: slot.id,
            })?
            .members;
        out.add_layer(layer.induced(members))?;
    }

    let mut links: BTreeMap<LayerPair, BTreeSet<(NodeId, NodeId)>> = BTreeMap::new();
    for c in &t.couplings {
        let Some(set) = &c.links else { continue };
        let pair = LayerPair::new(&c.left_layer, &c.right_layer);
        let flip = pair.first() != c.left_layer;
        let entry = links.entry(pair).or_default();
        for &(u, v) in set.iter() {
            entry.insert(if flip { (v, u) } else { (u, v) });
        }
    }
    for (pair, set) in links {
        let mut g = InterLayerGraph::new(pair.first(), pair.second());
        for (u, v) in set {
            g.add_link(u, v);
        }
        out.add_interlayer(g)?;
    }
    Ok(out)
}
