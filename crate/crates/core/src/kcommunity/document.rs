//! JSON form of a k-community result.

use serde::{Deserialize, Serialize};

use super::{rank_keys, Assignments, InconsistentMatch, KCommunityResult};
use crate::dsl::print_spec;
use crate::error::Result;
use crate::network::{HeMLN, NodeId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub spec: String,
    pub k: usize,
    pub tuples: Vec<TupleDocument>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<InconsistentMatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TupleDocument {
    pub communities: Vec<SlotDocument>,
    pub couplings: Vec<CouplingDocument>,
    pub total: bool,
    pub rank: RankKeys,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotDocument {
    pub layer: String,
    pub id: u32,
}

/// `links` is `null` for an empty coupling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingDocument {
    pub step: usize,
    pub left_layer: String,
    pub right_layer: String,
    pub links: Option<Vec<LinkDocument>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkDocument {
    pub left: NodeId,
    pub right: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right_label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankKeys {
    pub community_size_sum: usize,
    pub min_density: f64,
    pub coupling_weight_sum: f64,
}

fn ratio_f64(r: num_rational::Ratio<u128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl ResultDocument {
    pub fn new(r: &KCommunityResult, h: &HeMLN, assignments: &Assignments) -> Result<Self> {
        let label =
            |layer: &str, v: NodeId| h.layer(layer).and_then(|l| l.label(v)).map(str::to_owned);
        let mut tuples = Vec::with_capacity(r.tuples.len());
        for t in &r.tuples {
            let keys = rank_keys(r, t, assignments)?;
            tuples.push(TupleDocument {
                communities: t
                    .communities
                    .iter()
                    .map(|s| SlotDocument {
                        layer: s.layer.clone(),
                        id: s.id,
                    })
                    .collect(),
                couplings: t
                    .couplings
                    .iter()
                    .map(|c| CouplingDocument {
                        step: c.step,
                        left_layer: c.left_layer.clone(),
                        right_layer: c.right_layer.clone(),
                        links: c.links.as_ref().map(|links| {
                            links
                                .iter()
                                .map(|&(u, v)| LinkDocument {
                                    left: u,
                                    right: v,
                                    left_label: label(&c.left_layer, u),
                                    right_label: label(&c.right_layer, v),
                                })
                                .collect()
                        }),
                    })
                    .collect(),
                total: keys.total,
                rank: RankKeys {
                    community_size_sum: keys.community_size_sum,
                    min_density: ratio_f64(keys.min_density),
                    coupling_weight_sum: ratio_f64(keys.coupling_weight_sum),
                },
            });
        }
        Ok(ResultDocument {
            spec: print_spec(&r.spec),
            k: r.k,
            tuples,
            diagnostics: r.diagnostics.iter().cloned().collect(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result document serializes");
        s.push('\n');
        s
    }
}
