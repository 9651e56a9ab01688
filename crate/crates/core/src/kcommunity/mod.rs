//! Serial k-community detection: compose per-layer communities left to
//! right with MWBC, carrying the result as a set of tuples.
//!
//! Each tuple holds one community slot per distinct layer (in order of first
//! appearance, `0` for no match) and one coupling slot per composition step
//! (the expanded meta edge, or `None` for φ). A step whose right layer is
//! new extends tuples; a step between two processed layers only updates the
//! coupling slots.

mod document;
mod rank;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::community::{CommunityAssignment, CommunityId};
use crate::coupling::{build_cbg, mwbc, CommunityBipartiteGraph, Link, MatchPairs, WeightMetric};
use crate::dsl::validate_spec;
use crate::error::{Error, Result};
use crate::network::HeMLN;

pub use document::{
    CouplingDocument, LinkDocument, RankKeys, ResultDocument, SlotDocument, TupleDocument,
};
pub use rank::{classify, drill_down, rank, rank_keys, Classification, RankKey, TupleKeys};

/// Community assignments keyed by layer name.
pub type Assignments = BTreeMap<String, CommunityAssignment>;

/// One composition `left Θ right`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Step {
    pub left: String,
    pub right: String,
}

impl Step {
    pub fn new(left: impl Into<String>, right: impl Into<String>) -> Self {
        Step {
            left: left.into(),
            right: right.into(),
        }
    }
}

/// A linearized k-community expression with its weight metric.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KCommunitySpec {
    pub start_layer: String,
    pub steps: Vec<Step>,
    pub metric: WeightMetric,
}

impl KCommunitySpec {
    /// Distinct layers in order of first appearance.
    pub fn layers(&self) -> Vec<&str> {
        let mut out = vec![self.start_layer.as_str()];
        for s in &self.steps {
            for l in [&s.left, &s.right] {
                if !out.contains(&l.as_str()) {
                    out.push(l);
                }
            }
        }
        out
    }
}

/// A community slot of a tuple; `id == 0` is the null community.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub layer: String,
    pub id: u32,
}

impl Slot {
    pub fn is_null(&self) -> bool {
        self.id == 0
    }
}

/// Coupling slot for one step; `links == None` is φ.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coupling {
    pub step: usize,
    pub left_layer: String,
    pub right_layer: String,
    pub links: Option<Arc<Vec<Link>>>,
}

impl Coupling {
    pub fn is_empty(&self) -> bool {
        self.links.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KCommunityTuple {
    pub communities: Vec<Slot>,
    pub couplings: Vec<Coupling>,
}

impl KCommunityTuple {
    /// Community id held for `layer` (0 when null), or `None` if the layer
    /// has no slot.
    pub fn community(&self, layer: &str) -> Option<u32> {
        self.communities
            .iter()
            .find(|s| s.layer == layer)
            .map(|s| s.id)
    }

    pub fn is_total(&self) -> bool {
        self.communities.iter().all(|s| !s.is_null())
            && self.couplings.iter().all(|c| !c.is_empty())
    }

    pub fn ids(&self) -> Vec<u32> {
        self.communities.iter().map(|s| s.id).collect()
    }
}

/// A tuple held community `held` for the step's right layer while MWBC paired
/// its left community elsewhere.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InconsistentMatch {
    pub step: usize,
    pub left: CommunityId,
    pub held: CommunityId,
    pub matched: Vec<CommunityId>,
}

/// Per-step bookkeeping kept alongside the tuples.
#[derive(Debug, Clone)]
pub struct StepTrace {
    pub step: Step,
    pub extends: bool,
    pub cbg: CommunityBipartiteGraph,
    pub matches: MatchPairs,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct KCommunityResult {
    pub spec: KCommunitySpec,
    pub k: usize,
    pub tuples: BTreeSet<KCommunityTuple>,
    pub trace: Vec<StepTrace>,
    pub diagnostics: BTreeSet<InconsistentMatch>,
}

impl KCommunityResult {
    pub fn total_count(&self) -> usize {
        self.tuples.iter().filter(|t| t.is_total()).count()
    }

    pub fn partial_count(&self) -> usize {
        self.tuples.len() - self.total_count()
    }

    pub fn composition_time(&self) -> Duration {
        self.trace.iter().map(|s| s.elapsed).sum()
    }
}

fn assignment<'a>(assignments: &'a Assignments, layer: &str) -> Result<&'a CommunityAssignment> {
    assignments
        .get(layer)
        .ok_or_else(|| Error::MissingAssignment(layer.to_owned()))
}

fn all_communities(a: &CommunityAssignment) -> BTreeSet<u32> {
    a.communities().keys().copied().collect()
}

fn present(tuples: &BTreeSet<KCommunityTuple>, slot: usize) -> BTreeSet<u32> {
    tuples
        .iter()
        .map(|t| t.communities[slot].id)
        .filter(|&id| id != 0)
        .collect()
}

/// Runs a validated k-community spec over `h`.
pub fn detect_k_community(
    h: &HeMLN,
    spec: &KCommunitySpec,
    assignments: &Assignments,
) -> Result<KCommunityResult> {
    let violations = validate_spec(spec, h);
    if !violations.is_empty() {
        return Err(Error::InvalidSpec(violations));
    }
    for layer in spec.layers() {
        let a = assignment(assignments, layer)?;
        if a.layer() != layer {
            return Err(Error::InvalidInput(format!(
                "assignment for layer {layer} was computed on layer {}",
                a.layer()
            )));
        }
    }

    let mut order: Vec<String> = vec![spec.start_layer.clone()];
    let mut tuples: BTreeSet<KCommunityTuple> = BTreeSet::new();
    let mut trace = Vec::with_capacity(spec.steps.len());
    let mut diagnostics = BTreeSet::new();

    for (index, step) in spec.steps.iter().enumerate() {
        let started = Instant::now();
        let (la, ra) = (
            assignment(assignments, &step.left)?,
            assignment(assignments, &step.right)?,
        );
        let left_slot = order
            .iter()
            .position(|l| *l == step.left)
            .expect("validated");
        let right_slot = order.iter().position(|l| *l == step.right);
        let extends = right_slot.is_none();

        let (left_set, right_set) = if index == 0 {
            (all_communities(la), all_communities(ra))
        } else {
            let right_set = match right_slot {
                None => all_communities(ra),
                Some(slot) => present(&tuples, slot),
            };
            (present(&tuples, left_slot), right_set)
        };
        let cbg = build_cbg(
            h,
            (&step.left, &left_set),
            (&step.right, &right_set),
            la,
            ra,
        )?
        .weigh(spec.metric, la, ra);
        let matches = mwbc(&cbg);

        let coupling = |links: Option<Arc<Vec<Link>>>| Coupling {
            step: index,
            left_layer: step.left.clone(),
            right_layer: step.right.clone(),
            links,
        };
        let expanded = |l: u32, r: u32| {
            Some(Arc::clone(
                &cbg.meta_edge(l, r)
                    .expect("matched pair has a meta edge")
                    .expanded,
            ))
        };

        let mut next = BTreeSet::new();
        if index == 0 {
            for (l, r) in matches.iter() {
                next.insert(KCommunityTuple {
                    communities: vec![
                        Slot {
                            layer: step.left.clone(),
                            id: l,
                        },
                        Slot {
                            layer: step.right.clone(),
                            id: r,
                        },
                    ],
                    couplings: vec![coupling(expanded(l, r))],
                });
            }
            order.push(step.right.clone());
        } else if extends {
            for t in &tuples {
                let c = t.communities[left_slot].id;
                match matches.get(c).filter(|_| c != 0) {
                    Some(rights) => {
                        for &d in rights {
                            let mut copy = t.clone();
                            copy.communities.push(Slot {
                                layer: step.right.clone(),
                                id: d,
                            });
                            copy.couplings.push(coupling(expanded(c, d)));
                            next.insert(copy);
                        }
                    }
                    None => {
                        let mut copy = t.clone();
                        copy.communities.push(Slot {
                            layer: step.right.clone(),
                            id: 0,
                        });
                        copy.couplings.push(coupling(None));
                        next.insert(copy);
                    }
                }
            }
            order.push(step.right.clone());
        } else {
            let right_slot = right_slot.expect("processed layer");
            for t in &tuples {
                let (c, d) = (t.communities[left_slot].id, t.communities[right_slot].id);
                let matched = if c == 0 { None } else { matches.get(c) };
                let links = match matched {
                    Some(rights) if d != 0 && rights.contains(&d) => expanded(c, d),
                    Some(rights) => {
                        if d != 0 {
                            diagnostics.insert(InconsistentMatch {
                                step: index,
                                left: cbg.left_id(c),
                                held: cbg.right_id(d),
                                matched: rights.iter().map(|&r| cbg.right_id(r)).collect(),
                            });
                        }
                        None
                    }
                    None => None,
                };
                let mut copy = t.clone();
                copy.couplings.push(coupling(links));
                next.insert(copy);
            }
        }
        tuples = next;
        trace.push(StepTrace {
            step: step.clone(),
            extends: extends || index == 0,
            cbg,
            matches,
            elapsed: started.elapsed(),
        });
    }

    Ok(KCommunityResult {
        spec: spec.clone(),
        k: order.len(),
        tuples,
        trace,
        diagnostics,
    })
}
