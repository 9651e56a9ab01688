//! Deterministic two-phase Louvain modularity maximization.
//!
//! Gains are compared in exact integer arithmetic: moving node `i` into
//! community `C` scores `2m·k_{i,C} − Σtot(C)·k_i`, which is the modularity
//! gain scaled by `2m²`. Nodes are visited in ascending id order and a node
//! moves only when the best neighboring community strictly beats its own,
//! ties going to the smallest community index. Resolution is fixed at 1.

use std::collections::BTreeMap;

use super::{CommunityAssignment, CommunityDetector};
use crate::network::{Layer, NodeId};

#[derive(Debug, Clone, Copy, Default)]
pub struct Louvain;

impl CommunityDetector for Louvain {
    fn detect(&self, layer: &Layer) -> CommunityAssignment {
        let levels = louvain_levels(layer);
        let last = levels.last().expect("at least the singleton level");
        CommunityAssignment::from_membership(layer, last)
            .expect("louvain partition covers every node")
    }
}

/// Partition after each level, starting with the all-singleton partition.
/// Labels are arbitrary indices.
pub fn louvain_levels(layer: &Layer) -> Vec<BTreeMap<NodeId, usize>> {
    let ids: Vec<NodeId> = layer.nodes().collect();
    let mut graph = WeightedGraph::from_layer(layer, &ids);
    // node of the current level graph that each original node maps to
    let mut assignment: Vec<usize> = (0..ids.len()).collect();
    let snapshot = |assignment: &[usize]| -> BTreeMap<NodeId, usize> {
        ids.iter()
            .copied()
            .zip(assignment.iter().copied())
            .collect()
    };
    let mut levels = vec![snapshot(&assignment)];

    if graph.total == 0 {
        return levels;
    }
    loop {
        let (community, moved) = graph.local_moves();
        if !moved {
            break;
        }
        let (quotient, renumber) = graph.aggregate(&community);
        for a in assignment.iter_mut() {
            *a = renumber[community[*a]];
        }
        levels.push(snapshot(&assignment));
        graph = quotient;
    }
    levels
}

struct WeightedGraph {
    adj: Vec<Vec<(usize, u64)>>,
    self_loops: Vec<u64>,
    degree: Vec<u64>,
    /// Sum of degrees, i.e. twice the total edge weight.
    total: u64,
}

impl WeightedGraph {
    fn from_layer(layer: &Layer, ids: &[NodeId]) -> Self {
        let index: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut adj = vec![Vec::new(); ids.len()];
        for &(a, b) in layer.edges() {
            let (ia, ib) = (index[&a], index[&b]);
            adj[ia].push((ib, 1));
            adj[ib].push((ia, 1));
        }
        Self::new(adj, vec![0; ids.len()])
    }

    fn new(adj: Vec<Vec<(usize, u64)>>, self_loops: Vec<u64>) -> Self {
        let degree: Vec<u64> = adj
            .iter()
            .zip(&self_loops)
            .map(|(row, &s)| row.iter().map(|&(_, w)| w).sum::<u64>() + 2 * s)
            .collect();
        let total = degree.iter().sum();
        WeightedGraph {
            adj,
            self_loops,
            degree,
            total,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// Repeats local-move passes until a full pass moves nothing. Returns the
    /// community of every node and whether any node moved.
    fn local_moves(&self) -> (Vec<usize>, bool) {
        let n = self.len();
        let two_m = self.total as i128;
        let mut community: Vec<usize> = (0..n).collect();
        let mut tot: Vec<u64> = self.degree.clone();
        let mut link = vec![0u64; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut any_move = false;

        loop {
            let mut moved = false;
            for i in 0..n {
                let own = community[i];
                let k_i = self.degree[i];
                tot[own] -= k_i;

                for &(j, w) in &self.adj[i] {
                    let c = community[j];
                    if link[c] == 0 {
                        touched.push(c);
                    }
                    link[c] += w;
                }

                let gain = |c: usize, link_c: u64| -> i128 {
                    two_m * link_c as i128 - tot[c] as i128 * k_i as i128
                };
                let stay = gain(own, link[own]);
                let mut best: Option<(i128, usize)> = None;
                for &c in &touched {
                    if c == own {
                        continue;
                    }
                    let g = gain(c, link[c]);
                    best = match best {
                        Some((bg, bc)) if bg > g || (bg == g && bc < c) => Some((bg, bc)),
                        _ => Some((g, c)),
                    };
                }

                let target = match best {
                    Some((g, c)) if g > stay => c,
                    _ => own,
                };
                for &c in &touched {
                    link[c] = 0;
                }
                touched.clear();

                tot[target] += k_i;
                if target != own {
                    community[i] = target;
                    moved = true;
                }
            }
            if !moved {
                break;
            }
            any_move = true;
        }
        (community, any_move)
    }

    /// Quotient graph over communities. Communities are renumbered in order
    /// of their first node.
    fn aggregate(&self, community: &[usize]) -> (WeightedGraph, Vec<usize>) {
        let mut renumber = vec![usize::MAX; self.len()];
        let mut count = 0;
        for &c in community {
            if renumber[c] == usize::MAX {
                renumber[c] = count;
                count += 1;
            }
        }
        let mut self_loops = vec![0u64; count];
        let mut weights: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); count];
        for i in 0..self.len() {
            let ci = renumber[community[i]];
            self_loops[ci] += self.self_loops[i];
            for &(j, w) in &self.adj[i] {
                let cj = renumber[community[j]];
                if ci == cj {
                    // each internal edge is seen from both ends
                    if i < j {
                        self_loops[ci] += w;
                    }
                } else {
                    *weights[ci].entry(cj).or_default() += w;
                }
            }
        }
        let adj = weights
            .into_iter()
            .map(|row| row.into_iter().collect())
            .collect();
        (WeightedGraph::new(adj, self_loops), renumber)
    }
}
