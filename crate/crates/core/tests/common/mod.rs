//! Independent oracles and random instance generators for integration tests.
//!
//! Nothing here calls the crate's coupling, composition or Louvain code: the
//! oracles read raw layer edges, raw links and plain membership maps.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use hemln::coupling::{CommunityBipartiteGraph, MetaEdge, Weight};
use hemln::kcommunity::KCommunityTuple;
use hemln::network::{HeMLN, InterLayerGraph, Layer, NodeId};
use hemln::{Assignments, CommunityAssignment, KCommunitySpec, WeightMetric};
use num_rational::Ratio;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use std::sync::Arc;

// ---------------------------------------------------------------------------
// Exhaustive modularity oracle

/// Every set partition of `0..n` as restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..=max + 1 {
            cur.push(b);
            rec(i + 1, n, cur, max.max(b), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return vec![vec![]];
    }
    let mut cur = vec![0];
    rec(1, n, &mut cur, 0, &mut out);
    out
}

/// Modularity from the textbook double sum `1/2m Σ_ij (A_ij − k_i k_j / 2m) δ(c_i, c_j)`.
pub fn modularity_double_sum(n: usize, edges: &[(usize, usize)], labels: &[usize]) -> f64 {
    let m = edges.len() as f64;
    let mut adj = vec![vec![0.0; n]; n];
    let mut deg = vec![0.0; n];
    for &(a, b) in edges {
        adj[a][b] += 1.0;
        adj[b][a] += 1.0;
        deg[a] += 1.0;
        deg[b] += 1.0;
    }
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += adj[i][j] - deg[i] * deg[j] / (2.0 * m);
            }
        }
    }
    q / (2.0 * m)
}

/// Best modularity over all set partitions, with one optimal partition.
pub fn exhaustive_optimum(n: usize, edges: &[(usize, usize)]) -> (f64, Vec<usize>) {
    set_partitions(n)
        .into_iter()
        .map(|p| (modularity_double_sum(n, edges, &p), p))
        .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .unwrap()
}

/// Cliques of the given sizes on consecutive nodes, consecutive cliques
/// joined by one bridge between their first nodes. Returns (n, edges).
pub fn cliques_with_bridges(sizes: &[usize], bridges: bool) -> (usize, Vec<(usize, usize)>) {
    let mut edges = Vec::new();
    let mut start = 0;
    let mut firsts = Vec::new();
    for &s in sizes {
        firsts.push(start);
        for a in start..start + s {
            for b in a + 1..start + s {
                edges.push((a, b));
            }
        }
        start += s;
    }
    if bridges {
        for w in firsts.windows(2) {
            edges.push((w[0], w[1]));
        }
    }
    (start, edges)
}

pub fn layer_from_indexed(name: &str, n: usize, edges: &[(usize, usize)]) -> Layer {
    Layer::from_edges(
        name,
        (0..n as u64).map(|v| v + 1),
        edges.iter().map(|&(a, b)| (a as u64 + 1, b as u64 + 1)),
    )
}

// ---------------------------------------------------------------------------
// Exact fraction compare for the oracles

/// Fraction as (numerator, denominator); compared by cross multiplication.
#[derive(Debug, Clone, Copy)]
pub struct Frac(pub u128, pub u128);

impl Frac {
    pub fn mul(self, o: Frac) -> Frac {
        Frac(self.0 * o.0, self.1 * o.1)
    }
    pub fn cmp(self, o: Frac) -> Ordering {
        (self.0 * o.1).cmp(&(o.0 * self.1))
    }
}

// ---------------------------------------------------------------------------
// MWBC oracle

/// For each left node, scan all of its edges, find the max, then collect every
/// edge equal to it.
pub fn argmax_oracle(cbg: &CommunityBipartiteGraph) -> BTreeMap<u32, BTreeSet<u32>> {
    let mut out = BTreeMap::new();
    for &l in cbg.left_set() {
        let edges: Vec<&MetaEdge> = cbg.meta_edges().iter().filter(|e| e.left == l).collect();
        if edges.is_empty() {
            continue;
        }
        let frac = |w: &Weight| Frac(*w.numer(), *w.denom());
        let mut best = frac(&edges[0].weight);
        for e in &edges {
            if frac(&e.weight).cmp(best) == Ordering::Greater {
                best = frac(&e.weight);
            }
        }
        let set: BTreeSet<u32> = edges
            .iter()
            .filter(|e| frac(&e.weight).cmp(best) == Ordering::Equal)
            .map(|e| e.right)
            .collect();
        out.insert(l, set);
    }
    out
}

/// Random weighted CBG with up to `max_side` nodes per side. When
/// `force_ties`, some left nodes get several edges of equal weight.
pub fn random_cbg(
    rng: &mut StdRng,
    max_side: u32,
    rational: bool,
    force_ties: bool,
) -> CommunityBipartiteGraph {
    let nl = rng.gen_range(1..=max_side);
    let nr = rng.gen_range(1..=max_side);
    let density = rng.gen_range(0.05..0.6);
    let mut edges = Vec::new();
    for l in 1..=nl {
        let tie_weight = force_ties && rng.gen_bool(0.5);
        let shared = random_weight(rng, rational);
        for r in 1..=nr {
            if rng.gen_bool(density) {
                let w = if tie_weight && rng.gen_bool(0.7) {
                    shared
                } else {
                    random_weight(rng, rational)
                };
                edges.push(MetaEdge {
                    left: l,
                    right: r,
                    expanded: Arc::new(vec![(NodeId(l as u64), NodeId(10_000 + r as u64))]),
                    weight: w,
                });
            }
        }
    }
    edges.shuffle(rng);
    CommunityBipartiteGraph::from_parts("L", "R", (1..=nl).collect(), (1..=nr).collect(), edges)
}

fn random_weight(rng: &mut StdRng, rational: bool) -> Weight {
    if rational {
        Ratio::new(rng.gen_range(0..20u128), rng.gen_range(1..12u128))
    } else {
        Ratio::from_integer(rng.gen_range(0..8u128))
    }
}

// ---------------------------------------------------------------------------
// Random 3-layer networks with handcrafted assignments

pub struct Instance {
    pub h: HeMLN,
    pub assignments: Assignments,
    /// Community members per layer (size ≥ 2 only), as the generator planted them.
    pub groups: BTreeMap<String, BTreeMap<u32, BTreeSet<u64>>>,
}

pub const LAYERS: [&str; 3] = ["A", "B", "C"];

/// Random A/B/C network with up to six planted communities per layer. With
/// `connected`, every planted community contains a spanning path, as Louvain
/// communities always do.
pub fn random_instance(seed: u64, connected: bool) -> Instance {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut h = HeMLN::new();
    let mut assignments = Assignments::new();
    let mut groups_by_layer = BTreeMap::new();
    for (li, name) in LAYERS.iter().enumerate() {
        let first = 1000 * (li as u64 + 1);
        let k = rng.gen_range(1..=6);
        let mut groups: Vec<Vec<u64>> = Vec::new();
        let mut next = first;
        for _ in 0..k {
            let size = rng.gen_range(1..=5u64);
            groups.push((next..next + size).collect());
            next += size;
        }
        let mut layer = Layer::new(*name);
        for v in first..next {
            layer.add_node(NodeId(v), Some(format!("{name}-{v}")));
        }
        for g in &groups {
            let p = rng.gen_range(0.2..1.0);
            if connected {
                for w in g.windows(2) {
                    layer.add_edge(NodeId(w[0]), NodeId(w[1]));
                }
            }
            for (i, &a) in g.iter().enumerate() {
                for &b in &g[i + 1..] {
                    if rng.gen_bool(p) {
                        layer.add_edge(NodeId(a), NodeId(b));
                    }
                }
            }
        }
        // a few edges across communities of the same layer
        for _ in 0..rng.gen_range(0..4) {
            let (a, b) = (rng.gen_range(first..next), rng.gen_range(first..next));
            if a != b {
                layer.add_edge(NodeId(a), NodeId(b));
            }
        }
        layer.simplify().unwrap();
        let assignment = CommunityAssignment::from_groups(&layer, groups.clone()).unwrap();
        let planted: BTreeMap<u32, BTreeSet<u64>> = groups
            .iter()
            .enumerate()
            .filter(|(_, g)| g.len() >= 2)
            .map(|(i, g)| (i as u32 + 1, g.iter().copied().collect()))
            .collect();
        groups_by_layer.insert(name.to_string(), planted);
        assignments.insert(name.to_string(), assignment);
        h.add_layer(layer).unwrap();
    }
    for (a, b) in [("A", "B"), ("B", "C"), ("C", "A")] {
        let (la, lb) = (h.layer(a).unwrap(), h.layer(b).unwrap());
        let na: Vec<NodeId> = la.nodes().collect();
        let nb: Vec<NodeId> = lb.nodes().collect();
        let mut g = InterLayerGraph::new(a, b);
        for _ in 0..rng.gen_range(0..=30) {
            g.add_link(*na.choose(&mut rng).unwrap(), *nb.choose(&mut rng).unwrap());
        }
        g.dedup();
        h.add_interlayer(g).unwrap();
    }
    Instance {
        h,
        assignments,
        groups: groups_by_layer,
    }
}

// ---------------------------------------------------------------------------
// Recursive k-community enumerator

pub type OracleTuple = (Vec<(String, u32)>, Vec<Option<Vec<(u64, u64)>>>);

pub fn to_oracle(t: &KCommunityTuple) -> OracleTuple {
    (
        t.communities
            .iter()
            .map(|s| (s.layer.clone(), s.id))
            .collect(),
        t.couplings
            .iter()
            .map(|c| {
                c.links
                    .as_ref()
                    .map(|l| l.iter().map(|&(a, b)| (a.0, b.0)).collect())
            })
            .collect(),
    )
}

struct World<'a> {
    h: &'a HeMLN,
    groups: &'a BTreeMap<String, BTreeMap<u32, BTreeSet<u64>>>,
    metric: WeightMetric,
}

impl World<'_> {
    fn links(&self, left: &str, right: &str) -> Vec<(u64, u64)> {
        let g = self.h.interlayer(left, right).unwrap();
        g.links()
            .iter()
            .map(|&(a, b)| {
                if g.layer_a() == left {
                    (a.0, b.0)
                } else {
                    (b.0, a.0)
                }
            })
            .collect()
    }

    fn members(&self, layer: &str, c: u32) -> &BTreeSet<u64> {
        &self.groups[layer][&c]
    }

    fn expanded(&self, left: &str, c: u32, right: &str, d: u32) -> Vec<(u64, u64)> {
        let (mc, md) = (self.members(left, c), self.members(right, d));
        let mut x: Vec<(u64, u64)> = self
            .links(left, right)
            .into_iter()
            .filter(|(u, v)| mc.contains(u) && md.contains(v))
            .collect();
        x.sort();
        x
    }

    /// (internal edge count, within-degree per member)
    fn within(&self, layer: &str, c: u32) -> (u128, BTreeMap<u64, u128>) {
        let m = self.members(layer, c);
        let mut deg: BTreeMap<u64, u128> = m.iter().map(|&v| (v, 0)).collect();
        let mut e = 0;
        for &(a, b) in self.h.layer(layer).unwrap().edges() {
            if m.contains(&a.0) && m.contains(&b.0) {
                e += 1;
                *deg.get_mut(&a.0).unwrap() += 1;
                *deg.get_mut(&b.0).unwrap() += 1;
            }
        }
        (e, deg)
    }

    fn density(&self, layer: &str, c: u32) -> Frac {
        let s = self.members(layer, c).len() as u128;
        Frac(2 * self.within(layer, c).0, s * (s - 1))
    }

    fn hubs(&self, layer: &str, c: u32) -> BTreeSet<u64> {
        let (e, deg) = self.within(layer, c);
        if e == 0 {
            return BTreeSet::new();
        }
        let mean = Frac(2 * e, deg.len() as u128);
        deg.into_iter()
            .filter(|&(_, d)| Frac(d, 1).cmp(mean) != Ordering::Less)
            .map(|(v, _)| v)
            .collect()
    }

    fn weight(&self, left: &str, c: u32, right: &str, d: u32, x: &[(u64, u64)]) -> Frac {
        let (sc, sd) = (
            self.members(left, c).len() as u128,
            self.members(right, d).len() as u128,
        );
        let fraction = Frac(x.len() as u128, sc * sd);
        match self.metric {
            // argmax only needs raw counts
            WeightMetric::EdgeCount => Frac(x.len() as u128, 1),
            WeightMetric::DensityEdgeFraction => self
                .density(left, c)
                .mul(fraction)
                .mul(self.density(right, d)),
            WeightMetric::HubParticipation => {
                let (hc, hd) = (self.hubs(left, c), self.hubs(right, d));
                if hc.is_empty() || hd.is_empty() {
                    return Frac(0, 1);
                }
                let pc = x
                    .iter()
                    .map(|p| p.0)
                    .filter(|v| hc.contains(v))
                    .collect::<BTreeSet<_>>()
                    .len() as u128;
                let pd = x
                    .iter()
                    .map(|p| p.1)
                    .filter(|v| hd.contains(v))
                    .collect::<BTreeSet<_>>()
                    .len() as u128;
                Frac(pc, hc.len() as u128)
                    .mul(fraction)
                    .mul(Frac(pd, hd.len() as u128))
            }
        }
    }

    /// Right communities among `candidates` attaining `c`'s best weight.
    fn partners(
        &self,
        left: &str,
        c: u32,
        right: &str,
        candidates: &BTreeSet<u32>,
    ) -> BTreeSet<u32> {
        let scored: Vec<(u32, Frac)> = candidates
            .iter()
            .filter_map(|&d| {
                let x = self.expanded(left, c, right, d);
                (!x.is_empty()).then(|| (d, self.weight(left, c, right, d, &x)))
            })
            .collect();
        let Some(best) = scored.iter().map(|s| s.1).max_by(|a, b| a.cmp(*b)) else {
            return BTreeSet::new();
        };
        scored
            .into_iter()
            .filter(|s| s.1.cmp(best) == Ordering::Equal)
            .map(|s| s.0)
            .collect()
    }

    fn all(&self, layer: &str) -> BTreeSet<u32> {
        self.groups[layer].keys().copied().collect()
    }
}

pub fn oracle_k_community(
    h: &HeMLN,
    groups: &BTreeMap<String, BTreeMap<u32, BTreeSet<u64>>>,
    spec: &KCommunitySpec,
) -> BTreeSet<OracleTuple> {
    let w = World {
        h,
        groups,
        metric: spec.metric,
    };
    let first = &spec.steps[0];
    let mut base = BTreeSet::new();
    for c in w.all(&first.left) {
        for d in w.partners(&first.left, c, &first.right, &w.all(&first.right)) {
            base.insert((
                vec![(first.left.clone(), c), (first.right.clone(), d)],
                vec![Some(w.expanded(&first.left, c, &first.right, d))],
            ));
        }
    }
    let layers = vec![first.left.clone(), first.right.clone()];
    compose(&w, spec, 1, base, layers)
}

fn compose(
    w: &World,
    spec: &KCommunitySpec,
    i: usize,
    tuples: BTreeSet<OracleTuple>,
    mut layers: Vec<String>,
) -> BTreeSet<OracleTuple> {
    let Some(step) = spec.steps.get(i) else {
        return tuples;
    };
    let (left, right) = (step.left.as_str(), step.right.as_str());
    let li = layers.iter().position(|l| l == left).unwrap();
    let mut next = BTreeSet::new();
    match layers.iter().position(|l| l == right) {
        None => {
            let candidates = w.all(right);
            for t in &tuples {
                let c = t.0[li].1;
                let partners = if c == 0 {
                    BTreeSet::new()
                } else {
                    w.partners(left, c, right, &candidates)
                };
                if partners.is_empty() {
                    let mut u = t.clone();
                    u.0.push((right.to_owned(), 0));
                    u.1.push(None);
                    next.insert(u);
                }
                for d in partners {
                    let mut u = t.clone();
                    u.0.push((right.to_owned(), d));
                    u.1.push(Some(w.expanded(left, c, right, d)));
                    next.insert(u);
                }
            }
            layers.push(right.to_owned());
        }
        Some(ri) => {
            let candidates: BTreeSet<u32> = tuples
                .iter()
                .map(|t| t.0[ri].1)
                .filter(|&d| d != 0)
                .collect();
            for t in &tuples {
                let (c, d) = (t.0[li].1, t.0[ri].1);
                let consistent =
                    c != 0 && d != 0 && w.partners(left, c, right, &candidates).contains(&d);
                let mut u = t.clone();
                u.1.push(consistent.then(|| w.expanded(left, c, right, d)));
                next.insert(u);
            }
        }
    }
    compose(w, spec, i + 1, next, layers)
}

/// Specs exercised against the enumerator.
pub const ORACLE_SPECS: [&str; 5] = [
    "A @(A,B) B @(B,C) C",
    "C @(C,B) B @(B,A) A",
    "B @(B,A) A @(B,C) C",
    "A @(A,B) B @(B,C) C @(C,A) A",
    "B @(B,C) C @(C,A) A @(A,B) B",
];
