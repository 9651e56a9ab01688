//! Synthetic planted-partition networks for benchmarking.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::network::{HeMLN, InterLayerGraph, Layer, NodeId};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub layers: usize,
    pub nodes_per_layer: usize,
    pub community_size: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub links_per_pair: usize,
    pub seed: u64,
}

impl Default for BenchmarkConfig {
    /// Three layers of 10k nodes and about 100k edges each, all pairs coupled
    /// by 50k uniform links.
    fn default() -> Self {
        BenchmarkConfig {
            layers: 3,
            nodes_per_layer: 10_000,
            community_size: 200,
            p_in: 0.09,
            p_out: 0.0002,
            links_per_pair: 50_000,
            seed: 42,
        }
    }
}

impl BenchmarkConfig {
    pub fn layer_names(&self) -> Vec<String> {
        (0..self.layers)
            .map(|i| {
                let c = (b'A' + (i % 26) as u8) as char;
                if i < 26 {
                    c.to_string()
                } else {
                    format!("{c}{}", i / 26)
                }
            })
            .collect()
    }

    /// `key=value` pairs describing the generator, for report headers.
    pub fn describe(&self) -> String {
        format!(
            "layers={} nodes_per_layer={} community_size={} p_in={} p_out={} links_per_pair={} seed={}",
            self.layers, self.nodes_per_layer, self.community_size, self.p_in, self.p_out, self.links_per_pair, self.seed
        )
    }

    /// The cyclic composition over every layer in order, closing back on the
    /// first layer when there are at least three.
    pub fn spec_text(&self, metric: &str) -> String {
        let names = self.layer_names();
        let mut s = names[0].clone();
        for w in names.windows(2) {
            s.push_str(&format!(" @({},{}) {}", w[0], w[1], w[1]));
        }
        if names.len() >= 3 {
            let (last, first) = (&names[names.len() - 1], &names[0]);
            s.push_str(&format!(" @({last},{first}) {first}"));
        }
        s.push_str(&format!(" ; {metric}"));
        s
    }
}

/// Calls `add(i, j)` for each pair `0 <= j < i < n` independently with
/// probability `p`, skipping geometrically between hits.
fn sample_pairs(n: usize, p: f64, rng: &mut impl Rng, mut add: impl FnMut(usize, usize)) {
    if p <= 0.0 || n < 2 {
        return;
    }
    if p >= 1.0 {
        for i in 1..n {
            for j in 0..i {
                add(i, j);
            }
        }
        return;
    }
    let log_q = (1.0 - p).ln();
    let (mut v, mut w): (usize, i64) = (1, -1);
    while v < n {
        let r: f64 = rng.gen();
        w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            add(v, w as usize);
        }
    }
}

/// Planted-partition layer over ids `first_id..first_id + n`. Consecutive
/// blocks of `community_size` nodes are the planted communities.
pub fn planted_partition_layer(
    name: &str,
    first_id: u64,
    cfg: &BenchmarkConfig,
    rng: &mut impl Rng,
) -> Layer {
    let n = cfg.nodes_per_layer;
    let mut layer = Layer::new(name);
    for i in 0..n {
        layer.add_node(NodeId(first_id + i as u64), None);
    }
    let id = |i: usize| NodeId(first_id + i as u64);
    sample_pairs(n, cfg.p_out, rng, |i, j| layer.add_edge(id(i), id(j)));
    // top up within-block pairs so each is present with probability p_in overall
    let extra = if cfg.p_out < 1.0 {
        (cfg.p_in - cfg.p_out).max(0.0) / (1.0 - cfg.p_out)
    } else {
        0.0
    };
    let size = cfg.community_size.max(1);
    let mut start = 0;
    while start < n {
        let len = size.min(n - start);
        sample_pairs(len, extra, rng, |i, j| {
            layer.add_edge(id(start + i), id(start + j))
        });
        start += len;
    }
    layer.simplify().expect("generator emits no self-loops");
    layer
}

/// Generates the benchmark network: planted-partition layers with disjoint
/// id ranges, every layer pair coupled by uniformly random links.
pub fn benchmark_hemln(cfg: &BenchmarkConfig) -> HeMLN {
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let names = cfg.layer_names();
    let n = cfg.nodes_per_layer as u64;
    let mut h = HeMLN::new();
    for (i, name) in names.iter().enumerate() {
        h.add_layer(planted_partition_layer(name, i as u64 * n, cfg, &mut rng))
            .expect("distinct layer names");
    }
    for a in 0..names.len() {
        for b in a + 1..names.len() {
            let mut g = InterLayerGraph::new(&names[a], &names[b]);
            for _ in 0..cfg.links_per_pair {
                let u = a as u64 * n + rng.gen_range(0..n);
                let v = b as u64 * n + rng.gen_range(0..n);
                g.add_link(NodeId(u), NodeId(v));
            }
            g.dedup();
            h.add_interlayer(g).expect("fresh layer pair");
        }
    }
    h
}
