//! Layer construction from raw entity data.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::path::Path;

use super::{parse_error, parse_id, records};
use crate::error::{Error, Result};
use crate::network::{Layer, NodeId};

/// Per-node feature vectors of a common dimension.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureTable {
    pub rows: BTreeMap<NodeId, Vec<f64>>,
}

impl FeatureTable {
    /// Reads `id<TAB>v1<TAB>v2...` lines.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut rows = BTreeMap::new();
        for (line, fields) in records(path)? {
            let id = parse_id(path, line, &fields[0])?;
            let values = fields[1..]
                .iter()
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|_| parse_error(path, line, format!("invalid number {f:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.insert(id, values);
        }
        Ok(FeatureTable { rows })
    }

    fn dimension(&self) -> Result<usize> {
        let mut dims = self.rows.iter().map(|(id, v)| (id, v.len()));
        let Some((_, dim)) = dims.next() else {
            return Ok(0);
        };
        if let Some((&node, got)) = dims.find(|(_, d)| *d != dim) {
            return Err(Error::DimensionMismatch {
                node,
                expected: dim,
                got,
            });
        }
        Ok(dim)
    }
}

/// Sample Pearson correlation, two-pass. `None` when either vector has zero
/// variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    debug_assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Similarity layer: nodes are the table rows, with an edge wherever the
/// Pearson correlation of two rows is at least `threshold`.
pub fn pearson_layer(name: &str, table: &FeatureTable, threshold: f64) -> Result<Layer> {
    if table.rows.len() < 2 {
        return Err(Error::InvalidInput(
            "pearson layer needs at least two rows".into(),
        ));
    }
    let dim = table.dimension()?;
    if dim < 2 {
        return Err(Error::InvalidInput(format!(
            "feature vectors need dimension at least 2, got {dim}"
        )));
    }
    let rows: Vec<(NodeId, &Vec<f64>)> = table.rows.iter().map(|(&id, v)| (id, v)).collect();
    let mut layer = Layer::new(name);
    for &(id, _) in &rows {
        layer.add_node(id, None);
    }
    for (i, (u, xu)) in rows.iter().enumerate() {
        for (v, xv) in &rows[i + 1..] {
            if pearson(xu, xv).is_some_and(|r| r >= threshold) {
                layer.add_edge(*u, *v);
            }
        }
    }
    Ok(layer)
}

/// Co-occurrence layer: an edge joins two entities that share at least
/// `min_count` events.
pub fn cooccurrence_layer(
    name: &str,
    incidence: &[(NodeId, u64)],
    min_count: usize,
) -> Result<Layer> {
    if min_count == 0 {
        return Err(Error::InvalidInput("min_count must be positive".into()));
    }
    let mut events: BTreeMap<u64, Vec<NodeId>> = BTreeMap::new();
    let mut layer = Layer::new(name);
    for &(entity, event) in incidence {
        layer.add_node(entity, None);
        events.entry(event).or_default().push(entity);
    }
    let mut shared: BTreeMap<(NodeId, NodeId), usize> = BTreeMap::new();
    for members in events.values_mut() {
        members.sort_unstable();
        members.dedup();
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                *shared.entry((a, b)).or_default() += 1;
            }
        }
    }
    for ((a, b), n) in shared {
        if n >= min_count {
            layer.add_edge(a, b);
        }
    }
    Ok(layer)
}

/// Range layer: values are binned into `[b_i, b_{i+1})` (the last bin closed)
/// and every bin becomes a clique.
pub fn range_layer(
    name: &str,
    values: &BTreeMap<NodeId, f64>,
    breakpoints: &[f64],
) -> Result<Layer> {
    if breakpoints.len() < 2
        || breakpoints
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less))
    {
        return Err(Error::InvalidInput(
            "breakpoints must be at least two strictly ascending values".into(),
        ));
    }
    let (lo, hi) = (breakpoints[0], breakpoints[breakpoints.len() - 1]);
    let last_bin = breakpoints.len() - 2;
    let mut bins: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
    let mut layer = Layer::new(name);
    for (&node, &value) in values {
        if !(lo..=hi).contains(&value) {
            return Err(Error::OutOfRange {
                node,
                value,
                lo,
                hi,
            });
        }
        let bin = (breakpoints.partition_point(|&b| b <= value) - 1).min(last_bin);
        bins.entry(bin).or_default().push(node);
        layer.add_node(node, None);
    }
    for members in bins.values() {
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                layer.add_edge(a, b);
            }
        }
    }
    Ok(layer)
}

/// Reads `entity<TAB>event` lines.
pub fn read_incidence(path: impl AsRef<Path>) -> Result<Vec<(NodeId, u64)>> {
    let path = path.as_ref();
    records(path)?
        .into_iter()
        .map(|(line, f)| {
            if f.len() != 2 {
                return Err(parse_error(path, line, "expected entity<TAB>event"));
            }
            let event = f[1]
                .trim()
                .parse::<u64>()
                .map_err(|_| parse_error(path, line, format!("invalid event id {:?}", f[1])))?;
            Ok((parse_id(path, line, &f[0])?, event))
        })
        .collect()
}

/// Reads `id<TAB>value` lines.
pub fn read_values(path: impl AsRef<Path>) -> Result<BTreeMap<NodeId, f64>> {
    let path = path.as_ref();
    records(path)?
        .into_iter()
        .map(|(line, f)| {
            if f.len() != 2 {
                return Err(parse_error(path, line, "expected id<TAB>value"));
            }
            let v = f[1]
                .trim()
                .parse::<f64>()
                .map_err(|_| parse_error(path, line, format!("invalid number {:?}", f[1])))?;
            Ok((parse_id(path, line, &f[0])?, v))
        })
        .collect()
}
