//! Reading and writing networks and results.
//!
//! A network on disk is a JSON manifest naming one node file and one edge
//! file per layer plus one link file per coupled layer pair. Node files hold
//! `id<TAB>label` lines (label optional), edge and link files hold
//! `id<TAB>id` lines. Blank lines and lines starting with `#` are ignored.
//! Relative paths in a manifest resolve against the manifest's directory.

mod builders;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kcommunity::{drill_down, Assignments, KCommunityResult, ResultDocument};
use crate::network::{HeMLN, InterLayerGraph, Layer, NodeId};

pub use builders::{
    cooccurrence_layer, pearson, pearson_layer, range_layer, read_incidence, read_values,
    FeatureTable,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerEntry {
    pub name: String,
    pub nodes_file: PathBuf,
    pub edges_file: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterLayerEntry {
    pub layer_a: String,
    pub layer_b: String,
    pub links_file: PathBuf,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub layers: Vec<LayerEntry>,
    #[serde(default)]
    pub interlayer: Vec<InterLayerEntry>,
}

impl Manifest {
    pub fn read(path: impl AsRef<Path>) -> Result<(Manifest, PathBuf)> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_owned(),
            source: e,
        })?;
        let base = path.parent().map(Path::to_owned).unwrap_or_default();
        Ok((manifest, base))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// What the loader dropped while normalizing input.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    /// Duplicate edges removed, per layer.
    pub duplicate_edges: BTreeMap<String, usize>,
    /// Self-loop lines rejected, per layer, as `(file line, node)`.
    pub self_loops: BTreeMap<String, Vec<(usize, NodeId)>>,
    /// Duplicate links removed, per `(layer_a, layer_b)`.
    pub duplicate_links: BTreeMap<(String, String), usize>,
}

impl LoadReport {
    pub fn is_clean(&self) -> bool {
        self.duplicate_edges.values().all(|&n| n == 0)
            && self.self_loops.values().all(Vec::is_empty)
            && self.duplicate_links.values().all(|&n| n == 0)
    }
}

/// Non-comment lines of a tab-separated file with 1-based line numbers.
pub(crate) fn records(path: &Path) -> Result<Vec<(usize, Vec<String>)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i + 1, l.split('\t').map(str::to_owned).collect()))
        .collect())
}

pub(crate) fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_owned(),
        line,
        message: message.into(),
    }
}

pub(crate) fn parse_id(path: &Path, line: usize, field: &str) -> Result<NodeId> {
    field
        .trim()
        .parse::<u64>()
        .map(NodeId)
        .map_err(|_| parse_error(path, line, format!("invalid node id {field:?}")))
}

fn read_pairs(path: &Path) -> Result<Vec<(usize, NodeId, NodeId)>> {
    records(path)?
        .into_iter()
        .map(|(line, fields)| {
            if fields.len() != 2 {
                return Err(parse_error(
                    path,
                    line,
                    format!(
                        "expected 2 tab-separated ids, found {} fields",
                        fields.len()
                    ),
                ));
            }
            Ok((
                line,
                parse_id(path, line, &fields[0])?,
                parse_id(path, line, &fields[1])?,
            ))
        })
        .collect()
}

/// A parsed layer with its duplicate-edge count and rejected self-loop lines.
type LayerRead = (Layer, usize, Vec<(usize, NodeId)>);

fn read_layer(entry: &LayerEntry, base: &Path) -> Result<LayerRead> {
    let nodes_path = base.join(&entry.nodes_file);
    let mut layer = Layer::new(&entry.name);
    for (line, mut fields) in records(&nodes_path)? {
        let id = parse_id(&nodes_path, line, &fields[0])?;
        if layer.contains(id) {
            return Err(parse_error(
                &nodes_path,
                line,
                format!("duplicate node {id}"),
            ));
        }
        // labels may themselves contain tabs
        let label = (fields.len() > 1).then(|| fields.split_off(1).join("\t"));
        layer.add_node(id, label.filter(|l| !l.is_empty()));
    }

    let edges_path = base.join(&entry.edges_file);
    let mut loops = Vec::new();
    for (line, a, b) in read_pairs(&edges_path)? {
        for v in [a, b] {
            if !layer.contains(v) {
                return Err(Error::DanglingEndpoint {
                    path: edges_path.clone(),
                    line,
                    kind: "edge",
                    node: v,
                    layer: entry.name.clone(),
                });
            }
        }
        if a == b {
            loops.push((line, a));
            continue;
        }
        layer.add_edge(a, b);
    }
    let dups = layer.simplify()?;
    Ok((layer, dups, loops))
}

/// Loads, normalizes and validates the network described by a manifest file.
pub fn load_hemln(manifest_path: impl AsRef<Path>) -> Result<(HeMLN, LoadReport)> {
    let (manifest, base) = Manifest::read(manifest_path)?;
    load_manifest(&manifest, &base)
}

pub fn load_manifest(manifest: &Manifest, base: &Path) -> Result<(HeMLN, LoadReport)> {
    let mut names = BTreeSet::new();
    for l in &manifest.layers {
        if !names.insert(&l.name) {
            return Err(Error::DuplicateLayer(l.name.clone()));
        }
    }

    let loaded: Vec<Result<_>> = std::thread::scope(|s| {
        let handles: Vec<_> = manifest
            .layers
            .iter()
            .map(|entry| s.spawn(move || read_layer(entry, base)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("layer reader panicked"))
            .collect()
    });

    let mut h = HeMLN::new();
    let mut report = LoadReport::default();
    for result in loaded {
        let (layer, dups, loops) = result?;
        report.duplicate_edges.insert(layer.name().to_owned(), dups);
        report.self_loops.insert(layer.name().to_owned(), loops);
        h.add_layer(layer)?;
    }

    for entry in &manifest.interlayer {
        let path = base.join(&entry.links_file);
        let (la, lb) = match (h.layer(&entry.layer_a), h.layer(&entry.layer_b)) {
            (Some(a), Some(b)) => (a, b),
            (None, _) => return Err(Error::UnknownLayer(entry.layer_a.clone())),
            (_, None) => return Err(Error::UnknownLayer(entry.layer_b.clone())),
        };
        let mut g = InterLayerGraph::new(&entry.layer_a, &entry.layer_b);
        for (line, a, b) in read_pairs(&path)? {
            for (layer, v) in [(la, a), (lb, b)] {
                if !layer.contains(v) {
                    return Err(Error::DanglingEndpoint {
                        path: path.clone(),
                        line,
                        kind: "link",
                        node: v,
                        layer: layer.name().to_owned(),
                    });
                }
            }
            g.add_link(a, b);
        }
        let dups = g.dedup();
        report
            .duplicate_links
            .insert((entry.layer_a.clone(), entry.layer_b.clone()), dups);
        h.add_interlayer(g)?;
    }

    let violations = h.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidNetwork(
            violations.iter().map(ToString::to_string).collect(),
        ));
    }
    Ok((h, report))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_layer_files(layer: &Layer, nodes_path: &Path, edges_path: &Path) -> Result<()> {
    let mut nodes = String::new();
    for (id, label) in layer.labeled_nodes() {
        match label {
            Some(l) => nodes.push_str(&format!("{id}\t{l}\n")),
            None => nodes.push_str(&format!("{id}\n")),
        }
    }
    let mut edges = String::new();
    for (a, b) in layer.edges() {
        edges.push_str(&format!("{a}\t{b}\n"));
    }
    write_file(nodes_path, &nodes)?;
    write_file(edges_path, &edges)
}

/// Writes `h` as a manifest plus edge-list files into `dir` and returns the
/// manifest path.
pub fn write_hemln(h: &HeMLN, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = Manifest::default();
    for layer in h.layers() {
        let entry = LayerEntry {
            name: layer.name().to_owned(),
            nodes_file: format!("{}.nodes.tsv", layer.name()).into(),
            edges_file: format!("{}.edges.tsv", layer.name()).into(),
        };
        write_layer_files(
            layer,
            &dir.join(&entry.nodes_file),
            &dir.join(&entry.edges_file),
        )?;
        manifest.layers.push(entry);
    }
    for g in h.interlayers() {
        let entry = InterLayerEntry {
            layer_a: g.layer_a().to_owned(),
            layer_b: g.layer_b().to_owned(),
            links_file: format!("{}__{}.links.tsv", g.layer_a(), g.layer_b()).into(),
        };
        let mut text = String::new();
        for (a, b) in g.links() {
            text.push_str(&format!("{a}\t{b}\n"));
        }
        write_file(&dir.join(&entry.links_file), &text)?;
        manifest.interlayer.push(entry);
    }
    let path = dir.join("manifest.json");
    manifest.write(&path)?;
    Ok(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    EdgeLists,
}

/// Writes a result into `dir`: `result.json`, or one drill-down network
/// directory per tuple. Returns the paths written.
pub fn export_result(
    r: &KCommunityResult,
    h: &HeMLN,
    assignments: &Assignments,
    format: ExportFormat,
    dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    match format {
        ExportFormat::Json => {
            let path = dir.join("result.json");
            write_file(&path, &ResultDocument::new(r, h, assignments)?.to_json())?;
            Ok(vec![path])
        }
        ExportFormat::EdgeLists => r
            .tuples
            .iter()
            .enumerate()
            .map(|(i, t)| {
                write_hemln(
                    &drill_down(t, h, assignments)?,
                    dir.join(format!("tuple_{i:04}")),
                )
            })
            .collect(),
    }
}
