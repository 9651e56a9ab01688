//! Subcommand implementations.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use hemln::ingest::{self, export_result, load_hemln, ExportFormat, FeatureTable, LoadReport};
use hemln::synth::{benchmark_hemln, BenchmarkConfig};
use hemln::{
    detect_communities, detect_k_community, parse_spec, validate_spec, Assignments,
    CommunityAssignment, HeMLN, KCommunityResult, KCommunitySpec, WeightMetric,
};

/// Input rejected before any computation; exits with status 2.
#[derive(Debug)]
pub struct Invalid(pub String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

/// 2 for validation failures, 1 for everything else (I/O, unreadable files).
pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<Invalid>() || cause.is::<hemln::SpecParseError>() {
            return 2;
        }
        if let Some(err) = cause.downcast_ref::<hemln::Error>() {
            return if err.is_validation() { 2 } else { 1 };
        }
    }
    1
}

/// The error chain on one line, skipping causes already spelled out by the
/// message above them.
pub fn describe(e: &anyhow::Error) -> String {
    let mut out = e.to_string();
    for cause in e.chain().skip(1) {
        let text = cause.to_string();
        if !out.contains(&text) {
            out.push_str(": ");
            out.push_str(&text);
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub spec: String,
    pub metric: Option<String>,
    pub out: PathBuf,
    pub dump_cbg: bool,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub enum BenchSource {
    Manifest(PathBuf, String),
    /// Generated network; the specification defaults to the cyclic walk over all layers.
    Generated(BenchmarkConfig, Option<String>),
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub source: BenchSource,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

fn load(manifest: &Path) -> Result<HeMLN> {
    let (h, report) = load_hemln(manifest)?;
    warn(&report);
    Ok(h)
}

fn warn(report: &LoadReport) {
    for (layer, n) in report.duplicate_edges.iter().filter(|(_, &n)| n > 0) {
        eprintln!("warning: layer {layer}: {n} duplicate edge(s) dropped");
    }
    for (layer, loops) in &report.self_loops {
        for (line, node) in loops {
            eprintln!("warning: layer {layer}: self-loop on node {node} at line {line} dropped");
        }
    }
    for ((a, b), n) in report.duplicate_links.iter().filter(|(_, &n)| n > 0) {
        eprintln!("warning: links {a}-{b}: {n} duplicate link(s) dropped");
    }
}

fn parse(text: &str, metric: Option<&str>) -> Result<KCommunitySpec> {
    let mut spec = parse_spec(text).with_context(|| format!("invalid spec {text:?}"))?;
    if let Some(m) = metric {
        spec.metric = m
            .parse::<WeightMetric>()
            .map_err(|_| Invalid(format!("unknown metric {m:?} (expected we, wd or wh)")))?;
    }
    Ok(spec)
}

fn check(spec: &KCommunitySpec, h: &HeMLN) -> Result<()> {
    let violations = validate_spec(spec, h);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Invalid(format!(
            "spec does not fit the network:\n  {}",
            violations.join("\n  ")
        ))
        .into())
    }
}

/// Runs community detection on the named layers, up to `threads` at a time.
/// Returns each layer's assignment and detection time, in input order.
fn detect_layers(
    h: &HeMLN,
    layers: &[&str],
    threads: Option<usize>,
) -> Vec<(String, CommunityAssignment, Duration)> {
    let workers = threads
        .or_else(|| thread::available_parallelism().ok().map(|n| n.get()))
        .unwrap_or(1)
        .clamp(1, layers.len().max(1));
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::with_capacity(layers.len()));
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&name) = layers.get(i) else { break };
                let layer = h.layer(name).expect("spec validated against network");
                let started = Instant::now();
                let a = detect_communities(layer);
                let took = started.elapsed();
                done.lock().unwrap().push((i, name.to_owned(), a, took));
            });
        }
    });
    let mut done = done.into_inner().unwrap();
    done.sort_by_key(|d| d.0);
    done.into_iter().map(|(_, n, a, t)| (n, a, t)).collect()
}

pub fn stats(manifest: &Path, threads: Option<usize>) -> Result<()> {
    let h = load(manifest)?;
    let names: Vec<&str> = h.layer_names().collect();
    println!("layer\tnodes\tedges\tcommunities\tavg_community_size");
    for (name, a, _) in detect_layers(&h, &names, threads) {
        let layer = h.layer(&name).unwrap();
        let count = a.communities().len();
        let members: usize = a.communities().values().map(|s| s.size).sum();
        let avg = if count == 0 {
            0.0
        } else {
            members as f64 / count as f64
        };
        println!(
            "{name}\t{}\t{}\t{count}\t{avg:.2}",
            layer.node_count(),
            layer.edge_count()
        );
    }
    Ok(())
}

struct Run {
    h: HeMLN,
    assignments: Assignments,
    result: KCommunityResult,
}

fn run(cfg: &RunConfig) -> Result<Run> {
    let spec = parse(&cfg.spec, cfg.metric.as_deref())?;
    let h = load(&cfg.manifest)?;
    check(&spec, &h)?;
    let assignments: Assignments = detect_layers(&h, &spec.layers(), cfg.threads)
        .into_iter()
        .map(|(n, a, _)| (n, a))
        .collect();
    let result = detect_k_community(&h, &spec, &assignments)?;
    Ok(Run {
        h,
        assignments,
        result,
    })
}

fn dump_cbgs(r: &KCommunityResult, out: &Path) -> Result<()> {
    for (i, step) in r.trace.iter().enumerate() {
        let path = out.join(format!(
            "cbg_step{}_{}_{}.tsv",
            i + 1,
            step.cbg.left_layer(),
            step.cbg.right_layer()
        ));
        fs::write(&path, step.cbg.to_table())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn summary(r: &KCommunityResult) -> String {
    format!(
        "k={} total={} partial={}",
        r.k,
        r.total_count(),
        r.partial_count()
    )
}

pub fn detect(cfg: &RunConfig) -> Result<()> {
    export(cfg, ExportFormat::Json)
}

pub fn export(cfg: &RunConfig, format: ExportFormat) -> Result<()> {
    let Run {
        h,
        assignments,
        result,
    } = run(cfg)?;
    export_result(&result, &h, &assignments, format, &cfg.out)?;
    if cfg.dump_cbg {
        dump_cbgs(&result, &cfg.out)?;
    }
    println!("{}", summary(&result));
    Ok(())
}

pub fn bench(cfg: &BenchConfig) -> Result<()> {
    let mut csv = String::from("# hemln bench\n");
    let (h, spec_text) = match &cfg.source {
        BenchSource::Manifest(m, s) => {
            writeln!(csv, "# manifest: {}", m.display())?;
            (load(m)?, s.clone())
        }
        BenchSource::Generated(g, s) => {
            if g.layers < 2 || g.nodes_per_layer == 0 {
                return Err(Invalid(
                    "benchmark needs at least 2 layers and 1 node per layer".into(),
                )
                .into());
            }
            writeln!(
                csv,
                "# generator: planted partition, uniform links; {}",
                g.describe()
            )?;
            (
                benchmark_hemln(g),
                s.clone().unwrap_or_else(|| g.spec_text("we")),
            )
        }
    };
    let spec = parse(&spec_text, None)?;
    check(&spec, &h)?;
    writeln!(csv, "# spec: {}", hemln::print_spec(&spec))?;
    csv.push_str("phase,name,seconds,detail\n");

    let detected = detect_layers(&h, &spec.layers(), cfg.threads);
    let mut slowest = Duration::ZERO;
    for (name, a, took) in &detected {
        slowest = slowest.max(*took);
        writeln!(
            csv,
            "detect,{name},{:.6},communities={}",
            took.as_secs_f64(),
            a.communities().len()
        )?;
    }
    let assignments: Assignments = detected.into_iter().map(|(n, a, _)| (n, a)).collect();
    let r = detect_k_community(&h, &spec, &assignments)?;
    for (i, step) in r.trace.iter().enumerate() {
        writeln!(
            csv,
            "compose,{}:{}-{},{:.6},meta_edges={};links={};matched_pairs={}",
            i + 1,
            step.cbg.left_layer(),
            step.cbg.right_layer(),
            step.elapsed.as_secs_f64(),
            step.cbg.meta_edges().len(),
            step.cbg.link_count(),
            step.matches.pair_count()
        )?;
    }
    writeln!(
        csv,
        "# composition_total={:.6} max_detect={:.6} {}",
        r.composition_time().as_secs_f64(),
        slowest.as_secs_f64(),
        summary(&r)
    )?;
    match &cfg.out {
        Some(path) => {
            fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn write_layer(layer: &hemln::Layer, name: &str, out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let nodes = out.join(format!("{name}.nodes.tsv"));
    let edges = out.join(format!("{name}.edges.tsv"));
    ingest::write_layer_files(layer, &nodes, &edges)?;
    println!(
        "layer {name}: nodes={} edges={}",
        layer.node_count(),
        layer.edge_count()
    );
    Ok(())
}

pub fn build_pearson(features: &Path, threshold: f64, name: &str, out: &Path) -> Result<()> {
    if !(-1.0..=1.0).contains(&threshold) {
        return Err(Invalid(format!("threshold {threshold} outside [-1, 1]")).into());
    }
    let table = FeatureTable::read(features)?;
    write_layer(&ingest::pearson_layer(name, &table, threshold)?, name, out)
}

pub fn build_cooccurrence(
    incidence: &Path,
    min_count: usize,
    name: &str,
    out: &Path,
) -> Result<()> {
    let rows = ingest::read_incidence(incidence)?;
    write_layer(
        &ingest::cooccurrence_layer(name, &rows, min_count)?,
        name,
        out,
    )
}

pub fn build_range(values: &Path, breakpoints: &[f64], name: &str, out: &Path) -> Result<()> {
    let values = ingest::read_values(values)?;
    write_layer(&ingest::range_layer(name, &values, breakpoints)?, name, out)
}
