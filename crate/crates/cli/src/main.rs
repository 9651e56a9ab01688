use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Community analysis of heterogeneous multilayer networks.
#[derive(Debug, Parser)]
#[command(name = "hemln", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-layer node, edge and community counts.
    Stats {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        threads: Threads,
    },
    /// Run a k-community specification and write result.json.
    Detect(RunArgs),
    /// Run a specification and export the result in the chosen format.
    Export {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Time per-layer detection and each composition step; prints CSV.
    Bench(BenchArgs),
    /// Build a layer from raw entity data and write its node and edge files.
    BuildLayer {
        #[command(subcommand)]
        kind: LayerKind,
    },
}

#[derive(Debug, Args)]
struct Threads {
    /// Worker threads for per-layer community detection (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Specification text, e.g. "A @(A,B) B @(B,C) C ; we".
    #[arg(long)]
    spec: String,
    /// Replace the specification's weight metric.
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    out: PathBuf,
    /// Also write each step's community bipartite graph as a TSV table.
    #[arg(long)]
    dump_cbg: bool,
    #[command(flatten)]
    threads: Threads,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    EdgeLists,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Benchmark an existing network instead of generating one.
    #[arg(long, requires = "spec")]
    manifest: Option<PathBuf>,
    #[arg(long)]
    spec: Option<String>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    threads: Threads,
    /// Generator seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    layers: usize,
    #[arg(long, default_value_t = 10_000)]
    nodes: usize,
    #[arg(long, default_value_t = 200)]
    community_size: usize,
    #[arg(long, default_value_t = 0.09)]
    p_in: f64,
    #[arg(long, default_value_t = 0.0002)]
    p_out: f64,
    #[arg(long, default_value_t = 50_000)]
    links: usize,
}

#[derive(Debug, Subcommand)]
enum LayerKind {
    /// Edge where the Pearson correlation of two feature rows reaches the threshold.
    Pearson {
        /// Lines of `id<TAB>v1<TAB>v2...`.
        #[arg(long)]
        features: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        threshold: f64,
        #[command(flatten)]
        target: LayerTarget,
    },
    /// Edge between entities sharing at least `min-count` events.
    Cooccur {
        /// Lines of `entity<TAB>event`.
        #[arg(long)]
        incidence: PathBuf,
        #[arg(long)]
        min_count: usize,
        #[command(flatten)]
        target: LayerTarget,
    },
    /// Clique per value range.
    Range {
        /// Lines of `id<TAB>value`.
        #[arg(long)]
        values: PathBuf,
        /// Comma separated ascending bin edges, e.g. 0,1,2,3.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        breakpoints: Vec<f64>,
        #[command(flatten)]
        target: LayerTarget,
    },
}

#[derive(Debug, Args)]
struct LayerTarget {
    #[arg(long)]
    name: String,
    /// Directory for `<name>.nodes.tsv` and `<name>.edges.tsv`.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Stats { manifest, threads } => commands::stats(&manifest, threads.threads),
        Command::Detect(run) => commands::detect(&run.into()),
        Command::Export { run, format } => {
            let format = match format {
                Format::Json => hemln::ingest::ExportFormat::Json,
                Format::EdgeLists => hemln::ingest::ExportFormat::EdgeLists,
            };
            commands::export(&run.into(), format)
        }
        Command::Bench(b) => commands::bench(&b.into()),
        Command::BuildLayer { kind } => match kind {
            LayerKind::Pearson {
                features,
                threshold,
                target,
            } => commands::build_pearson(&features, threshold, &target.name, &target.out),
            LayerKind::Cooccur {
                incidence,
                min_count,
                target,
            } => commands::build_cooccurrence(&incidence, min_count, &target.name, &target.out),
            LayerKind::Range {
                values,
                breakpoints,
                target,
            } => commands::build_range(&values, &breakpoints, &target.name, &target.out),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", commands::describe(&e));
            ExitCode::from(commands::exit_code(&e))
        }
    }
}

impl From<RunArgs> for commands::RunConfig {
    fn from(a: RunArgs) -> Self {
        commands::RunConfig {
            manifest: a.manifest,
            spec: a.spec,
            metric: a.metric,
            out: a.out,
            dump_cbg: a.dump_cbg,
            threads: a.threads.threads,
        }
    }
}

impl From<BenchArgs> for commands::BenchConfig {
    fn from(b: BenchArgs) -> Self {
        commands::BenchConfig {
            source: match (b.manifest, b.spec) {
                (Some(m), Some(s)) => commands::BenchSource::Manifest(m, s),
                (_, spec) => commands::BenchSource::Generated(
                    hemln::synth::BenchmarkConfig {
                        layers: b.layers,
                        nodes_per_layer: b.nodes,
                        community_size: b.community_size,
                        p_in: b.p_in,
                        p_out: b.p_out,
                        links_per_pair: b.links,
                        seed: b.seed,
                    },
                    spec,
                ),
            },
            out: b.out,
            threads: b.threads.threads,
        }
    }
}
