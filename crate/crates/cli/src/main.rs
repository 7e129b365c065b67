//! Command-line driver for the mapper pipeline.
//!
//! Stages communicate only through files, so each is independently
//! scriptable and cacheable. Exit codes: 0 success, 2 input/validation,
//! 3 network, 4 internal consistency.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fairmap_core::Error;

#[derive(Parser)]
#[command(
    name = "fairmap",
    version,
    about = "Topological summaries of embedding point clouds"
)]
struct Cli {
    /// Seed for synthetic fixture generation (the analysis pipeline itself
    /// is deterministic and seed-free).
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Worker threads for clustering and nerve checks; 0 uses all cores.
    /// Any value produces identical outputs.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed a corpus through an embeddings endpoint (cache-first).
    Embed(EmbedArgs),
    /// Build the lens direction from concept-pair embeddings.
    Direction(DirectionArgs),
    /// Run lens -> cover -> clustering -> nerve and write the graph file.
    Map(MapArgs),
    /// Report components, Betti numbers and label separation for a graph.
    Analyze(AnalyzeArgs),
    /// Render a graph file to DOT or a standalone HTML report.
    Render(RenderArgs),
    /// Generate a synthetic fixture dataset.
    GenFixture(GenFixtureArgs),
    /// Print the built-in concept table.
    Concepts(ConceptsArgs),
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Endpoint base URL (POST {url}/embeddings).
    #[arg(long)]
    endpoint: String,
    #[arg(long)]
    model: String,
    #[arg(long, default_value = ".fairmap-cache")]
    cache: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = EmbedFormat::Bin)]
    format: EmbedFormat,
    #[arg(long, default_value_t = 64)]
    batch_size: usize,
    #[arg(long, default_value_t = 4)]
    max_concurrent: usize,
    /// Attempts per batch before giving up.
    #[arg(long, default_value_t = 3)]
    retries: usize,
    /// Environment variable holding the bearer token (never logged).
    #[arg(long, default_value = "EMBEDDINGS_API_KEY")]
    token_env: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmbedFormat {
    Bin,
    Txt,
}

#[derive(Args)]
struct DirectionArgs {
    /// Embedding file whose record ids are the exact concept sentences.
    #[arg(long)]
    embeddings: PathBuf,
    /// Concept table file (name<TAB>positive<TAB>negative).
    #[arg(long, conflicts_with = "builtin")]
    concepts: Option<PathBuf>,
    /// Built-in table variant.
    #[arg(long, value_enum, default_value_t = BuiltinTable::Default)]
    builtin: BuiltinTable,
    /// Unit-normalize each concept embedding before the signed sum.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    normalize_concepts: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum BuiltinTable {
    /// Source sentence list verbatim (including the `respondible` spelling).
    Default,
    /// Same list with the spelling corrected.
    Corrected,
}

#[derive(Args)]
struct MapArgs {
    #[arg(long)]
    embeddings: PathBuf,
    /// Direction file produced by `direction` or `gen-fixture`.
    #[arg(long)]
    direction: PathBuf,
    #[arg(long, default_value_t = 15)]
    intervals: usize,
    /// Overlap fraction in [0, 0.95).
    #[arg(long, default_value_t = 0.4)]
    overlap: f64,
    #[arg(long, value_enum, default_value_t = Clusterer::SingleLinkageGap)]
    clusterer: Clusterer,
    /// Histogram bins for the single-linkage gap heuristic.
    #[arg(long, default_value_t = 10)]
    bins: usize,
    /// DBSCAN radius (required with --clusterer dbscan).
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 3)]
    min_pts: usize,
    #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
    metric: MetricArg,
    /// Highest simplex dimension to record (1..=3).
    #[arg(long, default_value_t = 1)]
    max_dim: usize,
    /// Scale points to unit norm before clustering.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    normalize_points: bool,
    /// Pin the color scale to [-1, 1] instead of the observed range.
    #[arg(long)]
    pinned_scale: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Clusterer {
    SingleLinkageGap,
    Dbscan,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Euclidean,
    /// 1 - cosine similarity.
    Cosine,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Corpus file supplying the labels.
    #[arg(long)]
    corpus: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum)]
    format: RenderFormat,
    /// `default` normalizes colors to the observed node means; `pinned`
    /// pins the scale to [-1, 1] for cross-run comparability.
    #[arg(long, value_enum, default_value_t = ColormapArg::Default)]
    colormap: ColormapArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderFormat {
    Dot,
    Html,
}

#[derive(Clone, Copy, ValueEnum)]
enum ColormapArg {
    Default,
    Pinned,
}

#[derive(Args)]
struct GenFixtureArgs {
    #[arg(long, value_enum)]
    kind: FixtureKind,
    /// Points for circle fixtures, points per blob for two-blob fixtures.
    #[arg(long)]
    points: Option<usize>,
    /// Gaussian noise sigma for circle fixtures.
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    /// Ambient dimension for two-blob fixtures.
    #[arg(long, default_value_t = 64)]
    dim: usize,
    /// Center offset along the separation axis for two-blob fixtures.
    #[arg(long, default_value_t = 4.0)]
    separation: f64,
    /// Embedding file to write.
    #[arg(long)]
    out: PathBuf,
    /// Also write a labeled corpus file.
    #[arg(long)]
    corpus_out: Option<PathBuf>,
    /// Also write the natural lens direction file.
    #[arg(long)]
    direction_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = EmbedFormat::Txt)]
    format: EmbedFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum FixtureKind {
    Circle,
    TwoBlob,
}

#[derive(Args)]
struct ConceptsArgs {
    /// Print the spelling-corrected variant.
    #[arg(long)]
    corrected: bool,
    /// Emit as a corpus file (id = text = sentence) ready for `embed`.
    #[arg(long)]
    as_corpus: bool,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Endpoint(_) => 3,
        Error::Dimension { .. } => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Embed(args) => commands::embed(&cli, args),
        Command::Direction(args) => commands::direction(&cli, args),
        Command::Map(args) => commands::map(&cli, args),
        Command::Analyze(args) => commands::analyze(&cli, args),
        Command::Render(args) => commands::render(&cli, args),
        Command::GenFixture(args) => commands::gen_fixture(&cli, args),
        Command::Concepts(args) => commands::concepts(&cli, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
