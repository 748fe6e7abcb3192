//! `atlas-forge` command-line entry point.
//!
//! Exit codes: 0 on success, 1 when an input file or the provider fails, 2 on
//! usage errors. Logs go to stderr (`RUST_LOG` overrides the `info` default);
//! stdout only carries command output such as `stats` and `eval` reports.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use atlas_forge_core::ingest::DEFAULT_MERGE_THRESHOLD;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "atlas-forge", version, about = "Build, lay out and serve AI use atlases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate uses and impact cards for a technology and write a laid-out atlas.
    Generate(GenerateArgs),
    /// Turn an incident corpus into a merged, laid-out atlas.
    Ingest(IngestArgs),
    /// Recompute coords and split coords of an atlas file.
    Layout(LayoutCmdArgs),
    /// Check an atlas file against the model invariants.
    Validate(ValidateArgs),
    /// Print risk, implementation and daily histograms of an atlas.
    Stats(AtlasArg),
    /// Compute study metrics from a responses CSV.
    Eval(EvalArgs),
    /// Serve an atlas over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct ProviderArgs {
    /// TOML file describing the chat-completion endpoint.
    #[arg(long, value_name = "FILE")]
    provider_config: Option<PathBuf>,
    /// Use the offline mock provider with this seed instead of a real endpoint.
    #[arg(long, value_name = "SEED")]
    mock_seed: Option<u64>,
}

#[derive(Debug, Args, Clone)]
struct LayoutArgs {
    /// t-SNE initialization seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 15.0)]
    perplexity: f64,
    /// Gradient-descent iterations.
    #[arg(long, default_value_t = 1000)]
    iters: usize,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    technology: String,
    /// One domain per line; defaults to the built-in 46 domains.
    #[arg(long, value_name = "FILE")]
    domains_file: Option<PathBuf>,
    #[command(flatten)]
    provider: ProviderArgs,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Domains per explore request; 0 asks for all domains at once.
    #[arg(long, default_value_t = 0)]
    domains_per_prompt: usize,
    #[command(flatten)]
    layout: LayoutArgs,
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// Incident CSV or JSON file.
    #[arg(long, value_name = "FILE")]
    incidents: PathBuf,
    /// `csv` or `json`; guessed from the extension by default.
    #[arg(long)]
    format: Option<String>,
    #[command(flatten)]
    provider: ProviderArgs,
    /// Cosine similarity at or above which uses are merged.
    #[arg(long, default_value_t = DEFAULT_MERGE_THRESHOLD)]
    threshold: f64,
    /// Ask on stdin before merging each cluster.
    #[arg(long)]
    interactive: bool,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Merge report path; defaults to `<out stem>.merge-report.json`.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    #[command(flatten)]
    layout: LayoutArgs,
}

#[derive(Debug, Args)]
struct LayoutCmdArgs {
    #[arg(long, value_name = "FILE")]
    atlas: PathBuf,
    /// Write here instead of rewriting the input file.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Embed with the endpoint's `embedding_model` instead of the offline fallback.
    #[arg(long, value_name = "FILE")]
    provider_config: Option<PathBuf>,
    #[command(flatten)]
    layout: LayoutArgs,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long, value_name = "FILE")]
    atlas: PathBuf,
    /// Also require coords and split coords for every use.
    #[arg(long)]
    require_layout: bool,
}

#[derive(Debug, Args)]
struct AtlasArg {
    #[arg(long, value_name = "FILE")]
    atlas: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long, value_name = "FILE")]
    responses: PathBuf,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, value_name = "FILE")]
    atlas: PathBuf,
    #[arg(long, default_value_t = atlas_forge_service::DEFAULT_PORT)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    /// Built UI bundle to serve at `/`.
    #[arg(long, value_name = "DIR")]
    static_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Ingest(a) => commands::ingest(a),
        Command::Layout(a) => commands::layout(a),
        Command::Validate(a) => commands::validate(a),
        Command::Stats(a) => commands::stats(a),
        Command::Eval(a) => commands::eval(a),
        Command::Serve(a) => commands::serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
