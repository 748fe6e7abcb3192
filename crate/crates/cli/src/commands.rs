use std::fmt;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use atlas_forge_core::genpipe::corpus::{default_domains, load_domains_file};
use atlas_forge_core::genpipe::{generate_atlas, generate_cards, ChatProvider, GenerateOptions, HttpEmbedder, HttpProvider, MockProvider, ProviderConfig};
use atlas_forge_core::ingest::{incidents_to_uses, load_incidents, merge_similar_with, merge_with_review, IncidentFormat, MergeReport};
use atlas_forge_core::layout::{layout_dataset, Embedder, FallbackEmbedder, TsneParams};
use atlas_forge_core::metrics::{evaluate, Responses};
use atlas_forge_core::model::{dataset_stats, parse_atlas, serialize_atlas, to_canonical_string, validate_dataset, AtlasDataset, UseCase};
use atlas_forge_core::Execution;
use atlas_forge_service::{serve_blocking, ServiceConfig};

use super::{AtlasArg, EvalArgs, GenerateArgs, IngestArgs, LayoutArgs, LayoutCmdArgs, ProviderArgs, ServeArgs, ValidateArgs};

type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug)]
pub enum CliError {
    /// Bad flag values that clap cannot catch.
    Usage(String),
    Data(BoxError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Data(e) => write!(f, "{e}"),
        }
    }
}

impl<E: Into<BoxError>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Data(e.into())
    }
}

type Result<T = ()> = std::result::Result<T, CliError>;

fn with_path<E: fmt::Display>(path: &Path) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Data(format!("{}: {e}", path.display()).into())
}

fn read_atlas(path: &Path) -> Result<AtlasDataset> {
    let bytes = std::fs::read(path).map_err(with_path(path))?;
    parse_atlas(&bytes).map_err(with_path(path))
}

fn write_atlas(path: &Path, dataset: &AtlasDataset) -> Result {
    std::fs::write(path, serialize_atlas(dataset)).map_err(with_path(path))?;
    log::info!("wrote {} uses to {}", dataset.uses.len(), path.display());
    Ok(())
}

fn tsne_params(a: &LayoutArgs) -> Result<TsneParams> {
    let params = TsneParams { seed: a.seed, perplexity: a.perplexity, iterations: a.iters, ..Default::default() };
    params.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(params)
}

fn load_config(path: &Path) -> Result<ProviderConfig> {
    ProviderConfig::load(path).map_err(with_path(path))
}

fn provider(args: &ProviderArgs) -> Result<(Box<dyn ChatProvider>, Option<ProviderConfig>)> {
    match (&args.provider_config, args.mock_seed) {
        (_, Some(seed)) => Ok((Box::new(MockProvider::new(seed)), None)),
        (Some(path), None) => {
            let config = load_config(path)?;
            Ok((Box::new(HttpProvider::new(config.clone())?), Some(config)))
        }
        (None, None) => Err(CliError::Usage("either --provider-config or --mock-seed is required".into())),
    }
}

/// The endpoint's embedding model when one is configured, else the offline
/// character n-gram embedder.
fn embedder(config: Option<&ProviderConfig>) -> Result<Box<dyn Embedder>> {
    match config {
        Some(c) if c.embedding_model.is_some() => Ok(Box::new(HttpEmbedder::new(c.clone())?)),
        _ => Ok(Box::new(FallbackEmbedder)),
    }
}

fn options(config: Option<&ProviderConfig>) -> GenerateOptions {
    let mut opts = GenerateOptions::default();
    if let Some(c) = config {
        opts.max_retries = c.max_retries;
        opts.max_in_flight = c.max_in_flight;
    }
    opts
}

fn lay_out(dataset: &mut AtlasDataset, embedder: &dyn Embedder, params: &TsneParams) -> Result {
    let result = layout_dataset(dataset, embedder, params, Execution::default())?;
    if let Some(kl) = result.kl_trace.last() {
        log::info!("layout of {} uses, final KL {kl:.4}", dataset.uses.len());
    }
    Ok(())
}

fn check(dataset: &AtlasDataset) -> Result {
    let report = validate_dataset(dataset, true);
    if report.is_valid() {
        Ok(())
    } else {
        Err(format!("generated atlas is invalid:\n{report}").into())
    }
}

pub fn generate(a: GenerateArgs) -> Result {
    let params = tsne_params(&a.layout)?;
    let domains = match &a.domains_file {
        Some(path) => load_domains_file(path).map_err(with_path(path))?,
        None => default_domains(),
    };
    let (provider, config) = provider(&a.provider)?;
    let embedder = embedder(config.as_ref())?;
    let opts = GenerateOptions { domains_per_prompt: a.domains_per_prompt, ..options(config.as_ref()) };

    log::info!("generating uses of {} across {} domains", a.technology, domains.len());
    let mut dataset = generate_atlas(provider.as_ref(), &a.technology, &domains, &opts)?;
    lay_out(&mut dataset, embedder.as_ref(), &params)?;
    check(&dataset)?;
    write_atlas(&a.out, &dataset)
}

fn default_report_path(out: &Path) -> PathBuf {
    let name = out.file_name().and_then(|n| n.to_str()).unwrap_or("atlas.json");
    let stem = name.strip_suffix(".json").unwrap_or(name);
    let stem = stem.strip_suffix(".atlas").unwrap_or(stem);
    out.with_file_name(format!("{stem}.merge-report.json"))
}

fn ask_merge(members: &[&UseCase]) -> bool {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "merge these {} uses?", members.len());
    for u in members {
        let _ = writeln!(err, "  {}  {}", u.id, u.component_text());
    }
    let _ = write!(err, "[y/N] ");
    let _ = err.flush();
    let mut line = String::new();
    if std::io::stdin().lock().read_line(&mut line).is_err() {
        return false;
    }
    matches!(line.trim().to_ascii_lowercase().as_str(), "y" | "yes")
}

pub fn ingest(a: IngestArgs) -> Result {
    let params = tsne_params(&a.layout)?;
    if !(a.threshold > 0.0 && a.threshold <= 1.0) {
        return Err(CliError::Usage(format!("--threshold must be in (0, 1], got {}", a.threshold)));
    }
    let format = match &a.format {
        Some(f) => f.parse::<IncidentFormat>().map_err(CliError::Usage)?,
        None => IncidentFormat::from_path(&a.incidents)
            .ok_or_else(|| CliError::Usage(format!("cannot tell the format of {}; pass --format", a.incidents.display())))?,
    };
    let incidents = load_incidents(&a.incidents, format).map_err(with_path(&a.incidents))?;
    let (provider, config) = provider(&a.provider)?;
    let embedder = embedder(config.as_ref())?;
    let opts = options(config.as_ref());

    log::info!("converting {} incidents", incidents.len());
    let uses = incidents_to_uses(provider.as_ref(), &incidents, &opts)?;
    let (merged, report): (Vec<UseCase>, MergeReport) = if a.interactive {
        merge_with_review(&uses, embedder.as_ref(), a.threshold, opts.exec, ask_merge)?
    } else {
        merge_similar_with(&uses, embedder.as_ref(), a.threshold, opts.exec)?
    };
    log::info!("{} incidents merged into {} uses", incidents.len(), merged.len());
    let (uses, cards) = generate_cards(provider.as_ref(), &merged, &opts)?;
    let mut dataset = AtlasDataset::new("multi");
    dataset.uses = uses;
    dataset.cards = cards;
    lay_out(&mut dataset, embedder.as_ref(), &params)?;
    check(&dataset)?;
    write_atlas(&a.out, &dataset)?;

    let report_path = a.report.clone().unwrap_or_else(|| default_report_path(&a.out));
    std::fs::write(&report_path, to_canonical_string(&report)?).map_err(with_path(&report_path))?;
    log::info!("wrote merge report to {}", report_path.display());
    Ok(())
}

pub fn layout(a: LayoutCmdArgs) -> Result {
    let params = tsne_params(&a.layout)?;
    let config = a.provider_config.as_deref().map(load_config).transpose()?;
    let embedder = embedder(config.as_ref())?;
    let mut dataset = read_atlas(&a.atlas)?;
    lay_out(&mut dataset, embedder.as_ref(), &params)?;
    write_atlas(a.out.as_deref().unwrap_or(&a.atlas), &dataset)
}

pub fn validate(a: ValidateArgs) -> Result {
    let dataset = read_atlas(&a.atlas)?;
    let report = validate_dataset(&dataset, a.require_layout);
    if report.is_valid() {
        println!("{}: ok ({} uses)", a.atlas.display(), dataset.uses.len());
        Ok(())
    } else {
        print!("{report}");
        Err(format!("{}: {} violations", a.atlas.display(), report.len()).into())
    }
}

pub fn stats(a: AtlasArg) -> Result {
    let dataset = read_atlas(&a.atlas)?;
    print!("{}", dataset_stats(&dataset));
    Ok(())
}

pub fn eval(a: EvalArgs) -> Result {
    let file = std::fs::File::open(&a.responses).map_err(with_path(&a.responses))?;
    let responses = Responses::from_reader(file).map_err(with_path(&a.responses))?;
    print!("{}", evaluate(&responses).map_err(with_path(&a.responses))?);
    Ok(())
}

pub fn serve(a: ServeArgs) -> Result {
    let mut config = ServiceConfig::new(&a.atlas, a.port);
    config.bind.set_ip(a.host);
    config.static_dir = a.static_dir;
    serve_blocking(config)?;
    Ok(())
}
