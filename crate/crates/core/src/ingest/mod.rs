//! Incident loading, conversion of incidents into uses and similarity-based
//! merging of the results.

mod incidents;
mod merge;

use thiserror::Error;

use crate::genpipe::{build_incident_prompt, complete_with_repair, generate_cards, parse_explore_output, ChatProvider, GenError, GenerateOptions};
use crate::layout::{EmbedError, Embedder};
use crate::model::{AtlasDataset, UseCase};

pub use incidents::{load_incidents, parse_incidents_csv, parse_incidents_json, IncidentFormat, IncidentRecord};
pub use merge::{merge_similar, merge_similar_with, merge_text, merge_with_review, MergeCluster, MergeReport, DEFAULT_MERGE_THRESHOLD};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("row {row}: {message}")]
    Format { row: usize, message: String },
    #[error("incident id {id} appears in rows {first_row} and {row}")]
    DuplicateId { id: u64, first_row: usize, row: usize },
    #[error("merge threshold must be in (0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Gen(#[from] GenError),
}

/// Asks the provider for the use most likely behind an incident.
pub fn incident_to_use(provider: &dyn ChatProvider, incident: &IncidentRecord, max_retries: usize) -> Result<UseCase, GenError> {
    let prompt = build_incident_prompt(&incident.title, &incident.description);
    let mut u = complete_with_repair(provider, &prompt, max_retries, |text| {
        let mut uses = parse_explore_output(text)?;
        if uses.len() != 1 {
            return Err(GenError::MalformedOutput { field: "uses".into(), reason: format!("expected exactly one use, got {}", uses.len()) });
        }
        Ok(uses.remove(0))
    })?
    .value;
    u.source_incident_ids.insert(incident.incident_id);
    Ok(u)
}

/// Converts every incident, in input order, with bounded concurrency.
pub fn incidents_to_uses(provider: &dyn ChatProvider, incidents: &[IncidentRecord], opts: &GenerateOptions) -> Result<Vec<UseCase>, GenError> {
    opts.exec
        .map_bounded(opts.max_in_flight, incidents, |i| incident_to_use(provider, i, opts.max_retries))
        .into_iter()
        .collect()
}

/// Incidents to uses, merge, then assessment of the merged uses. The atlas
/// is labelled `multi` and has no layout yet.
pub fn ingest_incidents(
    provider: &dyn ChatProvider,
    embedder: &dyn Embedder,
    incidents: &[IncidentRecord],
    threshold: f64,
    opts: &GenerateOptions,
) -> Result<(AtlasDataset, MergeReport), IngestError> {
    let uses = incidents_to_uses(provider, incidents, opts)?;
    let (merged, report) = merge_similar_with(&uses, embedder, threshold, opts.exec)?;
    log::info!("{} incidents merged into {} uses", incidents.len(), merged.len());
    let (uses, cards) = generate_cards(provider, &merged, opts)?;
    let mut dataset = AtlasDataset::new("multi");
    dataset.uses = uses;
    dataset.cards = cards;
    dataset.sort();
    Ok((dataset, report))
}
