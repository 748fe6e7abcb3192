//! Rebuilds `data/sample/facial-recognition.atlas.json` from the curated use
//! table next to it.
//!
//! The table fixes each use's components, risk level, implementation
//! potential and daily flag. Card text comes from the mock provider (seed 1)
//! and the layout from the fallback embedder, so the output is reproducible
//! offline:
//!
//! ```text
//! cargo run -p atlas-forge-cli --example build_sample
//! ```

use std::path::PathBuf;

use atlas_forge_core::genpipe::{generate_card_at_level, GenerateOptions, MockProvider};
use atlas_forge_core::layout::{layout_dataset, FallbackEmbedder, TsneParams};
use atlas_forge_core::model::{serialize_atlas, validate_dataset, AtlasDataset, ImplementationPotential, RiskLevel, UseCase};
use atlas_forge_core::Execution;
use serde::Deserialize;

const TECHNOLOGY: &str = "facial recognition";

#[derive(Deserialize)]
struct Row {
    domain: String,
    purpose: String,
    ai_user: String,
    ai_subject: String,
    description: String,
    risk_level: String,
    implementation_potential: String,
    daily: bool,
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/sample").canonicalize()?;
    let mut reader = csv::ReaderBuilder::new().delimiter(b'\t').from_path(dir.join("facial-recognition.uses.tsv"))?;

    let provider = MockProvider::new(1);
    let opts = GenerateOptions::default();
    let mut dataset = AtlasDataset::new(TECHNOLOGY);
    for row in reader.deserialize() {
        let row: Row = row?;
        let mut u = UseCase::new(row.purpose, TECHNOLOGY, row.ai_user, row.ai_subject, row.domain, row.description);
        u.implementation_potential = row.implementation_potential.parse::<ImplementationPotential>()?;
        u.daily = row.daily;
        let level: RiskLevel = row.risk_level.parse()?;
        let (u, card) = generate_card_at_level(&provider, &u, level, &opts)?;
        dataset.uses.push(u);
        dataset.cards.push(card);
    }
    layout_dataset(&mut dataset, &FallbackEmbedder, &TsneParams::default(), Execution::default())?;

    let report = validate_dataset(&dataset, true);
    if !report.is_valid() {
        return Err(report.to_string().into());
    }
    let out = dir.join("facial-recognition.atlas.json");
    std::fs::write(&out, serialize_atlas(&dataset))?;
    eprintln!("wrote {} uses to {}", dataset.uses.len(), out.display());
    Ok(())
}
