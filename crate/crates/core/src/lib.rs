//! Core of atlas-forge: the use/impact-card data model and atlas file
//! format, the generation pipeline, incident ingestion, the t-SNE layout and
//! study metrics.

pub mod exec;
pub mod genpipe;
pub mod ingest;
pub mod layout;
pub mod metrics;
pub mod model;

pub use exec::Execution;
