//! Read-only HTTP API over one atlas file.
//!
//! | route            | body                                                   |
//! |------------------|--------------------------------------------------------|
//! | `GET /api/meta`  | schema version, technology, use count, the 10 categories |
//! | `GET /api/uses`  | use summaries with both coordinates; `category`, `q` and `risk` filters |
//! | `GET /api/uses/{id}` | the use plus its card, risks and benefits grouped by layer |
//! | `GET /`          | the static UI bundle, or a placeholder page without one |
//!
//! The dataset is loaded once at startup and never changes afterwards.
//! Bodies are written with the canonical atlas encoding, so identical
//! requests get byte-identical responses.

mod api;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use atlas_forge_core::model::{parse_atlas, validate_dataset, AtlasDataset, CodecError};
use axum::Router;
use thiserror::Error;

pub use api::{meta_body, use_detail_body, uses_body, FilterError, UseFilter};

pub const DEFAULT_PORT: u16 = 8080;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Codec { path: PathBuf, source: CodecError },
    #[error("{path} fails validation:\n{report}")]
    Invalid { path: PathBuf, report: String },
    #[error("static directory {0} does not exist")]
    MissingStaticDir(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub bind: SocketAddr,
    pub atlas_path: PathBuf,
    /// Built UI bundle served at `/`.
    pub static_dir: Option<PathBuf>,
}

impl ServiceConfig {
    pub fn new(atlas_path: impl Into<PathBuf>, port: u16) -> Self {
        ServiceConfig {
            bind: SocketAddr::from(([127, 0, 0, 1], port)),
            atlas_path: atlas_path.into(),
            static_dir: None,
        }
    }

    /// There is no write API; kept so callers can assert it.
    pub fn read_only(&self) -> bool {
        true
    }
}

/// Reads, parses and validates an atlas file.
pub fn load_atlas(path: &Path) -> Result<AtlasDataset, ServiceError> {
    let bytes = std::fs::read(path).map_err(|source| ServiceError::Io { path: path.to_path_buf(), source })?;
    let mut dataset = parse_atlas(&bytes).map_err(|source| ServiceError::Codec { path: path.to_path_buf(), source })?;
    let report = validate_dataset(&dataset, false);
    if !report.is_valid() {
        return Err(ServiceError::Invalid { path: path.to_path_buf(), report: report.to_string() });
    }
    dataset.sort();
    Ok(dataset)
}

/// The application router over an immutable dataset snapshot.
pub fn router(dataset: AtlasDataset, static_dir: Option<&Path>) -> Router {
    api::routes(Arc::new(dataset), static_dir)
}

/// Loads the atlas and serves until the process is stopped.
pub async fn serve(config: ServiceConfig) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let dataset = load_atlas(&config.atlas_path)?;
    if let Some(dir) = &config.static_dir {
        if !dir.is_dir() {
            return Err(ServiceError::MissingStaticDir(dir.clone()).into());
        }
    }
    log::info!("serving {} uses of {} on http://{}", dataset.uses.len(), dataset.technology, config.bind);
    let app = router(dataset, config.static_dir.as_deref());
    let listener = tokio::net::TcpListener::bind(config.bind).await?;
    axum::serve(listener, app).await?;
    Ok(())
}

pub fn serve_blocking(config: ServiceConfig) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    tokio::runtime::Builder::new_multi_thread().enable_all().build()?.block_on(serve(config))
}
