//! Embedding and 2-D layout of uses: exact t-SNE over use embeddings,
//! min-max normalization and the risk-split view.

mod affinity;
mod coords;
mod embed;
mod tsne;

use thiserror::Error;

use crate::exec::Execution;
use crate::model::{AtlasDataset, UseCase};

pub use affinity::{pairwise_affinities, pairwise_affinities_with, AffinityMatrix};
pub use coords::{normalize_coords, risk_band, split_by_risk, split_point};
pub use embed::{fallback_embed, EmbedError, Embedder, EmbeddingVector, FallbackEmbedder, FALLBACK_DIM};
pub(crate) use embed::fnv1a;
pub use tsne::{kl_between, kl_divergence, tsne, tsne_with, LayoutResult, TsneParams};

pub const DEFAULT_MAX_BISECTIONS: usize = 64;

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("t-SNE needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("all distances from point {row} are zero")]
    DegenerateDistances { row: usize },
    #[error("invalid layout parameters: {0}")]
    InvalidParams(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("optimization produced non-finite coordinates")]
    Diverged,
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

/// Text embedded for a use's position on the map.
pub fn layout_text(u: &UseCase) -> String {
    format!("{} | {} | {}", u.short_description, u.purpose, u.domain)
}

/// Recomputes `coords` and `split_coords` of every use in the dataset.
///
/// Fewer than three uses are placed on a horizontal line instead of running
/// t-SNE. Coordinates are quantized to the six decimals the file keeps.
pub fn layout_dataset(
    dataset: &mut AtlasDataset,
    embedder: &dyn Embedder,
    params: &TsneParams,
    exec: Execution,
) -> Result<LayoutResult, LayoutError> {
    dataset.sort();
    let n = dataset.uses.len();
    let result = if n >= 3 {
        let texts: Vec<String> = dataset.uses.iter().map(layout_text).collect();
        let vectors = embedder.embed_batch(&texts, exec)?;
        tsne_with(&vectors, params, exec)?
    } else {
        let coords = (0..n).map(|i| [i as f64, 0.0]).collect();
        LayoutResult { coords, kl_trace: Vec::new(), params: *params }
    };

    let normalized = normalize_coords(&result.coords);
    dataset.coords.clear();
    dataset.split_coords.clear();
    for (u, c) in dataset.uses.iter().zip(normalized) {
        let c = c.quantized();
        dataset.coords.insert(u.id.clone(), c);
        dataset.split_coords.insert(u.id.clone(), split_point(c, u.risk_level).quantized());
    }
    Ok(result)
}
