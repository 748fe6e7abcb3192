use thiserror::Error;

use crate::exec::Execution;

/// Dimension of the offline fallback embedding.
pub const FALLBACK_DIM: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self, EmbedError> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(EmbedError::NonFinite(i));
        }
        Ok(EmbeddingVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Cosine similarity; 0 when either vector is zero.
    pub fn cosine(&self, other: &EmbeddingVector) -> f64 {
        let dot: f64 = self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum();
        let denom = self.norm() * other.norm();
        if denom == 0.0 {
            0.0
        } else {
            dot / denom
        }
    }
}

impl AsRef<[f64]> for EmbeddingVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("embedding has a non-finite value at index {0}")]
    NonFinite(usize),
    #[error("embedding endpoint failed: {0}")]
    Remote(String),
    #[error("embedding dimensions differ ({0} vs {1})")]
    DimensionMismatch(usize, usize),
}

/// Source of text embeddings.
pub trait Embedder: Send + Sync {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError>;

    fn embed_batch(&self, texts: &[String], exec: Execution) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let vectors = exec.map(texts, |t| self.embed(t)).into_iter().collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = vectors.first() {
            if let Some(bad) = vectors.iter().find(|v| v.len() != first.len()) {
                return Err(EmbedError::DimensionMismatch(first.len(), bad.len()));
            }
        }
        Ok(vectors)
    }
}

/// Deterministic offline embedder: hashed character 3-gram counts.
#[derive(Debug, Clone, Copy, Default)]
pub struct FallbackEmbedder;

impl Embedder for FallbackEmbedder {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError> {
        Ok(fallback_embed(text))
    }
}

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Lowercases `text`, counts its character 3-grams into [`FALLBACK_DIM`]
/// FNV-1a buckets and L2-normalizes. Text shorter than three characters is a
/// single gram; empty text gives the zero vector.
pub fn fallback_embed(text: &str) -> EmbeddingVector {
    let chars: Vec<char> = text.to_lowercase().chars().collect();
    let mut counts = vec![0.0f64; FALLBACK_DIM];
    let mut buf = String::new();
    let mut add = |gram: &[char]| {
        buf.clear();
        buf.extend(gram);
        counts[(fnv1a(buf.as_bytes()) % FALLBACK_DIM as u64) as usize] += 1.0;
    };
    if chars.len() < 3 {
        if !chars.is_empty() {
            add(&chars);
        }
    } else {
        for gram in chars.windows(3) {
            add(gram);
        }
    }
    let norm = counts.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm > 0.0 {
        for c in &mut counts {
            *c /= norm;
        }
    }
    EmbeddingVector(counts)
}
