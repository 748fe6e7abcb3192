//! Study-analysis computations: SUS, aesthetics facet means, ICC(2,1) and
//! majority-vote correctness rates.

mod agreement;
mod responses;
mod survey;

use thiserror::Error;

pub use agreement::{anova, correctness_rate, icc, Annotation, AnovaSummary, RatingsMatrix};
pub use responses::{evaluate, CorrectnessLine, EvalReport, IccLine, Responses};
pub use survey::{aesthetics_means, sus_score, AestheticsMeans, AestheticsResponse, SusResponse};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("item {item} has out-of-range value {value}")]
    OutOfRange { item: usize, value: f64 },
    #[error("a SUS response has 10 items, got {0}")]
    SusLength(usize),
    #[error("empty {0} group")]
    EmptyGroup(&'static str),
    #[error("ratings matrix: {0}")]
    MatrixShape(String),
    #[error("ratings have no variance to attribute")]
    DegenerateMatrix,
    #[error("no items to score")]
    NoItems,
    #[error("item {0} has no annotations")]
    UnannotatedItem(usize),
    #[error("responses line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("incomplete responses: {0}")]
    Incomplete(String),
}
