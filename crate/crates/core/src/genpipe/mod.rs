//! Prompt construction, provider access and structured-output parsing for
//! generating uses and their impact cards.

pub mod corpus;
mod mock;
mod pipeline;
mod prompt;
mod provider;
mod repair;
mod schema;

use thiserror::Error;

pub use mock::{MockProvider, ScriptedProvider};
pub use pipeline::{generate_atlas, generate_card, generate_card_at_level, generate_cards, generate_uses, GenerateOptions};
pub use prompt::{
    build_benefit_prompt, build_explore_prompt, build_illustration_prompt, build_incident_prompt,
    build_mitigation_prompt, build_risk_prompt, ContextBlock, ContextKind, PromptSpec,
};
pub use provider::{ChatMessage, ChatProvider, ChatRequest, HttpEmbedder, HttpProvider, ProviderConfig};
pub use repair::{complete_with_repair, Repaired};
pub use schema::{
    extract_json, parse_benefit_output, parse_explore_output, parse_layer, parse_mitigation_output, parse_risk_label,
    parse_risk_output, MitigationOutput, RiskGenOutput, SchemaId,
};

pub const DEFAULT_MAX_RETRIES: usize = 3;
pub const DEFAULT_MAX_IN_FLIGHT: usize = 4;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("malformed output at `{field}`: {reason}")]
    MalformedOutput { field: String, reason: String },
    #[error("unknown risk label `{0}`")]
    UnknownRiskLabel(String),
    #[error("no valid reply after {attempts} attempts; last problem: {last}")]
    RepairExhausted { attempts: usize, last: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("domain list is empty")]
    EmptyDomains,
    #[error("invalid use: {0}")]
    InvalidUse(String),
    #[error("a mitigation prompt needs at least one risk")]
    NoRisks,
    #[error("provider configuration: {0}")]
    Config(String),
    #[error("impact card for {use_id} rejected: {reason}")]
    InvalidCard { use_id: String, reason: String },
}

impl GenError {
    /// Whether quoting the error back to the provider may fix it.
    pub fn is_repairable(&self) -> bool {
        matches!(self, GenError::MalformedOutput { .. } | GenError::UnknownRiskLabel(_))
    }
}
