use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use ureq::Agent;

use crate::exec::Execution;
use crate::layout::{EmbedError, Embedder, EmbeddingVector};

use super::prompt::PromptSpec;
use super::schema::SchemaId;
use super::{GenError, DEFAULT_MAX_IN_FLIGHT, DEFAULT_MAX_RETRIES};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage { role: "system".into(), content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: "user".into(), content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage { role: "assistant".into(), content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatRequest {
    pub messages: Vec<ChatMessage>,
    pub schema: SchemaId,
}

impl ChatRequest {
    pub fn from_prompt(prompt: &PromptSpec) -> Self {
        ChatRequest {
            messages: vec![ChatMessage::system(prompt.system_text()), ChatMessage::user(prompt.user_text())],
            schema: prompt.output_schema,
        }
    }

    /// Content of the first user message.
    pub fn user_text(&self) -> &str {
        self.messages.iter().find(|m| m.role == "user").map(|m| m.content.as_str()).unwrap_or("")
    }
}

/// A chat-completion backend returning the raw reply text.
pub trait ChatProvider: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, GenError>;
}

/// Connection settings for an OpenAI-compatible endpoint, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    pub base_url: String,
    pub model_name: String,
    /// Name of the environment variable holding the bearer token. Leave out
    /// for endpoints without authentication.
    #[serde(default)]
    pub auth_token_env: Option<String>,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_retries")]
    pub max_retries: usize,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    #[serde(default)]
    pub embedding_model: Option<String>,
}

fn default_retries() -> usize {
    DEFAULT_MAX_RETRIES
}

fn default_timeout() -> u64 {
    120
}

fn default_in_flight() -> usize {
    DEFAULT_MAX_IN_FLIGHT
}

impl ProviderConfig {
    pub fn new(base_url: impl Into<String>, model_name: impl Into<String>) -> Self {
        ProviderConfig {
            base_url: base_url.into(),
            model_name: model_name.into(),
            auth_token_env: None,
            temperature: 0.0,
            max_retries: DEFAULT_MAX_RETRIES,
            timeout_secs: default_timeout(),
            max_in_flight: DEFAULT_MAX_IN_FLIGHT,
            embedding_model: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, GenError> {
        let config: ProviderConfig = toml::from_str(text).map_err(|e| GenError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, GenError> {
        let text = std::fs::read_to_string(path).map_err(|e| GenError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let fail = |msg: String| Err(GenError::Config(msg));
        if !(self.base_url.starts_with("http://") || self.base_url.starts_with("https://")) {
            return fail(format!("base_url must be an http(s) URL, got `{}`", self.base_url));
        }
        if self.model_name.trim().is_empty() {
            return fail("model_name is empty".into());
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return fail(format!("temperature must be >= 0, got {}", self.temperature));
        }
        if self.max_retries > 10 {
            return fail(format!("max_retries must be in [0, 10], got {}", self.max_retries));
        }
        if self.timeout_secs == 0 {
            return fail("timeout_secs must be positive".into());
        }
        if self.max_in_flight == 0 {
            return fail("max_in_flight must be positive".into());
        }
        Ok(())
    }

    fn endpoint(&self, path: &str) -> String {
        format!("{}/{path}", self.base_url.trim_end_matches('/'))
    }

    fn token(&self) -> Result<Option<String>, GenError> {
        match &self.auth_token_env {
            None => Ok(None),
            Some(var) => std::env::var(var)
                .map(Some)
                .map_err(|_| GenError::Config(format!("environment variable {var} is not set"))),
        }
    }

    fn agent(&self) -> Agent {
        Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(self.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into()
    }
}

fn post_json(agent: &Agent, url: &str, token: Option<&str>, body: &Value) -> Result<Value, String> {
    let mut req = agent.post(url).header("Content-Type", "application/json");
    if let Some(t) = token {
        req = req.header("Authorization", format!("Bearer {t}"));
    }
    let mut resp = req.send_json(body).map_err(|e| format!("{url}: {e}"))?;
    let status = resp.status();
    let text = resp.body_mut().read_to_string().map_err(|e| format!("{url}: {e}"))?;
    if !status.is_success() {
        let snippet: String = text.chars().take(300).collect();
        return Err(format!("{url}: HTTP {status}: {snippet}"));
    }
    serde_json::from_str(&text).map_err(|e| format!("{url}: response is not JSON: {e}"))
}

/// Chat provider speaking the `chat/completions` wire format, asking for a
/// reply constrained to the request's JSON schema.
pub struct HttpProvider {
    config: ProviderConfig,
    token: Option<String>,
    agent: Agent,
}

impl HttpProvider {
    pub fn new(config: ProviderConfig) -> Result<Self, GenError> {
        config.validate()?;
        let token = config.token()?;
        let agent = config.agent();
        Ok(HttpProvider { config, token, agent })
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.config
    }

    fn request_body(&self, request: &ChatRequest) -> Value {
        json!({
            "model": self.config.model_name,
            "temperature": self.config.temperature,
            "messages": request.messages,
            "response_format": {
                "type": "json_schema",
                "json_schema": {"name": request.schema.name(), "schema": request.schema.json_schema()}
            }
        })
    }
}

impl ChatProvider for HttpProvider {
    fn complete(&self, request: &ChatRequest) -> Result<String, GenError> {
        let url = self.config.endpoint("chat/completions");
        let reply = post_json(&self.agent, &url, self.token.as_deref(), &self.request_body(request))
            .map_err(GenError::Transport)?;
        reply
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| GenError::Transport(format!("{url}: reply has no choices[0].message.content")))
    }
}

/// Embedder calling an `embeddings` endpoint, up to [`Self::BATCH`] texts per
/// request.
pub struct HttpEmbedder {
    config: ProviderConfig,
    model: String,
    token: Option<String>,
    agent: Agent,
}

impl HttpEmbedder {
    pub const BATCH: usize = 64;

    pub fn new(config: ProviderConfig) -> Result<Self, GenError> {
        config.validate()?;
        let model = config
            .embedding_model
            .clone()
            .ok_or_else(|| GenError::Config("embedding_model is not set".into()))?;
        let token = config.token()?;
        let agent = config.agent();
        Ok(HttpEmbedder { config, model, token, agent })
    }

    fn request(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let url = self.config.endpoint("embeddings");
        let body = json!({"model": self.model, "input": texts});
        let reply = post_json(&self.agent, &url, self.token.as_deref(), &body).map_err(EmbedError::Remote)?;
        let data = reply
            .get("data")
            .and_then(Value::as_array)
            .ok_or_else(|| EmbedError::Remote(format!("{url}: reply has no data array")))?;
        if data.len() != texts.len() {
            return Err(EmbedError::Remote(format!("{url}: {} embeddings for {} inputs", data.len(), texts.len())));
        }
        let mut out: Vec<(usize, EmbeddingVector)> = Vec::with_capacity(data.len());
        for (pos, item) in data.iter().enumerate() {
            let index = item.get("index").and_then(Value::as_u64).map_or(pos, |i| i as usize);
            let values = item
                .get("embedding")
                .and_then(Value::as_array)
                .ok_or_else(|| EmbedError::Remote(format!("{url}: data[{pos}] has no embedding")))?
                .iter()
                .map(|v| v.as_f64().ok_or_else(|| EmbedError::Remote(format!("{url}: data[{pos}] is not numeric"))))
                .collect::<Result<Vec<f64>, _>>()?;
            out.push((index, EmbeddingVector::new(values)?));
        }
        out.sort_by_key(|(i, _)| *i);
        Ok(out.into_iter().map(|(_, v)| v).collect())
    }
}

impl Embedder for HttpEmbedder {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError> {
        let mut v = self.request(&[text.to_string()])?;
        Ok(v.remove(0))
    }

    fn embed_batch(&self, texts: &[String], exec: Execution) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let chunks: Vec<&[String]> = texts.chunks(Self::BATCH).collect();
        let results = exec.map_bounded(self.config.max_in_flight, &chunks, |c| self.request(c));
        let mut vectors = Vec::with_capacity(texts.len());
        for r in results {
            vectors.extend(r?);
        }
        if let Some(first) = vectors.first() {
            if let Some(bad) = vectors.iter().find(|v| v.len() != first.len()) {
                return Err(EmbedError::DimensionMismatch(first.len(), bad.len()));
            }
        }
        Ok(vectors)
    }
}
