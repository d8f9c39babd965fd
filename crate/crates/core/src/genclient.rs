//! Generative clients: chat-completion endpoints over HTTP and deterministic
//! local stubs.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::PromptTemplate;
use crate::retry::{self, HttpFailure, Limiter, RetryPolicy};

/// Sampling parameters sent with every completion request.
///
/// The defaults (temperature 0, top_p 1, seed 1337) make hosted models as
/// repeatable as they allow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationParams {
    pub temperature: f64,
    pub top_p: f64,
    pub seed: Option<i64>,
    pub max_tokens: Option<u32>,
}

impl Default for GenerationParams {
    fn default() -> Self {
        Self {
            temperature: 0.0,
            top_p: 1.0,
            seed: Some(1337),
            max_tokens: None,
        }
    }
}

impl GenerationParams {
    pub fn validate(&self) -> Result<(), GenerationError> {
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(GenerationError::InvalidParams(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(GenerationError::InvalidParams(format!(
                "top_p must be in (0, 1], got {}",
                self.top_p
            )));
        }
        Ok(())
    }

    /// Canonical key/value view used for cache keys. Keys are sorted and
    /// absent options are omitted.
    pub fn canonical(&self) -> BTreeMap<&'static str, serde_json::Value> {
        let mut map = BTreeMap::new();
        map.insert("temperature", serde_json::json!(self.temperature));
        map.insert("top_p", serde_json::json!(self.top_p));
        if let Some(seed) = self.seed {
            map.insert("seed", serde_json::json!(seed));
        }
        if let Some(max_tokens) = self.max_tokens {
            map.insert("max_tokens", serde_json::json!(max_tokens));
        }
        map
    }
}

#[derive(Debug, Error)]
pub enum GenerationError {
    #[error("authentication rejected (HTTP {0})")]
    Auth(u16),
    #[error("API key environment variable `{0}` is not set")]
    MissingApiKey(String),
    #[error("rate limited after exhausting retries")]
    RateLimited,
    #[error("server error (HTTP {0}) after exhausting retries")]
    Server(u16),
    #[error("request rejected (HTTP {status}): {body}")]
    Rejected { status: u16, body: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("empty prompt")]
    EmptyPrompt,
    #[error("invalid generation parameters: {0}")]
    InvalidParams(String),
    #[error("no table entry for prompt {0:?}")]
    UnknownKey(String),
    #[error("prompt does not match any known template")]
    UnknownTemplate,
}

impl From<HttpFailure> for GenerationError {
    fn from(f: HttpFailure) -> Self {
        match f {
            HttpFailure::Auth(status) => Self::Auth(status),
            HttpFailure::RateLimited => Self::RateLimited,
            HttpFailure::Server(status) => Self::Server(status),
            HttpFailure::Client(status, body) => Self::Rejected { status, body },
            HttpFailure::Transport(msg) => Self::Transport(msg),
        }
    }
}

/// Anything that turns a prompt into a completion.
pub trait GenerativeClient: Send + Sync {
    /// Provider family, e.g. `openai` or `stub`.
    fn provider(&self) -> &str;

    /// Model name including version where known.
    fn model(&self) -> &str;

    fn complete(&self, prompt: &str, params: &GenerationParams) -> Result<String, GenerationError>;

    /// Identity recorded on augmentation records.
    fn generator_id(&self) -> String {
        format!("{}/{}", self.provider(), self.model())
    }
}

fn default_timeout() -> Duration {
    Duration::from_secs(60)
}

fn default_retry_base() -> Duration {
    Duration::from_secs(1)
}

fn default_max_retries() -> u32 {
    3
}

fn default_max_concurrency() -> usize {
    4
}

fn default_true() -> bool {
    true
}

/// A chat-completion endpoint. Only the *name* of the environment variable
/// holding the API key is stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorEndpoint {
    pub base_url: String,
    pub model: String,
    #[serde(default)]
    pub provider: Option<String>,
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_timeout", with = "retry::secs", rename = "timeout_secs")]
    pub timeout: Duration,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_retry_base", with = "retry::secs", rename = "retry_base_secs")]
    pub retry_base_delay: Duration,
    #[serde(default = "default_max_concurrency")]
    pub max_concurrency: usize,
    /// Whether the endpoint accepts a `seed` field; when false the seed is
    /// dropped from requests.
    #[serde(default = "default_true")]
    pub supports_seed: bool,
}

impl GeneratorEndpoint {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model: model.into(),
            provider: None,
            api_key_env: None,
            timeout: default_timeout(),
            max_retries: default_max_retries(),
            retry_base_delay: default_retry_base(),
            max_concurrency: default_max_concurrency(),
            supports_seed: true,
        }
    }

    pub fn retry_policy(&self) -> RetryPolicy {
        RetryPolicy {
            max_retries: self.max_retries,
            base_delay: self.retry_base_delay,
            ..RetryPolicy::default()
        }
    }

    pub(crate) fn api_key(&self) -> Result<Option<String>, String> {
        match &self.api_key_env {
            None => Ok(None),
            Some(name) => std::env::var(name).map(Some).map_err(|_| name.clone()),
        }
    }
}

#[derive(Debug, Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Debug, Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 1],
    temperature: f64,
    top_p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_tokens: Option<u32>,
}

/// Serialized request body for a single-user-message chat completion.
pub fn chat_request_body(endpoint: &GeneratorEndpoint, prompt: &str, params: &GenerationParams) -> Vec<u8> {
    let request = ChatRequest {
        model: &endpoint.model,
        messages: [ChatMessage {
            role: "user",
            content: prompt,
        }],
        temperature: params.temperature,
        top_p: params.top_p,
        seed: if endpoint.supports_seed { params.seed } else { None },
        max_tokens: params.max_tokens,
    };
    serde_json::to_vec(&request).expect("chat request serializes")
}

/// Extracts the first choice's message content from a chat-completion
/// response body.
pub fn parse_chat_response(body: &str) -> Result<String, GenerationError> {
    let value: serde_json::Value =
        serde_json::from_str(body).map_err(|e| GenerationError::MalformedResponse(e.to_string()))?;
    value
        .pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .map(str::to_owned)
        .ok_or_else(|| GenerationError::MalformedResponse("missing choices[0].message.content".into()))
}

/// Client for an OpenAI-style `/chat/completions` endpoint.
pub struct HttpGenerator {
    endpoint: GeneratorEndpoint,
    provider: String,
    http: reqwest::blocking::Client,
    limiter: Limiter,
}

impl std::fmt::Debug for HttpGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpGenerator").field("endpoint", &self.endpoint).finish()
    }
}

impl HttpGenerator {
    pub fn new(endpoint: GeneratorEndpoint) -> Result<Self, GenerationError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(endpoint.timeout)
            .build()
            .map_err(|e| GenerationError::Transport(e.to_string()))?;
        let provider = endpoint.provider.clone().unwrap_or_else(|| "http".to_owned());
        Ok(Self {
            limiter: Limiter::new(endpoint.max_concurrency),
            endpoint,
            provider,
            http,
        })
    }

    pub fn endpoint(&self) -> &GeneratorEndpoint {
        &self.endpoint
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.endpoint.base_url.trim_end_matches('/'))
    }
}

impl GenerativeClient for HttpGenerator {
    fn provider(&self) -> &str {
        &self.provider
    }

    fn model(&self) -> &str {
        &self.endpoint.model
    }

    fn complete(&self, prompt: &str, params: &GenerationParams) -> Result<String, GenerationError> {
        if prompt.is_empty() {
            return Err(GenerationError::EmptyPrompt);
        }
        params.validate()?;
        let key = self.endpoint.api_key().map_err(GenerationError::MissingApiKey)?;
        let body = chat_request_body(&self.endpoint, prompt, params);
        let url = self.url();
        let _permit = self.limiter.acquire();
        log::debug!("chat completion request to {url} (model {})", self.endpoint.model);
        let text = retry::post_json(&self.http, &url, key.as_deref(), &body, &self.endpoint.retry_policy())?;
        parse_chat_response(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StubKind {
    /// Returns the prompt unchanged.
    Echo,
    /// Looks the prompt up in a fixed table.
    Table,
    /// Returns the `{text}` payload of a known template unchanged.
    Identity,
    /// Returns the payload followed by a seeded marker token.
    NoiseSuffix,
    /// Returns the payload's content words (stopwords and punctuation removed),
    /// a deterministic stand-in for LLM keyword extraction.
    ContentWords,
}

#[derive(Debug, Clone, Default)]
pub struct StubConfig {
    pub seed: u64,
    pub table: BTreeMap<String, String>,
    /// Templates recognised by payload-extracting stubs; empty means the
    /// shipped defaults.
    pub templates: Vec<PromptTemplate>,
}

/// Deterministic, offline generative client.
#[derive(Debug, Clone)]
pub struct StubClient {
    kind: StubKind,
    model: String,
    seed: u64,
    table: BTreeMap<String, String>,
    templates: Vec<PromptTemplate>,
}

pub fn make_stub(kind: StubKind, config: StubConfig) -> StubClient {
    let templates = if config.templates.is_empty() {
        PromptTemplate::defaults()
    } else {
        config.templates
    };
    let model = match kind {
        StubKind::Echo => "echo".to_owned(),
        StubKind::Table => "table".to_owned(),
        StubKind::Identity => "identity".to_owned(),
        StubKind::NoiseSuffix => format!("noise-suffix-{}", config.seed),
        StubKind::ContentWords => "content-words".to_owned(),
    };
    StubClient {
        kind,
        model,
        seed: config.seed,
        table: config.table,
        templates,
    }
}

impl StubClient {
    pub fn kind(&self) -> StubKind {
        self.kind
    }

    /// Recovers the `{text}` payload from a rendered prompt.
    pub fn extract_payload<'p>(&self, prompt: &'p str) -> Result<&'p str, GenerationError> {
        let mut best: Option<(usize, &'p str)> = None;
        for template in &self.templates {
            if let Some(payload) = template.extract(prompt) {
                let specificity = template.body().len();
                if best.is_none_or(|(s, _)| specificity > s) {
                    best = Some((specificity, payload));
                }
            }
        }
        best.map(|(_, p)| p).ok_or(GenerationError::UnknownTemplate)
    }
}

impl GenerativeClient for StubClient {
    fn provider(&self) -> &str {
        "stub"
    }

    fn model(&self) -> &str {
        &self.model
    }

    fn complete(&self, prompt: &str, _params: &GenerationParams) -> Result<String, GenerationError> {
        match self.kind {
            StubKind::Echo => Ok(prompt.to_owned()),
            StubKind::Table => self
                .table
                .get(prompt)
                .cloned()
                .ok_or_else(|| GenerationError::UnknownKey(prompt.to_owned())),
            StubKind::Identity => self.extract_payload(prompt).map(str::to_owned),
            StubKind::NoiseSuffix => {
                let payload = self.extract_payload(prompt)?;
                Ok(format!("{payload} <tok{}>", self.seed))
            }
            StubKind::ContentWords => {
                let payload = self.extract_payload(prompt)?;
                let stopwords = crate::augment::default_stopwords();
                let words: Vec<String> = crate::text::words_without_punctuation(payload)
                    .into_iter()
                    .filter(|w| !stopwords.contains(&w.to_lowercase()))
                    .collect();
                if words.is_empty() {
                    Ok(payload.to_owned())
                } else {
                    Ok(words.join(" "))
                }
            }
        }
    }
}

/// Wraps a client and counts the requests that reach it.
#[derive(Debug)]
pub struct CountingClient<C> {
    inner: C,
    calls: AtomicUsize,
}

impl<C> CountingClient<C> {
    pub fn new(inner: C) -> Self {
        Self {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::SeqCst);
    }
}

impl<C: GenerativeClient> GenerativeClient for CountingClient<C> {
    fn provider(&self) -> &str {
        self.inner.provider()
    }

    fn model(&self) -> &str {
        self.inner.model()
    }

    fn complete(&self, prompt: &str, params: &GenerationParams) -> Result<String, GenerationError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.complete(prompt, params)
    }
}

/// Wraps a client and sleeps a fixed time before every request, simulating
/// network and inference latency.
#[derive(Debug)]
pub struct LatencyClient<C> {
    inner: C,
    delay: Duration,
}

impl<C> LatencyClient<C> {
    pub fn new(inner: C, delay: Duration) -> Self {
        Self { inner, delay }
    }
}

impl<C: GenerativeClient> GenerativeClient for LatencyClient<C> {
    fn provider(&self) -> &str {
        self.inner.provider()
    }

    fn model(&self) -> &str {
        self.inner.model()
    }

    fn complete(&self, prompt: &str, params: &GenerationParams) -> Result<String, GenerationError> {
        std::thread::sleep(self.delay);
        self.inner.complete(prompt, params)
    }
}

impl<C: GenerativeClient + ?Sized> GenerativeClient for Box<C> {
    fn provider(&self) -> &str {
        (**self).provider()
    }

    fn model(&self) -> &str {
        (**self).model()
    }

    fn complete(&self, prompt: &str, params: &GenerationParams) -> Result<String, GenerationError> {
        (**self).complete(prompt, params)
    }

    fn generator_id(&self) -> String {
        (**self).generator_id()
    }
}

impl<C: GenerativeClient + ?Sized> GenerativeClient for std::sync::Arc<C> {
    fn provider(&self) -> &str {
        (**self).provider()
    }

    fn model(&self) -> &str {
        (**self).model()
    }

    fn complete(&self, prompt: &str, params: &GenerationParams) -> Result<String, GenerationError> {
        (**self).complete(prompt, params)
    }

    fn generator_id(&self) -> String {
        (**self).generator_id()
    }
}
