//! Embedding providers: static word vectors, a remote embedding API and
//! deterministic hash-based stubs.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cache::{self, Cache, CacheError, CacheKey, KeyMaterial, Namespace};
use crate::retry::{self, HttpFailure, Limiter, RetryPolicy};
use crate::text;

#[derive(Debug, Error)]
pub enum EmbedError {
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
    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("word-vector file has no valid lines")]
    EmptyFile,
    #[error("word-vector file is inconsistent: {accepted} lines have dim {dim} but {skipped} lines disagree")]
    InconsistentDim { dim: usize, accepted: usize, skipped: usize },
    #[error("embedding contains a non-finite value")]
    NonFinite,
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Cache(#[from] CacheError),
}

impl From<HttpFailure> for EmbedError {
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

/// A fixed-dimension real vector tagged with the provider that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    values: Vec<f64>,
    provider_id: String,
    /// Set for fallback vectors (e.g. all tokens out of vocabulary).
    #[serde(default)]
    pub degraded: bool,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>, provider_id: impl Into<String>) -> Result<Self, EmbedError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(EmbedError::NonFinite);
        }
        Ok(Self {
            values,
            provider_id: provider_id.into(),
            degraded: false,
        })
    }

    pub fn zeros(dim: usize, provider_id: impl Into<String>) -> Self {
        Self {
            values: vec![0.0; dim],
            provider_id: provider_id.into(),
            degraded: true,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn provider_id(&self) -> &str {
        &self.provider_id
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Unit-length copy; zero vectors are returned unchanged.
    pub fn l2_normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        Self {
            values: self.values.iter().map(|v| v / n).collect(),
            ..self.clone()
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    pub(crate) fn from_parts(values: Vec<f64>, provider_id: String, degraded: bool) -> Self {
        Self {
            values,
            provider_id,
            degraded,
        }
    }
}

/// Anything that embeds a batch of texts, one vector per text, in order.
pub trait EmbeddingProvider: Send + Sync {
    fn id(&self) -> &str;

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError>;
}

/// Token-to-vector table loaded from a GloVe-style text file.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVectorTable {
    dim: usize,
    entries: HashMap<String, Vec<f64>>,
    skipped_lines: usize,
}

impl WordVectorTable {
    pub fn from_entries(dim: usize, entries: HashMap<String, Vec<f64>>) -> Result<Self, EmbedError> {
        if let Some(bad) = entries.values().find(|v| v.len() != dim) {
            return Err(EmbedError::DimMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        Ok(Self {
            dim,
            entries,
            skipped_lines: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.entries.get(token).map(Vec::as_slice)
    }

    /// Lines dropped because their arity did not match the table dimension.
    pub fn skipped_lines(&self) -> usize {
        self.skipped_lines
    }

    /// Parses `token v1 v2 ... vd` lines. The first parseable line fixes `d`;
    /// later lines with another arity are skipped and counted, and the first
    /// occurrence of a duplicated token wins.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self, EmbedError> {
        let mut dim = None;
        let mut entries = HashMap::new();
        let mut accepted = 0usize;
        let mut skipped = 0usize;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|source| EmbedError::Io {
                path: format!("line {}", lineno + 1),
                source,
            })?;
            let line = line.trim_end_matches(['\r', '\n']);
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(' ').filter(|f| !f.is_empty());
            let Some(token) = fields.next() else { continue };
            let values: Option<Vec<f64>> = fields
                .map(|f| f.parse::<f64>().ok().filter(|v| v.is_finite()))
                .collect();
            let values = match values {
                Some(v) if !v.is_empty() => v,
                _ => {
                    skipped += 1;
                    log::warn!("word vectors: skipping unparseable line {}", lineno + 1);
                    continue;
                }
            };
            let d = *dim.get_or_insert(values.len());
            if values.len() != d {
                skipped += 1;
                log::warn!(
                    "word vectors: skipping line {} with {} values (expected {d})",
                    lineno + 1,
                    values.len()
                );
                continue;
            }
            accepted += 1;
            entries.entry(token.to_owned()).or_insert(values);
        }
        let dim = dim.ok_or(EmbedError::EmptyFile)?;
        if skipped > accepted {
            return Err(EmbedError::InconsistentDim { dim, accepted, skipped });
        }
        Ok(Self {
            dim,
            entries,
            skipped_lines: skipped,
        })
    }
}

pub fn load_word_vectors(path: &Path) -> Result<WordVectorTable, EmbedError> {
    let file = std::fs::File::open(path).map_err(|source| EmbedError::Io {
        path: path.display().to_string(),
        source,
    })?;
    WordVectorTable::parse(std::io::BufReader::new(file))
}

fn mean_of_rows<'a>(rows: impl Iterator<Item = &'a [f64]>, dim: usize) -> Option<Vec<f64>> {
    let mut sum = vec![0.0; dim];
    let mut n = 0usize;
    for row in rows {
        for (s, v) in sum.iter_mut().zip(row) {
            *s += v;
        }
        n += 1;
    }
    (n > 0).then(|| sum.into_iter().map(|s| s / n as f64).collect())
}

/// Mean of the vectors of the whitespace tokens of `text`, trying each token
/// as written and then lowercased. Returns a degraded zero vector when no
/// token is in the table.
pub fn embed_static(table: &WordVectorTable, text: &str, provider_id: &str) -> EmbeddingVector {
    let lowered: Vec<(&str, String)> = text::tokens(text).map(|t| (t, t.to_lowercase())).collect();
    let rows = lowered
        .iter()
        .filter_map(|(t, lower)| table.get(t).or_else(|| table.get(lower)));
    match mean_of_rows(rows, table.dim) {
        Some(values) => EmbeddingVector::from_parts(values, provider_id.to_owned(), false),
        None => EmbeddingVector::zeros(table.dim, provider_id),
    }
}

#[derive(Debug, Clone)]
pub struct StaticProvider {
    id: String,
    table: Arc<WordVectorTable>,
}

impl StaticProvider {
    pub fn new(id: impl Into<String>, table: WordVectorTable) -> Self {
        Self {
            id: id.into(),
            table: Arc::new(table),
        }
    }

    pub fn table(&self) -> &WordVectorTable {
        &self.table
    }
}

impl EmbeddingProvider for StaticProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        Ok(texts.iter().map(|t| embed_static(&self.table, t, &self.id)).collect())
    }
}

fn hash_values(text: &str, dim: usize, seed: u64) -> Vec<f64> {
    let mut values = Vec::with_capacity(dim);
    let mut block = 0u64;
    while values.len() < dim {
        let mut hasher = Sha256::new();
        hasher.update(seed.to_le_bytes());
        hasher.update(block.to_le_bytes());
        hasher.update(text.as_bytes());
        let digest = hasher.finalize();
        for chunk in digest.chunks_exact(8) {
            if values.len() == dim {
                break;
            }
            let bits = u64::from_le_bytes(chunk.try_into().expect("8-byte chunk")) >> 11;
            values.push(bits as f64 / (1u64 << 53) as f64 * 2.0 - 1.0);
        }
        block += 1;
    }
    values
}

/// Deterministic pseudo-embedding of the whole text: SHA-256 of
/// `(seed, block, text)` expanded into `dim` reals in `[-1, 1]`.
pub fn embed_hash_stub(text: &str, dim: usize, seed: u64) -> EmbeddingVector {
    EmbeddingVector::from_parts(hash_values(text, dim, seed), format!("hash-{dim}-{seed}"), false)
}

/// Whole-text hash embeddings; unrelated texts get unrelated vectors.
#[derive(Debug, Clone)]
pub struct HashStubProvider {
    id: String,
    dim: usize,
    seed: u64,
}

impl HashStubProvider {
    pub fn new(dim: usize, seed: u64) -> Self {
        Self {
            id: format!("hash-{dim}-{seed}"),
            dim,
            seed,
        }
    }
}

impl EmbeddingProvider for HashStubProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        Ok(texts.iter().map(|t| embed_hash_stub(t, self.dim, self.seed)).collect())
    }
}

/// Bag-of-words hash embeddings: every lowercased, punctuation-free token is
/// hashed to a vector and the text vector is their mean. Texts sharing words
/// get similar vectors, which makes lexical effects visible without a model.
#[derive(Debug, Clone)]
pub struct HashBowProvider {
    id: String,
    dim: usize,
    seed: u64,
}

impl HashBowProvider {
    pub fn new(dim: usize, seed: u64) -> Self {
        Self {
            id: format!("hash-bow-{dim}-{seed}"),
            dim,
            seed,
        }
    }

    pub fn embed_one(&self, text: &str) -> EmbeddingVector {
        let rows: Vec<Vec<f64>> = text::normalized_words(text)
            .iter()
            .map(|w| hash_values(w, self.dim, self.seed))
            .collect();
        match mean_of_rows(rows.iter().map(Vec::as_slice), self.dim) {
            Some(values) => EmbeddingVector::from_parts(values, self.id.clone(), false),
            None => EmbeddingVector::zeros(self.dim, self.id.clone()),
        }
    }
}

impl EmbeddingProvider for HashBowProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

fn default_batch_size() -> usize {
    96
}

fn default_timeout() -> Duration {
    Duration::from_secs(60)
}

fn default_max_retries() -> u32 {
    3
}

fn default_retry_base() -> Duration {
    Duration::from_secs(1)
}

fn default_max_concurrency() -> usize {
    4
}

/// An OpenAI-style `/embeddings` endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingEndpoint {
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
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_max_concurrency")]
    pub max_concurrency: usize,
}

impl EmbeddingEndpoint {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model: model.into(),
            provider: None,
            api_key_env: None,
            timeout: default_timeout(),
            max_retries: default_max_retries(),
            retry_base_delay: default_retry_base(),
            batch_size: default_batch_size(),
            max_concurrency: default_max_concurrency(),
        }
    }

    fn retry_policy(&self) -> RetryPolicy {
        RetryPolicy {
            max_retries: self.max_retries,
            base_delay: self.retry_base_delay,
            ..RetryPolicy::default()
        }
    }
}

#[derive(Serialize)]
struct EmbeddingRequest<'a> {
    model: &'a str,
    input: &'a [String],
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    embedding: Vec<f64>,
    #[serde(default)]
    index: Option<usize>,
}

/// Remote embedding client with batching and a per-text cache. Vectors are
/// rounded to `f32` on arrival so cold and cached runs see identical values.
pub struct RemoteEmbedder {
    endpoint: EmbeddingEndpoint,
    id: String,
    provider: String,
    http: reqwest::blocking::Client,
    limiter: Limiter,
    cache: Option<Arc<Cache>>,
}

impl std::fmt::Debug for RemoteEmbedder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteEmbedder").field("endpoint", &self.endpoint).finish()
    }
}

impl RemoteEmbedder {
    pub fn new(endpoint: EmbeddingEndpoint, cache: Option<Arc<Cache>>) -> Result<Self, EmbedError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(endpoint.timeout)
            .build()
            .map_err(|e| EmbedError::Transport(e.to_string()))?;
        let provider = endpoint.provider.clone().unwrap_or_else(|| "http".to_owned());
        Ok(Self {
            id: format!("{provider}/{}", endpoint.model),
            provider,
            limiter: Limiter::new(endpoint.max_concurrency),
            endpoint,
            http,
            cache,
        })
    }

    fn key_material<'a>(&'a self, text: &'a str, params: &'a serde_json::Value) -> KeyMaterial<'a> {
        KeyMaterial {
            namespace: Namespace::Embed,
            provider: &self.provider,
            model: &self.endpoint.model,
            template: "-",
            input: text,
            params,
        }
    }

    fn request_batch(&self, batch: &[String]) -> Result<Vec<Vec<f64>>, EmbedError> {
        let key = match &self.endpoint.api_key_env {
            None => None,
            Some(name) => Some(std::env::var(name).map_err(|_| EmbedError::MissingApiKey(name.clone()))?),
        };
        let body = serde_json::to_vec(&EmbeddingRequest {
            model: &self.endpoint.model,
            input: batch,
        })
        .expect("embedding request serializes");
        let url = format!("{}/embeddings", self.endpoint.base_url.trim_end_matches('/'));
        let _permit = self.limiter.acquire();
        log::debug!("embedding request to {url}: {} texts", batch.len());
        let text = retry::post_json(&self.http, &url, key.as_deref(), &body, &self.endpoint.retry_policy())?;
        let response: EmbeddingResponse =
            serde_json::from_str(&text).map_err(|e| EmbedError::MalformedResponse(e.to_string()))?;
        if response.data.len() != batch.len() {
            return Err(EmbedError::MalformedResponse(format!(
                "{} embeddings for {} inputs",
                response.data.len(),
                batch.len()
            )));
        }
        let mut data = response.data;
        if data.iter().all(|d| d.index.is_some()) {
            data.sort_by_key(|d| d.index);
        }
        Ok(data
            .into_iter()
            .map(|d| d.embedding.into_iter().map(|v| v as f32 as f64).collect())
            .collect())
    }
}

impl EmbeddingProvider for RemoteEmbedder {
    fn id(&self) -> &str {
        &self.id
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        if texts.is_empty() {
            return Err(EmbedError::EmptyBatch);
        }
        let params = serde_json::json!({});
        let mut found: HashMap<&str, Vec<f64>> = HashMap::new();
        if let Some(cache) = &self.cache {
            for t in texts {
                if found.contains_key(t.as_str()) {
                    continue;
                }
                let material = self.key_material(t, &params);
                if let Some(bytes) = cache.get(&CacheKey::new(&material))? {
                    let values = cache::decode_vector(&bytes)?;
                    found.insert(t, values.into_iter().map(f64::from).collect());
                }
            }
        }
        let mut missing: Vec<String> = Vec::new();
        for t in texts {
            if !found.contains_key(t.as_str()) && !missing.contains(t) {
                missing.push(t.clone());
            }
        }
        for batch in missing.chunks(self.endpoint.batch_size.max(1)) {
            let vectors = self.request_batch(batch)?;
            for (t, v) in batch.iter().zip(vectors) {
                if let Some(cache) = &self.cache {
                    let material = self.key_material(t, &params);
                    let as_f32: Vec<f32> = v.iter().map(|x| *x as f32).collect();
                    cache.put(&CacheKey::new(&material), &material, &cache::encode_vector(&as_f32))?;
                }
                let idx = texts.iter().position(|x| x == t).expect("missing text comes from input");
                found.insert(&texts[idx], v);
            }
        }
        let mut out = Vec::with_capacity(texts.len());
        let mut dim = None;
        for t in texts {
            let values = found[t.as_str()].clone();
            let expected = *dim.get_or_insert(values.len());
            if values.len() != expected {
                return Err(EmbedError::DimMismatch {
                    expected,
                    got: values.len(),
                });
            }
            out.push(EmbeddingVector::new(values, self.id.clone())?);
        }
        Ok(out)
    }
}
