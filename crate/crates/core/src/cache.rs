//! Content-addressed persistent cache for completions and embeddings.
//!
//! Entries live at `<root>/<namespace>/<first two hex chars>/<digest>` with a
//! `<digest>.meta.json` sidecar describing the request. Writes go to a
//! temporary file in the same directory and are renamed into place, so a
//! reader sees either nothing or a complete value.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "GASE_CACHE_DIR";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache storage error at {path}: {source}")]
    Storage {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt cache entry: {0}")]
    Corrupt(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Namespace {
    Gen,
    Embed,
}

impl Namespace {
    pub fn as_str(self) -> &'static str {
        match self {
            Namespace::Gen => "gen",
            Namespace::Embed => "embed",
        }
    }
}

/// What a cache key is computed from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyMaterial<'a> {
    pub namespace: Namespace,
    pub provider: &'a str,
    pub model: &'a str,
    /// Prompt template id, `-` when not applicable.
    pub template: &'a str,
    pub input: &'a str,
    pub params: &'a serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey {
    namespace: Namespace,
    digest: String,
}

impl CacheKey {
    /// Hashes the canonical JSON form of `material`. Object keys are sorted at
    /// every depth and reals use the shortest round-trip decimal, so logically
    /// equal parameter objects produce the same key.
    pub fn new(material: &KeyMaterial<'_>) -> Self {
        let canonical = canonical_json(material);
        let digest = hex::encode(Sha256::digest(canonical.as_bytes()));
        Self {
            namespace: material.namespace,
            digest,
        }
    }

    pub fn namespace(&self) -> Namespace {
        self.namespace
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }
}

/// serde_json's default map is ordered, so round-tripping through `Value`
/// sorts every object.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("cache key material serializes");
    serde_json::to_string(&value).expect("json value serializes")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Sidecar {
    provider: String,
    model: String,
    template: String,
    created_unix: u64,
}

#[derive(Debug, Default)]
pub struct CacheStats {
    hits: AtomicU64,
    misses: AtomicU64,
    writes: AtomicU64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CacheCounts {
    pub hits: u64,
    pub misses: u64,
    pub writes: u64,
}

impl CacheStats {
    pub fn snapshot(&self) -> CacheCounts {
        CacheCounts {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            writes: self.writes.load(Ordering::Relaxed),
        }
    }
}

#[derive(Debug)]
pub struct Cache {
    root: PathBuf,
    reads_enabled: bool,
    stats: CacheStats,
}

impl Cache {
    pub fn open(root: impl Into<PathBuf>) -> Self {
        Self {
            root: root.into(),
            reads_enabled: true,
            stats: CacheStats::default(),
        }
    }

    /// A cache that never serves reads but still records new values.
    pub fn write_only(root: impl Into<PathBuf>) -> Self {
        Self {
            reads_enabled: false,
            ..Self::open(root)
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn reads_enabled(&self) -> bool {
        self.reads_enabled
    }

    pub fn stats(&self) -> CacheCounts {
        self.stats.snapshot()
    }

    fn entry_path(&self, key: &CacheKey) -> PathBuf {
        self.root
            .join(key.namespace.as_str())
            .join(&key.digest[..2])
            .join(&key.digest)
    }

    pub fn get(&self, key: &CacheKey) -> Result<Option<Vec<u8>>, CacheError> {
        if !self.reads_enabled {
            self.stats.misses.fetch_add(1, Ordering::Relaxed);
            return Ok(None);
        }
        let path = self.entry_path(key);
        match std::fs::read(&path) {
            Ok(bytes) => {
                self.stats.hits.fetch_add(1, Ordering::Relaxed);
                Ok(Some(bytes))
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                self.stats.misses.fetch_add(1, Ordering::Relaxed);
                Ok(None)
            }
            Err(source) => Err(CacheError::Storage { path, source }),
        }
    }

    pub fn put(&self, key: &CacheKey, material: &KeyMaterial<'_>, value: &[u8]) -> Result<(), CacheError> {
        let path = self.entry_path(key);
        let dir = path.parent().expect("entry path has a parent");
        std::fs::create_dir_all(dir).map_err(|source| CacheError::Storage {
            path: dir.to_path_buf(),
            source,
        })?;
        let sidecar = Sidecar {
            provider: material.provider.to_owned(),
            model: material.model.to_owned(),
            template: material.template.to_owned(),
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let meta = serde_json::to_vec_pretty(&sidecar).expect("sidecar serializes");
        atomic_write(dir, &path.with_extension("meta.json"), &meta)?;
        atomic_write(dir, &path, value)?;
        self.stats.writes.fetch_add(1, Ordering::Relaxed);
        Ok(())
    }
}

fn atomic_write(dir: &Path, dest: &Path, bytes: &[u8]) -> Result<(), CacheError> {
    let storage = |source| CacheError::Storage {
        path: dest.to_path_buf(),
        source,
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(storage)?;
    tmp.write_all(bytes).map_err(storage)?;
    tmp.as_file().sync_all().map_err(storage)?;
    tmp.persist(dest).map_err(|e| storage(e.error))?;
    Ok(())
}

/// Encodes an embedding as a little-endian `u32` dimension followed by
/// `dim` little-endian `f32` values.
pub fn encode_vector(values: &[f32]) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + 4 * values.len());
    out.extend_from_slice(&(values.len() as u32).to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_vector(bytes: &[u8]) -> Result<Vec<f32>, CacheError> {
    let (head, body) = bytes
        .split_first_chunk::<4>()
        .ok_or_else(|| CacheError::Corrupt("vector record shorter than its header".into()))?;
    let dim = u32::from_le_bytes(*head) as usize;
    if body.len() != dim * 4 {
        return Err(CacheError::Corrupt(format!(
            "vector record declares dim {dim} but carries {} bytes",
            body.len()
        )));
    }
    Ok(body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}
