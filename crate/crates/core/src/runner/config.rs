//! Experiment configuration (TOML).
//!
//! ```toml
//! name = "glove-paraphrase"
//! seed = 1337
//! strategies = ["paraphrase"]
//!
//! [embedding]
//! kind = "word_vectors"
//! path = "glove.840B.300d.txt"
//!
//! [[generators]]
//! kind = "http"
//! base_url = "https://api.openai.com/v1"
//! model = "gpt-3.5-turbo-0125"
//! api_key_env = "OPENAI_API_KEY"
//!
//! [pooling]
//! method = "mean"
//!
//! [[datasets]]
//! name = "STS12"
//! kind = "sts"
//! path = "data/sts12.jsonl"
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::augment::{AugmentationKind, AugmentationStrategy, PostprocessRule};
use crate::embedprovider::EmbeddingEndpoint;
use crate::genclient::{GenerationParams, GeneratorEndpoint, StubKind};
use crate::pooling::PoolingSpec;

use super::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IrAugmentScope {
    #[default]
    QueriesOnly,
    QueriesAndCorpus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSource {
    Http(GeneratorEndpoint),
    Stub(StubSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StubSpec {
    pub stub: StubKind,
    #[serde(default)]
    pub seed: u64,
    /// Simulated latency per request.
    #[serde(default)]
    pub delay_ms: u64,
    #[serde(default)]
    pub table: BTreeMap<String, String>,
    /// JSON object file mapping prompts to responses, merged into `table`.
    #[serde(default)]
    pub table_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    #[serde(flatten)]
    pub source: GeneratorSource,
    /// Per-strategy prompt template ids for this generator.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub templates: BTreeMap<AugmentationKind, String>,
    /// Replaces the default post-processing rules for this generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub postprocess: Option<Vec<PostprocessRule>>,
}

impl GeneratorConfig {
    pub fn stub(kind: StubKind) -> Self {
        Self {
            source: GeneratorSource::Stub(StubSpec {
                stub: kind,
                seed: 0,
                delay_ms: 0,
                table: BTreeMap::new(),
                table_path: None,
            }),
            templates: BTreeMap::new(),
            postprocess: None,
        }
    }

    pub fn http(endpoint: GeneratorEndpoint) -> Self {
        Self {
            source: GeneratorSource::Http(endpoint),
            templates: BTreeMap::new(),
            postprocess: None,
        }
    }

    pub fn max_concurrency(&self) -> usize {
        match &self.source {
            GeneratorSource::Http(e) => e.max_concurrency,
            GeneratorSource::Stub(_) => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EmbeddingConfig {
    WordVectors {
        path: PathBuf,
        #[serde(default)]
        id: Option<String>,
    },
    Remote(EmbeddingEndpoint),
    Hash {
        dim: usize,
        #[serde(default)]
        seed: u64,
    },
    HashBow {
        dim: usize,
        #[serde(default)]
        seed: u64,
    },
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self::HashBow { dim: 64, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSource {
    Sts { path: PathBuf },
    Pc { path: PathBuf },
    Ir { queries: PathBuf, corpus: PathBuf, qrels: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub name: String,
    #[serde(flatten)]
    pub source: DatasetSource,
}

fn default_name() -> String {
    "run".to_owned()
}

fn default_seed() -> u64 {
    1337
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Column label in reports.
    #[serde(default = "default_name")]
    pub name: String,
    /// Seed for local randomness (random keyword extraction).
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Augmentation strategies; several strategies form a cross-augmentation
    /// run and an empty list is the k = 0 baseline.
    #[serde(default)]
    pub strategies: Vec<AugmentationKind>,
    #[serde(default)]
    pub generators: Vec<GeneratorConfig>,
    #[serde(default)]
    pub embedding: EmbeddingConfig,
    #[serde(default)]
    pub pooling: PoolingSpec,
    #[serde(default)]
    pub normalize_before_pool: bool,
    #[serde(default)]
    pub ir_augment_scope: IrAugmentScope,
    #[serde(default)]
    pub params: GenerationParams,
    #[serde(default)]
    pub datasets: Vec<DatasetConfig>,
    #[serde(default)]
    pub templates_dir: Option<PathBuf>,
    #[serde(default)]
    pub stopwords: Option<PathBuf>,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    /// Concurrent augmentation requests; defaults to
    /// `min(max endpoint limit, 8)`.
    #[serde(default)]
    pub max_in_flight: Option<usize>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: default_name(),
            seed: default_seed(),
            strategies: Vec::new(),
            generators: Vec::new(),
            embedding: EmbeddingConfig::default(),
            pooling: PoolingSpec::default(),
            normalize_before_pool: false,
            ir_augment_scope: IrAugmentScope::default(),
            params: GenerationParams::default(),
            datasets: Vec::new(),
            templates_dir: None,
            stopwords: None,
            cache_dir: None,
            max_in_flight: None,
            base_dir: PathBuf::new(),
        }
    }
}

/// One variant produced per input: a strategy, and for generative strategies
/// the index of the generator that produces it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariantSlot {
    pub strategy: AugmentationStrategy,
    pub generator: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_toml_str(src: &str, base_dir: impl Into<PathBuf>) -> Result<Self, RunError> {
        let mut config: Self = toml::from_str(src).map_err(|e| RunError::Config(e.to_string()))?;
        config.base_dir = base_dir.into();
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let src = std::fs::read_to_string(path).map_err(|source| RunError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_str(&src, base)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes to TOML")
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn validate(&self) -> Result<(), RunError> {
        self.pooling.validate().map_err(|e| RunError::Config(e.to_string()))?;
        self.params
            .validate()
            .map_err(|e| RunError::Config(e.to_string()))?;
        let mut seen = std::collections::HashSet::new();
        for s in &self.strategies {
            if !seen.insert(*s) {
                return Err(RunError::Config(format!("strategy `{}` listed twice", s.as_str())));
            }
            if s.is_generative() && self.generators.is_empty() {
                return Err(RunError::Config(format!(
                    "strategy `{}` needs at least one generator",
                    s.as_str()
                )));
            }
        }
        let mut names = std::collections::HashSet::new();
        for d in &self.datasets {
            if !names.insert(d.name.as_str()) {
                return Err(RunError::Config(format!("dataset `{}` listed twice", d.name)));
            }
        }
        Ok(())
    }

    /// Variants per input in pooling order: strategies in their fixed order,
    /// and within a generative strategy one variant per generator.
    pub fn variant_slots(&self) -> Vec<VariantSlot> {
        let mut kinds = self.strategies.clone();
        kinds.sort();
        let mut slots = Vec::new();
        for kind in kinds {
            if kind.is_generative() {
                for (i, g) in self.generators.iter().enumerate() {
                    let template = g
                        .templates
                        .get(&kind)
                        .cloned()
                        .unwrap_or_else(|| kind.default_template_id().to_owned());
                    slots.push(VariantSlot {
                        strategy: AugmentationStrategy::with_template(kind, template),
                        generator: Some(i),
                    });
                }
            } else {
                slots.push(VariantSlot {
                    strategy: AugmentationStrategy::new(kind),
                    generator: None,
                });
            }
        }
        slots
    }

    /// Number of variants pooled with each original.
    pub fn k(&self) -> usize {
        self.variant_slots().len()
    }

    pub fn in_flight(&self) -> usize {
        self.max_in_flight.unwrap_or_else(|| {
            self.generators
                .iter()
                .map(GeneratorConfig::max_concurrency)
                .max()
                .unwrap_or(1)
                .min(8)
        })
        .max(1)
    }

    /// SHA-256 of the canonical JSON form of the configuration.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(crate::cache::canonical_json(self).as_bytes()))
    }

    /// Copy with a different strategy list (used for baselines and timing).
    pub fn with_strategies(&self, strategies: Vec<AugmentationKind>) -> Self {
        Self {
            strategies,
            ..self.clone()
        }
    }
}
