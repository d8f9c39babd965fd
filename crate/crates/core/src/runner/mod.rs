//! Experiment orchestration: augment, embed, pool and score datasets.

mod analyze;
mod config;
mod report;
mod timing;

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::{
    parse_stopwords, AugmentCounts, AugmentError, AugmentationRecord, Augmenter, PromptTemplate, Postprocessor,
    TextUnit,
};
use crate::cache::{Cache, CacheCounts, CACHE_DIR_ENV};
use crate::datasets::{self, DatasetError, IrCollection, PcPairs, StsPairs};
use crate::embedprovider::{
    load_word_vectors, EmbedError, EmbeddingProvider, EmbeddingVector, HashBowProvider, HashStubProvider,
    RemoteEmbedder, StaticProvider,
};
use crate::genclient::{
    make_stub, GenerationError, GenerativeClient, HttpGenerator, LatencyClient, StubConfig,
};
use crate::metrics::{self, MetricError, RankedList, SimilarityPairBatch};
use crate::pooling::{pool, EmbeddingBundle, PoolingError};

pub use analyze::{AnalysisReport, AnalysisRow, DatasetAnalysis};
pub use config::{
    DatasetConfig, DatasetSource, EmbeddingConfig, ExperimentConfig, GeneratorConfig, GeneratorSource,
    IrAugmentScope, StubSpec, VariantSlot,
};
pub use report::{by_task, load_reports, parse_csv, render, render_analysis, render_runtime, OutputFormat};
pub use timing::{RuntimeReport, RuntimeRow};

/// Truncation depth for retrieval scoring.
pub const NDCG_DEPTH: usize = 10;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error(transparent)]
    Generation(#[from] GenerationError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Pooling(#[from] PoolingError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Sts,
    Pc,
    Ir,
}

impl Task {
    pub fn metric_name(self) -> &'static str {
        match self {
            Task::Sts => "spearman",
            Task::Pc => "average_precision",
            Task::Ir => "ndcg@10",
        }
    }
}

/// Score of one dataset in percent, or why it failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetScore {
    pub name: String,
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Run bookkeeping kept out of the rendered report so that reports of
/// identical runs compare byte-for-byte.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub config_digest: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub k: usize,
    pub cache: CacheCounts,
    pub augment: AugmentCounts,
    pub degraded_embeddings: u64,
    pub degraded_similarities: u64,
    /// Retrieval queries skipped because none of their judgments is positive.
    pub queries_without_relevant: u64,
    pub failed_datasets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub task: Task,
    pub label: String,
    pub datasets: Vec<DatasetScore>,
    #[serde(skip)]
    pub metadata: RunMetadata,
}

impl ScoreReport {
    /// Unweighted mean over the datasets that produced a score.
    pub fn average(&self) -> Option<f64> {
        let values: Vec<f64> = self.datasets.iter().filter_map(|d| d.value).collect();
        metrics::mean(&values)
    }

    pub fn value(&self, dataset: &str) -> Option<f64> {
        self.datasets.iter().find(|d| d.name == dataset).and_then(|d| d.value)
    }
}

/// A dataset loaded from its configured files.
#[derive(Debug, Clone)]
pub enum DatasetData {
    Sts(StsPairs),
    Pc(PcPairs),
    Ir(IrCollection),
}

impl DatasetData {
    pub fn task(&self) -> Task {
        match self {
            DatasetData::Sts(_) => Task::Sts,
            DatasetData::Pc(_) => Task::Pc,
            DatasetData::Ir(_) => Task::Ir,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub name: String,
    pub task: Task,
    pub data: Result<DatasetData, String>,
}

pub fn load_datasets(config: &ExperimentConfig) -> Vec<LoadedDataset> {
    config
        .datasets
        .iter()
        .map(|d| {
            let (task, data) = match &d.source {
                DatasetSource::Sts { path } => (
                    Task::Sts,
                    datasets::load_sts(&config.resolve(path)).map(DatasetData::Sts),
                ),
                DatasetSource::Pc { path } => (
                    Task::Pc,
                    datasets::load_pc(&config.resolve(path)).map(DatasetData::Pc),
                ),
                DatasetSource::Ir { queries, corpus, qrels } => (
                    Task::Ir,
                    datasets::load_ir(&config.resolve(queries), &config.resolve(corpus), &config.resolve(qrels))
                        .map(DatasetData::Ir),
                ),
            };
            if let Err(e) = &data {
                log::error!("dataset {}: {e}", d.name);
            }
            LoadedDataset {
                name: d.name.clone(),
                task,
                data: data.map_err(|e| e.to_string()),
            }
        })
        .collect()
}

/// How the cache is used for a run.
#[derive(Debug, Clone, Default)]
pub struct CacheOptions {
    /// Overrides the environment variable and the config file.
    pub dir: Option<PathBuf>,
    /// Skip cache reads but still write.
    pub no_cache: bool,
}

impl CacheOptions {
    pub fn open(&self, config: &ExperimentConfig) -> Option<Arc<Cache>> {
        let dir = self
            .dir
            .clone()
            .or_else(|| std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from))
            .or_else(|| config.cache_dir.as_ref().map(|d| config.resolve(d)))?;
        Some(Arc::new(if self.no_cache {
            Cache::write_only(dir)
        } else {
            Cache::open(dir)
        }))
    }
}

/// Instantiates the configured generators. Only environment variable *names*
/// are read here; keys are looked up per request.
pub fn build_generators(config: &ExperimentConfig) -> Result<Vec<Arc<dyn GenerativeClient>>, RunError> {
    config
        .generators
        .iter()
        .map(|g| -> Result<Arc<dyn GenerativeClient>, RunError> {
            match &g.source {
                GeneratorSource::Http(endpoint) => Ok(Arc::new(HttpGenerator::new(endpoint.clone())?)),
                GeneratorSource::Stub(spec) => {
                    let mut table = spec.table.clone();
                    if let Some(path) = &spec.table_path {
                        let path = config.resolve(path);
                        let src = std::fs::read_to_string(&path).map_err(|source| RunError::Io {
                            path: path.display().to_string(),
                            source,
                        })?;
                        let extra: BTreeMap<String, String> =
                            serde_json::from_str(&src).map_err(|e| RunError::Config(e.to_string()))?;
                        table.extend(extra);
                    }
                    let stub = make_stub(
                        spec.stub,
                        StubConfig {
                            seed: spec.seed,
                            table,
                            templates: Vec::new(),
                        },
                    );
                    if spec.delay_ms > 0 {
                        Ok(Arc::new(LatencyClient::new(stub, Duration::from_millis(spec.delay_ms))))
                    } else {
                        Ok(Arc::new(stub))
                    }
                }
            }
        })
        .collect()
}

pub fn build_embedder(
    config: &ExperimentConfig,
    cache: Option<Arc<Cache>>,
) -> Result<Arc<dyn EmbeddingProvider>, RunError> {
    Ok(match &config.embedding {
        EmbeddingConfig::WordVectors { path, id } => {
            let path = config.resolve(path);
            let table = load_word_vectors(&path)?;
            if table.skipped_lines() > 0 {
                log::warn!("{}: skipped {} malformed lines", path.display(), table.skipped_lines());
            }
            let id = id.clone().unwrap_or_else(|| {
                path.file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "word-vectors".to_owned())
            });
            Arc::new(StaticProvider::new(id, table))
        }
        EmbeddingConfig::Remote(endpoint) => Arc::new(RemoteEmbedder::new(endpoint.clone(), cache)?),
        EmbeddingConfig::Hash { dim, seed } => Arc::new(HashStubProvider::new(*dim, *seed)),
        EmbeddingConfig::HashBow { dim, seed } => Arc::new(HashBowProvider::new(*dim, *seed)),
    })
}

/// Pooled embeddings for a list of inputs, with the intermediate pieces kept
/// for analysis.
#[derive(Debug, Clone)]
pub struct Encoded {
    pub pooled: Vec<EmbeddingVector>,
    pub originals: Vec<EmbeddingVector>,
    /// Per input, one record per variant slot.
    pub records: Vec<Vec<AugmentationRecord>>,
    /// Per input, one embedding per variant slot.
    pub variants: Vec<Vec<EmbeddingVector>>,
}

/// A configured experiment with live clients.
pub struct Experiment {
    config: ExperimentConfig,
    augmenter: Augmenter,
    generators: Vec<Arc<dyn GenerativeClient>>,
    embedder: Arc<dyn EmbeddingProvider>,
    cache: Option<Arc<Cache>>,
    workers: rayon::ThreadPool,
}

impl std::fmt::Debug for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Experiment")
            .field("config", &self.config)
            .field("embedder", &self.embedder.id())
            .finish_non_exhaustive()
    }
}

impl Experiment {
    pub fn from_config(config: ExperimentConfig, cache: &CacheOptions) -> Result<Self, RunError> {
        let cache = cache.open(&config);
        let generators = build_generators(&config)?;
        let embedder = build_embedder(&config, cache.clone())?;
        Self::with_clients(config, generators, embedder, cache)
    }

    /// Builds an experiment around caller-supplied clients; `generators` must
    /// line up with `config.generators`.
    pub fn with_clients(
        config: ExperimentConfig,
        generators: Vec<Arc<dyn GenerativeClient>>,
        embedder: Arc<dyn EmbeddingProvider>,
        cache: Option<Arc<Cache>>,
    ) -> Result<Self, RunError> {
        config.validate()?;
        if generators.len() != config.generators.len() {
            return Err(RunError::Config(format!(
                "{} generators configured but {} supplied",
                config.generators.len(),
                generators.len()
            )));
        }
        let mut postprocessor = Postprocessor::default();
        for (g, client) in config.generators.iter().zip(&generators) {
            if let Some(rules) = &g.postprocess {
                postprocessor = postprocessor.with_override(client.generator_id(), rules.clone());
            }
        }
        let mut augmenter = Augmenter::new()
            .with_postprocessor(postprocessor)
            .with_params(config.params.clone())
            .with_seed(config.seed)
            .with_cache(cache.clone());
        if let Some(dir) = &config.templates_dir {
            augmenter = augmenter.with_templates(PromptTemplate::load_dir(&config.resolve(dir))?);
        }
        if let Some(path) = &config.stopwords {
            let path = config.resolve(path);
            let src = std::fs::read_to_string(&path).map_err(|source| RunError::Io {
                path: path.display().to_string(),
                source,
            })?;
            augmenter = augmenter.with_stopwords(parse_stopwords(&src));
        }
        for slot in config.variant_slots() {
            if slot.generator.is_some() && augmenter.template(&slot.strategy.prompt_template_id).is_none() {
                return Err(RunError::Config(format!(
                    "unknown prompt template `{}`",
                    slot.strategy.prompt_template_id
                )));
            }
        }
        let workers = rayon::ThreadPoolBuilder::new()
            .num_threads(config.in_flight())
            .build()
            .map_err(|e| RunError::Config(e.to_string()))?;
        Ok(Self {
            config,
            augmenter,
            generators,
            embedder,
            cache,
            workers,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn augmenter(&self) -> &Augmenter {
        &self.augmenter
    }

    pub fn cache(&self) -> Option<&Arc<Cache>> {
        self.cache.as_ref()
    }

    /// Augments every distinct input text once per variant slot. Work fans
    /// out over the worker pool; results are collected by input position, so
    /// arrival order never matters.
    pub fn augment_all(&self, inputs: &[TextUnit]) -> Result<Vec<Vec<AugmentationRecord>>, RunError> {
        let slots = self.config.variant_slots();
        if slots.is_empty() {
            return Ok(vec![Vec::new(); inputs.len()]);
        }
        let jobs: Vec<(usize, usize)> = (0..inputs.len())
            .flat_map(|i| (0..slots.len()).map(move |s| (i, s)))
            .collect();
        let results: Vec<Result<AugmentationRecord, AugmentError>> = self.workers.install(|| {
            jobs.par_iter()
                .map(|&(i, s)| {
                    let slot = &slots[s];
                    let client = slot.generator.map(|g| self.generators[g].as_ref());
                    self.augmenter.augment(&inputs[i], &slot.strategy, client)
                })
                .collect()
        });
        let mut out = vec![Vec::with_capacity(slots.len()); inputs.len()];
        for ((i, _), r) in jobs.iter().zip(results) {
            out[*i].push(r?);
        }
        Ok(out)
    }

    /// Augments (when `augment` is set), embeds and pools `inputs`.
    pub fn encode(&self, inputs: &[TextUnit], augment: bool) -> Result<Encoded, RunError> {
        // Identical texts share all work.
        let mut unique: Vec<TextUnit> = Vec::new();
        let mut position: HashMap<&str, usize> = HashMap::new();
        let mut index = Vec::with_capacity(inputs.len());
        for input in inputs {
            let at = *position.entry(input.text.as_str()).or_insert_with(|| {
                unique.push(input.clone());
                unique.len() - 1
            });
            index.push(at);
        }
        let records = if augment {
            self.augment_all(&unique)?
        } else {
            vec![Vec::new(); unique.len()]
        };

        let mut texts: Vec<String> = Vec::new();
        let mut text_pos: HashMap<String, usize> = HashMap::new();
        let mut intern = |t: &str| -> usize {
            if let Some(p) = text_pos.get(t) {
                return *p;
            }
            texts.push(t.to_owned());
            text_pos.insert(t.to_owned(), texts.len() - 1);
            texts.len() - 1
        };
        let original_ids: Vec<usize> = unique.iter().map(|u| intern(&u.text)).collect();
        let variant_ids: Vec<Vec<usize>> = records
            .iter()
            .map(|rs| rs.iter().map(|r| intern(&r.text)).collect())
            .collect();
        let vectors = if texts.is_empty() {
            Vec::new()
        } else {
            self.embedder.embed(&texts)?
        };

        let prepare = |v: &EmbeddingVector| {
            if self.config.normalize_before_pool {
                v.l2_normalized()
            } else {
                v.clone()
            }
        };
        let mut pooled_unique = Vec::with_capacity(unique.len());
        let mut originals_unique = Vec::with_capacity(unique.len());
        let mut variants_unique = Vec::with_capacity(unique.len());
        for (o, vs) in original_ids.iter().zip(&variant_ids) {
            let original = vectors[*o].clone();
            let variants: Vec<EmbeddingVector> = vs.iter().map(|v| vectors[*v].clone()).collect();
            let bundle = EmbeddingBundle::new(prepare(&original), variants.iter().map(&prepare).collect())?;
            pooled_unique.push(pool(&bundle, &self.config.pooling)?);
            originals_unique.push(original);
            variants_unique.push(variants);
        }
        Ok(Encoded {
            pooled: index.iter().map(|i| pooled_unique[*i].clone()).collect(),
            originals: index.iter().map(|i| originals_unique[*i].clone()).collect(),
            records: index.iter().map(|i| records[*i].clone()).collect(),
            variants: index.iter().map(|i| variants_unique[*i].clone()).collect(),
        })
    }

    fn augment_enabled(&self) -> bool {
        self.config.k() > 0
    }

    /// Per-pair cosine similarities of the pooled embeddings.
    pub fn pair_similarities(
        &self,
        pairs: &[(TextUnit, TextUnit)],
        tally: &mut Tally,
    ) -> Result<Vec<f64>, RunError> {
        let inputs: Vec<TextUnit> = pairs.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
        let encoded = self.encode(&inputs, self.augment_enabled())?;
        tally.degraded_embeddings += encoded.pooled.iter().filter(|v| v.degraded).count() as u64;
        encoded
            .pooled
            .chunks_exact(2)
            .map(|p| {
                let s = metrics::cosine(&p[0], &p[1])?;
                if s.degraded {
                    tally.degraded_similarities += 1;
                }
                Ok(s.value)
            })
            .collect()
    }

    /// STS similarities per dataset, for comparisons finer than the report.
    pub fn sts_similarities(&self, datasets: &[LoadedDataset]) -> Vec<(String, Result<Vec<f64>, RunError>)> {
        let mut tally = Tally::default();
        datasets
            .iter()
            .filter(|d| d.task == Task::Sts)
            .map(|d| {
                let sims = match &d.data {
                    Ok(DatasetData::Sts(sts)) => self.pair_similarities(&sts_pairs(sts), &mut tally),
                    Ok(_) => Err(RunError::Config("not an STS dataset".into())),
                    Err(e) => Err(RunError::Config(e.clone())),
                };
                (d.name.clone(), sims)
            })
            .collect()
    }

    fn score_sts(&self, sts: &StsPairs, tally: &mut Tally) -> Result<f64, RunError> {
        let sims = self.pair_similarities(&sts_pairs(sts), tally)?;
        Ok(100.0 * metrics::spearman(&SimilarityPairBatch { sims, gold: sts.gold() })?)
    }

    fn score_pc(&self, pc: &PcPairs, tally: &mut Tally) -> Result<f64, RunError> {
        let pairs: Vec<(TextUnit, TextUnit)> = pc
            .rows
            .iter()
            .map(|r| {
                (
                    TextUnit::new(format!("{}/1", r.id), r.sentence1.clone()),
                    TextUnit::new(format!("{}/2", r.id), r.sentence2.clone()),
                )
            })
            .collect();
        let sims = self.pair_similarities(&pairs, tally)?;
        Ok(100.0 * metrics::average_precision(&sims, &pc.labels())?)
    }

    fn score_ir(&self, ir: &IrCollection, tally: &mut Tally) -> Result<f64, RunError> {
        let queries: Vec<TextUnit> = ir
            .queries
            .iter()
            .filter(|q| ir.qrels.contains_key(&q.id))
            .map(|q| TextUnit::new(q.id.clone(), q.text.clone()))
            .collect();
        let corpus: Vec<TextUnit> = ir
            .corpus
            .iter()
            .map(|d| TextUnit::new(d.id.clone(), d.text.clone()))
            .collect();
        let augment_corpus = self.config.ir_augment_scope == IrAugmentScope::QueriesAndCorpus;
        let q = self.encode(&queries, self.augment_enabled())?;
        let c = self.encode(&corpus, self.augment_enabled() && augment_corpus)?;
        let mut scores = Vec::with_capacity(queries.len());
        for (query, qv) in queries.iter().zip(&q.pooled) {
            let ranked = RankedList::new(
                corpus
                    .iter()
                    .zip(&c.pooled)
                    .map(|(d, dv)| Ok((d.id.clone(), metrics::cosine(qv, dv)?.value)))
                    .collect::<Result<Vec<_>, MetricError>>()?,
            );
            match metrics::ndcg_at_k(&ranked, &ir.qrels[&query.id], NDCG_DEPTH) {
                Ok(v) => scores.push(v),
                Err(MetricError::NoRelevant) => {
                    tally.queries_without_relevant += 1;
                    log::warn!("query {} has no relevant documents; skipped", query.id);
                }
                Err(e) => return Err(e.into()),
            }
        }
        let mean = metrics::mean(&scores).ok_or(MetricError::NoRelevant)?;
        Ok(100.0 * mean)
    }

    /// Scores every loaded dataset of `task`. Failures are recorded per
    /// dataset and do not stop the sweep.
    pub fn run(&self, task: Task, datasets: &[LoadedDataset]) -> ScoreReport {
        let started = unix_now();
        let cache_before = self.cache.as_ref().map(|c| c.stats()).unwrap_or_default();
        let augment_before = self.augmenter.counts();
        let mut tally = Tally::default();
        let mut scores = Vec::new();
        for d in datasets.iter().filter(|d| d.task == task) {
            let result = match &d.data {
                Err(e) => Err(e.clone()),
                Ok(data) => match data {
                    DatasetData::Sts(sts) => self.score_sts(sts, &mut tally),
                    DatasetData::Pc(pc) => self.score_pc(pc, &mut tally),
                    DatasetData::Ir(ir) => self.score_ir(ir, &mut tally),
                }
                .map_err(|e| e.to_string()),
            };
            if let Err(e) = &result {
                log::error!("{}: {e}", d.name);
            }
            scores.push(DatasetScore {
                name: d.name.clone(),
                value: result.as_ref().ok().copied(),
                error: result.err(),
            });
        }
        let cache_after = self.cache.as_ref().map(|c| c.stats()).unwrap_or_default();
        let augment_after = self.augmenter.counts();
        let metadata = RunMetadata {
            config_digest: self.config.digest(),
            started_unix: started,
            finished_unix: unix_now(),
            k: self.config.k(),
            cache: CacheCounts {
                hits: cache_after.hits - cache_before.hits,
                misses: cache_after.misses - cache_before.misses,
                writes: cache_after.writes - cache_before.writes,
            },
            augment: AugmentCounts {
                requests: augment_after.requests - augment_before.requests,
                cache_hits: augment_after.cache_hits - augment_before.cache_hits,
                degraded: augment_after.degraded - augment_before.degraded,
            },
            degraded_embeddings: tally.degraded_embeddings,
            degraded_similarities: tally.degraded_similarities,
            queries_without_relevant: tally.queries_without_relevant,
            failed_datasets: scores
                .iter()
                .filter(|s| s.value.is_none())
                .map(|s| s.name.clone())
                .collect(),
        };
        ScoreReport {
            task,
            label: self.config.name.clone(),
            datasets: scores,
            metadata,
        }
    }

    pub fn run_sts(&self, datasets: &[LoadedDataset]) -> ScoreReport {
        self.run(Task::Sts, datasets)
    }

    pub fn run_pc(&self, datasets: &[LoadedDataset]) -> ScoreReport {
        self.run(Task::Pc, datasets)
    }

    pub fn run_ir(&self, datasets: &[LoadedDataset]) -> ScoreReport {
        self.run(Task::Ir, datasets)
    }

    pub fn analyze(&self, datasets: &[LoadedDataset]) -> AnalysisReport {
        analyze::analyze(self, datasets)
    }
}

/// Degradation counters accumulated while scoring.
#[derive(Debug, Default, Clone, Copy)]
pub struct Tally {
    pub degraded_embeddings: u64,
    pub degraded_similarities: u64,
    pub queries_without_relevant: u64,
}

fn sts_pairs(sts: &StsPairs) -> Vec<(TextUnit, TextUnit)> {
    sts.rows
        .iter()
        .map(|r| {
            (
                TextUnit::new(format!("{}/1", r.id), r.sentence1.clone()),
                TextUnit::new(format!("{}/2", r.id), r.sentence2.clone()),
            )
        })
        .collect()
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Loads the config's datasets and runs `task` in one call.
pub fn run_task(config: ExperimentConfig, task: Task, cache: &CacheOptions) -> Result<ScoreReport, RunError> {
    let datasets = load_datasets(&config);
    let experiment = Experiment::from_config(config, cache)?;
    Ok(experiment.run(task, &datasets))
}

pub fn run_sts(config: ExperimentConfig, cache: &CacheOptions) -> Result<ScoreReport, RunError> {
    run_task(config, Task::Sts, cache)
}

pub fn run_pc(config: ExperimentConfig, cache: &CacheOptions) -> Result<ScoreReport, RunError> {
    run_task(config, Task::Pc, cache)
}

pub fn run_ir(config: ExperimentConfig, cache: &CacheOptions) -> Result<ScoreReport, RunError> {
    run_task(config, Task::Ir, cache)
}

pub fn analyze(config: ExperimentConfig, cache: &CacheOptions) -> Result<AnalysisReport, RunError> {
    let datasets = load_datasets(&config);
    let experiment = Experiment::from_config(config, cache)?;
    Ok(experiment.analyze(&datasets))
}

pub use timing::time_run;

/// Writes `bytes` to `path`, creating parent directories.
pub fn write_output(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|source| RunError::Io {
            path: parent.display().to_string(),
            source,
        })?;
    }
    std::fs::write(path, bytes).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })
}
