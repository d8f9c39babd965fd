use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{build_embedder, build_generators, load_datasets, CacheOptions, Experiment, ExperimentConfig, RunError};
use crate::metrics;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeRow {
    /// `none` for the unaugmented pass, otherwise the strategy name.
    pub strategy: String,
    pub runs_secs: Vec<f64>,
    pub mean_secs: f64,
    /// Sample standard deviation; 0 when there is a single run.
    pub std_secs: f64,
    /// False when the standard deviation is undefined (one run).
    pub std_defined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeReport {
    pub label: String,
    pub repeats: usize,
    pub rows: Vec<RuntimeRow>,
}

/// Wall-clock time of full passes over the configured datasets, once without
/// augmentation and once per configured strategy. Dataset loading and client
/// setup are outside the measured region, and generation results are never
/// served from the cache.
pub fn time_run(config: &ExperimentConfig, repeats: usize, cache: &CacheOptions) -> Result<RuntimeReport, RunError> {
    if repeats == 0 {
        return Err(RunError::Config("repeats must be at least 1".into()));
    }
    let datasets = load_datasets(config);
    let embed_cache = cache.open(config);
    let mut variants = vec![("none".to_owned(), config.with_strategies(Vec::new()))];
    for s in &config.strategies {
        variants.push((s.as_str().to_owned(), config.with_strategies(vec![*s])));
    }
    let mut rows = Vec::with_capacity(variants.len());
    for (strategy, cfg) in variants {
        let generators = build_generators(&cfg)?;
        let embedder = build_embedder(&cfg, embed_cache.clone())?;
        let experiment = Experiment::with_clients(cfg, generators, embedder, None)?;
        let mut runs = Vec::with_capacity(repeats);
        for _ in 0..repeats {
            let start = Instant::now();
            for task in [super::Task::Sts, super::Task::Pc, super::Task::Ir] {
                experiment.run(task, &datasets);
            }
            runs.push(start.elapsed().as_secs_f64());
        }
        let mean = metrics::mean(&runs).unwrap_or(0.0);
        let std = metrics::sample_std(&runs);
        log::info!("{strategy}: mean {mean:.3}s over {repeats} runs");
        rows.push(RuntimeRow {
            strategy,
            runs_secs: runs,
            mean_secs: mean,
            std_secs: std.unwrap_or(0.0),
            std_defined: std.is_some(),
        });
    }
    Ok(RuntimeReport {
        label: config.name.clone(),
        repeats,
        rows,
    })
}
