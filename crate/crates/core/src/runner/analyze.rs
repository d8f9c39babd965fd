use serde::{Deserialize, Serialize};

use super::{DatasetData, Experiment, LoadedDataset, RunError};
use crate::augment::TextUnit;
use crate::metrics::{self, MetricError};

/// Averages for one variant slot of one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRow {
    pub strategy: String,
    pub generator: String,
    pub original_words: f64,
    pub variant_words: f64,
    /// `variant_words / original_words`.
    pub word_ratio: f64,
    pub jaccard: f64,
    pub cos_orig1_aug1: f64,
    /// The pair columns are absent for single-text datasets (retrieval queries).
    pub cos_orig2_aug2: Option<f64>,
    pub cos_aug1_aug2: Option<f64>,
    pub cos_orig1_orig2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetAnalysis {
    pub name: String,
    pub rows: Vec<AnalysisRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub label: String,
    pub datasets: Vec<DatasetAnalysis>,
}

pub(super) fn analyze(experiment: &Experiment, datasets: &[LoadedDataset]) -> AnalysisReport {
    let datasets = datasets
        .iter()
        .map(|d| {
            let result = match &d.data {
                Err(e) => Err(e.clone()),
                Ok(data) => analyze_dataset(experiment, data).map_err(|e| e.to_string()),
            };
            if let Err(e) = &result {
                log::error!("{}: {e}", d.name);
            }
            DatasetAnalysis {
                name: d.name.clone(),
                rows: result.as_ref().cloned().unwrap_or_default(),
                error: result.err(),
            }
        })
        .collect();
    AnalysisReport {
        label: experiment.config().name.clone(),
        datasets,
    }
}

fn analyze_dataset(experiment: &Experiment, data: &DatasetData) -> Result<Vec<AnalysisRow>, RunError> {
    let (first, second): (Vec<TextUnit>, Option<Vec<TextUnit>>) = match data {
        DatasetData::Sts(sts) => {
            let pairs = super::sts_pairs(sts);
            let (a, b) = pairs.into_iter().unzip();
            (a, Some(b))
        }
        DatasetData::Pc(pc) => {
            let (a, b) = pc
                .rows
                .iter()
                .map(|r| {
                    (
                        TextUnit::new(format!("{}/1", r.id), r.sentence1.clone()),
                        TextUnit::new(format!("{}/2", r.id), r.sentence2.clone()),
                    )
                })
                .unzip();
            (a, Some(b))
        }
        DatasetData::Ir(ir) => (
            ir.queries
                .iter()
                .map(|q| TextUnit::new(q.id.clone(), q.text.clone()))
                .collect(),
            None,
        ),
    };
    let n = first.len();
    let mut inputs = first;
    if let Some(second) = &second {
        inputs.extend(second.iter().cloned());
    }
    let encoded = experiment.encode(&inputs, true)?;
    let slots = experiment.config().variant_slots();
    let cos = |a, b| -> Result<f64, MetricError> { Ok(metrics::cosine(a, b)?.value) };

    let mut rows = Vec::with_capacity(slots.len());
    for (s, slot) in slots.iter().enumerate() {
        let mut original_words = Vec::with_capacity(inputs.len());
        let mut variant_words = Vec::with_capacity(inputs.len());
        let mut jaccard = Vec::with_capacity(inputs.len());
        for (input, records) in inputs.iter().zip(&encoded.records) {
            let variant = &records[s].text;
            original_words.push(metrics::word_count(&input.text) as f64);
            variant_words.push(metrics::word_count(variant) as f64);
            jaccard.push(metrics::jaccard(&input.text, variant));
        }
        let mut o1a1 = Vec::with_capacity(n);
        let mut o2a2 = Vec::new();
        let mut a1a2 = Vec::new();
        let mut o1o2 = Vec::new();
        for i in 0..n {
            o1a1.push(cos(&encoded.originals[i], &encoded.variants[i][s])?);
            if second.is_some() {
                let j = n + i;
                o2a2.push(cos(&encoded.originals[j], &encoded.variants[j][s])?);
                a1a2.push(cos(&encoded.variants[i][s], &encoded.variants[j][s])?);
                o1o2.push(cos(&encoded.originals[i], &encoded.originals[j])?);
            }
        }
        let original_words = metrics::mean(&original_words).unwrap_or(0.0);
        let variant_words = metrics::mean(&variant_words).unwrap_or(0.0);
        rows.push(AnalysisRow {
            strategy: slot.strategy.kind.as_str().to_owned(),
            generator: encoded
                .records
                .first()
                .map(|r| r[s].generator_id.clone())
                .unwrap_or_default(),
            original_words,
            variant_words,
            word_ratio: if original_words > 0.0 {
                variant_words / original_words
            } else {
                0.0
            },
            jaccard: metrics::mean(&jaccard).unwrap_or(0.0),
            cos_orig1_aug1: metrics::mean(&o1a1).unwrap_or(0.0),
            cos_orig2_aug2: metrics::mean(&o2a2),
            cos_aug1_aug2: metrics::mean(&a1a2),
            cos_orig1_orig2: metrics::mean(&o1o2),
        });
    }
    Ok(rows)
}
