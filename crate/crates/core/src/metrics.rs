//! Evaluation and analysis math.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedprovider::EmbeddingVector;
use crate::text;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least two observations, got {0}")]
    TooShort(usize),
    #[error("one side of the correlation is constant")]
    DegenerateInput,
    #[error("non-finite value in input")]
    NonFinite,
    #[error("no positive labels")]
    NoPositives,
    #[error("no relevant documents in qrels")]
    NoRelevant,
}

/// A cosine value; `degraded` marks the zero-vector fallback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    pub value: f64,
    pub degraded: bool,
}

pub fn cosine_slices(a: &[f64], b: &[f64]) -> Result<Similarity, MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::DimMismatch(a.len(), b.len()));
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Ok(Similarity {
            value: 0.0,
            degraded: true,
        });
    }
    // sqrt(na * nb) is exactly na when a == b, so self-similarity is 1.
    let denom = match (na * nb).sqrt() {
        d if d.is_finite() && d > 0.0 => d,
        _ => na.sqrt() * nb.sqrt(),
    };
    Ok(Similarity {
        value: (dot / denom).clamp(-1.0, 1.0),
        degraded: false,
    })
}

/// `dot(a, b) / (|a| |b|)`, or 0 (degraded) when either vector is zero.
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<Similarity, MetricError> {
    cosine_slices(a.values(), b.values())
}

/// Fractional ranks starting at 1; tied values share the mean of the ranks
/// they occupy.
pub fn fractional_ranks(values: &[f64]) -> Result<Vec<f64>, MetricError> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(MetricError::NonFinite);
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start..end hold ranks start+1..=end.
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    Ok(ranks)
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, MetricError> {
    if x.len() != y.len() {
        return Err(MetricError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(MetricError::TooShort(x.len()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricError::DegenerateInput);
    }
    let denom = match (sxx * syy).sqrt() {
        d if d.is_finite() && d > 0.0 => d,
        _ => sxx.sqrt() * syy.sqrt(),
    };
    Ok((sxy / denom).clamp(-1.0, 1.0))
}

/// Predicted similarities paired with gold scores.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SimilarityPairBatch {
    pub sims: Vec<f64>,
    pub gold: Vec<f64>,
}

/// Spearman's rho with tie-averaged ranks: Pearson correlation of the
/// fractional ranks of `sims` and `gold`.
pub fn spearman(batch: &SimilarityPairBatch) -> Result<f64, MetricError> {
    let (x, y) = (&batch.sims, &batch.gold);
    if x.len() != y.len() {
        return Err(MetricError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(MetricError::TooShort(x.len()));
    }
    pearson(&fractional_ranks(x)?, &fractional_ranks(y)?)
}

/// Jaccard similarity of the lowercase, punctuation-free token sets; two
/// empty texts are identical.
pub fn jaccard(a: &str, b: &str) -> f64 {
    let sa: HashSet<String> = text::normalized_words(a).into_iter().collect();
    let sb: HashSet<String> = text::normalized_words(b).into_iter().collect();
    if sa.is_empty() && sb.is_empty() {
        return 1.0;
    }
    let inter = sa.intersection(&sb).count();
    let union = sa.len() + sb.len() - inter;
    inter as f64 / union as f64
}

pub fn word_count(text: &str) -> usize {
    text::tokens(text).count()
}

/// Non-interpolated average precision over a ranking by descending score,
/// ties broken by original index.
pub fn average_precision(scores: &[f64], labels: &[bool]) -> Result<f64, MetricError> {
    if scores.len() != labels.len() {
        return Err(MetricError::LengthMismatch(scores.len(), labels.len()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(MetricError::NonFinite);
    }
    let positives = labels.iter().filter(|l| **l).count();
    if positives == 0 {
        return Err(MetricError::NoPositives);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].partial_cmp(&scores[i]).unwrap_or(Ordering::Equal).then(i.cmp(&j)));
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        if labels[i] {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(sum / positives as f64)
}

/// Documents ordered by score descending, then id ascending.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankedList {
    entries: Vec<(String, f64)>,
}

impl RankedList {
    pub fn new(mut entries: Vec<(String, f64)>) -> Self {
        entries.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then_with(|| a.0.cmp(&b.0)));
        Self { entries }
    }

    /// Takes ids already in rank order.
    pub fn from_ordered_ids<I: IntoIterator<Item = S>, S: Into<String>>(ids: I) -> Self {
        let ids: Vec<String> = ids.into_iter().map(Into::into).collect();
        let n = ids.len();
        Self {
            entries: ids.into_iter().enumerate().map(|(i, id)| (id, (n - i) as f64)).collect(),
        }
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(id, _)| id.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn gain(rel: u32) -> f64 {
    2f64.powi(rel as i32) - 1.0
}

fn discount(rank: usize) -> f64 {
    ((rank + 1) as f64).log2()
}

/// NDCG@k with gain `2^rel - 1` and discount `log2(rank + 1)`.
pub fn ndcg_at_k(ranked: &RankedList, qrels: &HashMap<String, u32>, k: usize) -> Result<f64, MetricError> {
    let mut ideal: Vec<u32> = qrels.values().copied().filter(|r| *r > 0).collect();
    if ideal.is_empty() {
        return Err(MetricError::NoRelevant);
    }
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let idcg: f64 = ideal
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, r)| gain(*r) / discount(i + 1))
        .sum();
    let dcg: f64 = ranked
        .ids()
        .take(k)
        .enumerate()
        .map(|(i, id)| gain(qrels.get(id).copied().unwrap_or(0)) / discount(i + 1))
        .sum();
    Ok(dcg / idcg)
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Sample standard deviation (n - 1 denominator); `None` below two values.
pub fn sample_std(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values)?;
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Some((ss / (values.len() - 1) as f64).sqrt())
}
