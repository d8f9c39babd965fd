//! Pooling of an original embedding with its variant embeddings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::AugmentationKind;
use crate::embedprovider::EmbeddingVector;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PoolingError {
    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("embeddings from different providers: {0} vs {1}")]
    ProviderMismatch(String, String),
    #[error("original weight must lie in [0, 1], got {0}")]
    InvalidWeight(String),
    #[error("no augmentation strategy given")]
    NoStrategies,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolingMethod {
    #[default]
    Mean,
    Max,
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoolingSpec {
    pub method: PoolingMethod,
    /// Weight of the original for [`PoolingMethod::Weighted`]; the rest is
    /// split evenly across the variants.
    pub original_weight: f64,
}

impl Default for PoolingSpec {
    fn default() -> Self {
        Self::mean()
    }
}

impl PoolingSpec {
    pub fn mean() -> Self {
        Self {
            method: PoolingMethod::Mean,
            original_weight: 0.5,
        }
    }

    pub fn max() -> Self {
        Self {
            method: PoolingMethod::Max,
            original_weight: 0.5,
        }
    }

    pub fn weighted(original_weight: f64) -> Self {
        Self {
            method: PoolingMethod::Weighted,
            original_weight,
        }
    }

    pub fn validate(&self) -> Result<(), PoolingError> {
        if self.method == PoolingMethod::Weighted && !(0.0..=1.0).contains(&self.original_weight) {
            return Err(PoolingError::InvalidWeight(self.original_weight.to_string()));
        }
        Ok(())
    }
}

/// An original embedding and the embeddings of its `k` variants.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingBundle {
    original: EmbeddingVector,
    variants: Vec<EmbeddingVector>,
}

impl EmbeddingBundle {
    pub fn new(original: EmbeddingVector, variants: Vec<EmbeddingVector>) -> Result<Self, PoolingError> {
        for v in &variants {
            if v.dim() != original.dim() {
                return Err(PoolingError::DimMismatch {
                    expected: original.dim(),
                    got: v.dim(),
                });
            }
            if v.provider_id() != original.provider_id() {
                return Err(PoolingError::ProviderMismatch(
                    original.provider_id().to_owned(),
                    v.provider_id().to_owned(),
                ));
            }
        }
        Ok(Self { original, variants })
    }

    pub fn original(&self) -> &EmbeddingVector {
        &self.original
    }

    pub fn variants(&self) -> &[EmbeddingVector] {
        &self.variants
    }

    pub fn k(&self) -> usize {
        self.variants.len()
    }
}

/// Combines a bundle into one vector.
///
/// Mean is computed as `o + Σ(v_i - o) / (k + 1)`, which is the arithmetic
/// mean but returns `o` bit-for-bit when every variant equals the original.
pub fn pool(bundle: &EmbeddingBundle, spec: &PoolingSpec) -> Result<EmbeddingVector, PoolingError> {
    spec.validate()?;
    let original = &bundle.original;
    let k = bundle.variants.len();
    if k == 0 {
        return Ok(original.clone());
    }
    let o = original.values();
    let values: Vec<f64> = match spec.method {
        PoolingMethod::Mean => {
            let n = (k + 1) as f64;
            (0..o.len())
                .map(|j| {
                    let shift: f64 = bundle.variants.iter().map(|v| v.values()[j] - o[j]).sum();
                    o[j] + shift / n
                })
                .collect()
        }
        PoolingMethod::Max => (0..o.len())
            .map(|j| bundle.variants.iter().map(|v| v.values()[j]).fold(o[j], f64::max))
            .collect(),
        PoolingMethod::Weighted => {
            let w = spec.original_weight;
            let share = (1.0 - w) / k as f64;
            (0..o.len())
                .map(|j| {
                    let rest: f64 = bundle.variants.iter().map(|v| v.values()[j]).sum();
                    w * o[j] + share * rest
                })
                .collect()
        }
    };
    let degraded = original.degraded || bundle.variants.iter().any(|v| v.degraded);
    Ok(EmbeddingVector::from_parts(values, original.provider_id().to_owned(), degraded))
}

/// Flattens variants from several strategies into one bundle, ordered by
/// strategy (paraphrase, summary, keywords, then the local baselines) and
/// within a strategy in the given order.
pub fn assemble_cross(
    original: EmbeddingVector,
    per_strategy_variants: BTreeMap<AugmentationKind, Vec<EmbeddingVector>>,
) -> Result<EmbeddingBundle, PoolingError> {
    let variants = per_strategy_variants.into_values().flatten().collect();
    EmbeddingBundle::new(original, variants)
}
