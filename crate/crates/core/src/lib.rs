//! Generatively augmented sentence encoding.
//!
//! An input text is varied by a generative model (paraphrase, summary or
//! keyword extraction) or by a local baseline (random keywords, stopword
//! removal). The original and the variants are embedded, the embeddings are
//! pooled into one joint vector, and the joint vectors are evaluated on
//! semantic textual similarity, pair classification and retrieval tasks.
//!
//! The crate is organised bottom-up:
//!
//! * [`augment`] builds prompts, post-processes generations and implements the
//!   local baselines.
//! * [`genclient`] talks to chat-completion endpoints and provides
//!   deterministic stubs.
//! * [`embedprovider`] turns texts into [`embedprovider::EmbeddingVector`]s.
//! * [`pooling`] combines an original embedding with its variants.
//! * [`metrics`] holds the evaluation math.
//! * [`datasets`] loads STS, pair-classification and retrieval data.
//! * [`cache`] is the content-addressed store that makes runs reproducible.
//! * [`runner`] wires everything together into experiments and reports.

pub mod augment;
pub mod cache;
pub mod datasets;
pub mod embedprovider;
pub mod genclient;
pub mod metrics;
pub mod pooling;
pub mod runner;
pub mod text;

mod retry;

pub use augment::{AugmentationKind, AugmentationRecord, AugmentationStrategy, TextUnit};
pub use embedprovider::EmbeddingVector;
pub use genclient::{GenerationParams, GenerativeClient};
pub use pooling::{PoolingMethod, PoolingSpec};
pub use retry::RetryPolicy;
