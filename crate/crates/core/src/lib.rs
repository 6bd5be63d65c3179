//! Multimodal deep learning for software flaw prediction.
//!
//! Three joint-representation architectures (CorrNet, JAE, BiDNN) and a
//! parameter-matched early-fusion baseline are trained on paired
//! source-code and binary feature vectors of the same function. Around them
//! sit the data pipeline (CSV ingestion, z-scoring, 5-fold plans, single
//! modality augmentation, a synthetic bimodal generator), a program-graph
//! featurizer, and a cross-validation harness with the ablation sweeps.

pub mod arch;
pub mod data;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod graph;
pub mod nn;

pub use error::{Error, Result};
