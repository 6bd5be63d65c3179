//! The three multimodal architectures, the early-fusion baseline, their
//! losses, embeddings, and the classification head.
//!
//! All models share one layout: per-modality encoders feed a mixing stack
//! whose output is the joint representation. Encodings of the two
//! modalities are combined by elementwise sum before mixing, so a missing
//! modality is simply a zero input.
//!
//! | kind     | representation loss                                              | embedding              |
//! |----------|------------------------------------------------------------------|------------------------|
//! | CorrNet  | 6 reconstruction MSEs (joint, x-only, y-only codes) − λ·corr      | mixing output          |
//! | JAE      | 4 MSEs: decoders on `concat(private, shared)` + private-only      | mixing output          |
//! | BiDNN    | `mse(f_xy(x), y) + mse(f_yx(y), x)` with tied central weights     | both central outputs   |
//! | Baseline | none, trained end to end with weighted cross-entropy             | mixing over `concat`   |

pub mod baseline;
pub mod config;
pub mod embed;
pub mod head;
pub mod losses;
pub mod model;
pub mod serialize;

pub use baseline::{build_baseline_matched, matched_baseline_config};
pub use config::{ArchConfig, ArchKind, Lambda};
pub use embed::{embed, Embedding};
pub use head::{class_weights, predict, predict_proba, train_head, HeadFit, HeadTraining};
pub use losses::{auto_lambda, bidnn_loss, corrnet_loss, jae_loss, representation_loss, CorrNetTerms};
pub use model::{build_model, Body, ModelGrads, MultimodalModel};
