//! Dataset ingestion, normalization, fold planning, augmentation, and the
//! synthetic bimodal generator.

pub mod augment;
pub mod batch;
pub mod dataset;
pub mod folds;
pub mod norm;
pub mod synth;

pub use augment::augment_single_modality;
pub use dataset::{load_csv, read_csv, write_csv, write_csv_to, BimodalDataset};
pub use folds::{make_folds, Fold, FoldPlan, FOLDS};
pub use norm::{apply_normalization, fit_normalization, NormStats};
pub use synth::{bayes_scores, gen_synthetic, gen_synthetic_with_truth, SynthConfig, SynthTruth};
