//! Training, cross-validation, ablation sweeps, and reports.

pub mod cv;
pub mod metrics;
pub mod report;
pub mod sweep;
pub mod train;

pub use cv::{run_cv, run_cv_cell, train_fold, CvReport};
pub use metrics::{balanced_accuracy, mean_std};
pub use report::{emit_report, ReportFormat, ReportRow};
pub use sweep::{check_sweep, run_sweep, SweepKind, SweepTable};
pub use train::{train_model, TrainOptions, TrainOutcome, TrainReport};
