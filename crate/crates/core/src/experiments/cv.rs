use serde::{Deserialize, Serialize};

use super::metrics::mean_std;
use super::train::{train_model, TrainOptions, TrainOutcome, TrainReport};
use crate::arch::config::ArchConfig;
use crate::data::dataset::BimodalDataset;
use crate::data::folds::{make_folds, FoldPlan};
use crate::data::norm::{apply_normalization, fit_normalization, NormStats};
use crate::error::{Error, Result};
use crate::exec::{try_map_jobs, Execution};

/// Five-fold results for one configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub config: ArchConfig,
    pub options: TrainOptions,
    /// Seed of the fold plan; fold `i` of cell `c` trains with
    /// `seed + i + c`.
    pub seed: u64,
    pub cell: usize,
    pub folds: Vec<TrainReport>,
    pub mean: f64,
    /// Sample std over folds.
    pub std: f64,
    pub mean_y_zeroed: f64,
    pub std_y_zeroed: f64,
    pub mean_embedding_correlation: Option<f64>,
}

impl CvReport {
    pub fn fold_accuracies(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.test_balanced_accuracy).collect()
    }

    /// Per-fold λ after resolving `auto` (CorrNet only).
    pub fn lambdas(&self) -> Vec<f64> {
        self.folds.iter().filter_map(|f| f.lambda).collect()
    }

    fn from_folds(config: ArchConfig, options: TrainOptions, seed: u64, cell: usize, folds: Vec<TrainReport>) -> Self {
        let (mean, std) = mean_std(&folds.iter().map(|f| f.test_balanced_accuracy).collect::<Vec<_>>());
        let (mean_y_zeroed, std_y_zeroed) =
            mean_std(&folds.iter().map(|f| f.test_balanced_accuracy_y_zeroed).collect::<Vec<_>>());
        let corrs: Option<Vec<f64>> = folds.iter().map(|f| f.test_embedding_correlation).collect();
        CvReport {
            config,
            options,
            seed,
            cell,
            mean,
            std,
            mean_y_zeroed,
            std_y_zeroed,
            mean_embedding_correlation: corrs.map(|c| mean_std(&c).0),
            folds,
        }
    }
}

/// Fold plan and per-fold normalization statistics for a dataset.
pub fn prepare_folds(ds: &BimodalDataset, seed: u64) -> Result<(FoldPlan, Vec<NormStats>)> {
    let plan = make_folds(ds.len(), seed)?;
    let stats = plan
        .folds
        .iter()
        .map(|f| fit_normalization(ds, &f.train))
        .collect::<Result<Vec<_>>>()?;
    Ok((plan, stats))
}

/// Five-fold cross-validation of `cfg` on raw (unnormalized) data. The
/// fold plan is seeded with `cfg.seed`; normalization is fitted on each
/// fold's training rows.
pub fn run_cv(cfg: &ArchConfig, ds: &BimodalDataset, opts: TrainOptions, exec: Execution) -> Result<CvReport> {
    run_cv_cell(cfg, ds, opts, 0, exec)
}

/// [`run_cv`] for sweep cell `cell`, which offsets every fold's seed.
pub fn run_cv_cell(
    cfg: &ArchConfig,
    ds: &BimodalDataset,
    opts: TrainOptions,
    cell: usize,
    exec: Execution,
) -> Result<CvReport> {
    cfg.validate()?;
    let (plan, stats) = prepare_folds(ds, cfg.seed)?;
    let jobs: Vec<usize> = (0..plan.folds.len()).collect();
    let folds = try_map_jobs(exec, &jobs, |_, &i| {
        fold_job(cfg, ds, &plan, &stats[i], opts, i, cell).map(|o| o.report)
    })?;
    Ok(CvReport::from_folds(cfg.clone(), opts, cfg.seed, cell, folds))
}

/// Trains fold `fold` of the five-fold plan exactly as [`run_cv`] would and
/// keeps the model.
pub fn train_fold(cfg: &ArchConfig, ds: &BimodalDataset, opts: TrainOptions, fold: usize) -> Result<TrainOutcome> {
    cfg.validate()?;
    let plan = make_folds(ds.len(), cfg.seed)?;
    if fold >= plan.folds.len() {
        return Err(Error::Argument(format!("fold must be below {}, got {fold}", plan.folds.len())));
    }
    let stats = fit_normalization(ds, &plan.folds[fold].train)?;
    fold_job(cfg, ds, &plan, &stats, opts, fold, 0)
}

fn fold_job(
    cfg: &ArchConfig,
    ds: &BimodalDataset,
    plan: &FoldPlan,
    stats: &NormStats,
    opts: TrainOptions,
    i: usize,
    cell: usize,
) -> Result<TrainOutcome> {
    let tag = |e: Error| Error::Fold {
        fold: i,
        source: Box::new(e),
    };
    let normalized = apply_normalization(ds, stats).map_err(tag)?;
    let mut fold_cfg = cfg.clone();
    fold_cfg.seed = cfg.seed + i as u64 + cell as u64;
    let mut out = train_model(&fold_cfg, &normalized, &plan.folds[i], i, opts).map_err(tag)?;
    // the report echoes the base config so re-running it reproduces the cell
    out.report.config = cfg.clone();
    Ok(out)
}
