//! Two-phase training of one model on one fold.
//!
//! Multimodal kinds first minimize their representation loss and keep the
//! epoch with the lowest validation loss, then train the classification
//! head on frozen embeddings and keep the epoch with the best validation
//! balanced accuracy. The baseline trains body and head together in one
//! supervised phase selected on validation balanced accuracy. Test rows are
//! touched once, after selection.

use rand::seq::index::sample;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arch::baseline::matched_baseline_config;
use crate::arch::config::{ArchConfig, ArchKind, Lambda};
use crate::arch::embed::embed;
use crate::arch::head::{argmax, class_weights, train_head, HeadTraining};
use crate::arch::losses::{auto_lambda, baseline_loss, representation_loss};
use crate::arch::model::{build_model, MultimodalModel};
use crate::data::augment::augment_single_modality;
use crate::data::batch::minibatches;
use crate::data::dataset::BimodalDataset;
use crate::data::folds::Fold;
use crate::error::{Error, Result};
use crate::experiments::metrics::balanced_accuracy;
use crate::nn::loss::weighted_cross_entropy;
use crate::nn::{correlation_loss, AdamState, InitScheme, Matrix};

/// Rows drawn from the training split to estimate λ and to calibrate LSUV.
pub const SAMPLE_ROWS: usize = 1024;

const STREAM_INIT: u64 = 1;
const STREAM_BATCHES: u64 = 2;
const STREAM_HEAD: u64 = 3;
const STREAM_SAMPLE: u64 = 4;

/// Independent seed for one random stream of a run (splitmix64 finalizer).
pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainOptions {
    /// Train on the original rows plus copies with one modality zeroed.
    pub augment_train: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    MinValLoss,
    MaxValBalancedAccuracy,
}

/// Per-epoch history of one training phase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseLog {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    /// Empty for the representation phase.
    pub val_balanced_accuracy: Vec<f64>,
    pub selection: Selection,
    /// Zero-based.
    pub selected_epoch: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// The config as given; for the baseline, `layer_width` is the nominal
    /// width it was matched against.
    pub config: ArchConfig,
    pub options: TrainOptions,
    pub fold: usize,
    /// λ used for CorrNet, after resolving `auto`.
    pub lambda: Option<f64>,
    /// Width the baseline was widened to for parameter parity.
    pub matched_width: Option<usize>,
    pub param_count: usize,
    pub train_rows: usize,
    pub representation: Option<PhaseLog>,
    pub classifier: PhaseLog,
    pub test_balanced_accuracy: f64,
    /// Test rows with the binary modality replaced by zeros.
    pub test_balanced_accuracy_y_zeroed: f64,
    /// Mean per-dimension Pearson correlation of the single-modality test
    /// embeddings.
    pub test_embedding_correlation: Option<f64>,
}

/// A trained model and its report.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub report: TrainReport,
    pub model: MultimodalModel,
}

struct Split {
    x: Matrix,
    y: Matrix,
    labels: Vec<u8>,
}

impl Split {
    fn of(ds: &BimodalDataset, rows: &[usize]) -> Split {
        Split {
            x: ds.x.select_rows(rows),
            y: ds.y.select_rows(rows),
            labels: ds.labels_at(rows),
        }
    }

    fn rows(&self, idx: &[usize]) -> (Matrix, Matrix, Vec<u8>) {
        (
            self.x.select_rows(idx),
            self.y.select_rows(idx),
            idx.iter().map(|&i| self.labels[i]).collect(),
        )
    }
}

fn check_fold(ds: &BimodalDataset, fold: &Fold) -> Result<()> {
    for (name, rows) in [("train", &fold.train), ("val", &fold.val), ("test", &fold.test)] {
        if rows.is_empty() {
            return Err(Error::Argument(format!("fold has an empty {name} split")));
        }
        if let Some(&r) = rows.iter().find(|&&r| r >= ds.len()) {
            return Err(Error::Argument(format!("{name} row {r} out of range for {} rows", ds.len())));
        }
    }
    Ok(())
}

/// Trains `cfg` on an already normalized dataset and evaluates on the fold's
/// test rows. `fold_index` is recorded in the report only.
pub fn train_model(
    cfg: &ArchConfig,
    ds: &BimodalDataset,
    fold: &Fold,
    fold_index: usize,
    opts: TrainOptions,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if cfg.dim_x != ds.dim_x() || cfg.dim_y != ds.dim_y() {
        return Err(Error::Config(format!(
            "config dims ({}, {}) do not match data dims ({}, {})",
            cfg.dim_x,
            cfg.dim_y,
            ds.dim_x(),
            ds.dim_y()
        )));
    }
    check_fold(ds, fold)?;
    let train = if opts.augment_train {
        let a = augment_single_modality(&ds.subset(&fold.train));
        Split {
            x: a.x,
            y: a.y,
            labels: a.labels,
        }
    } else {
        Split::of(ds, &fold.train)
    };
    let val = Split::of(ds, &fold.val);
    let test = Split::of(ds, &fold.test);

    let sample_idx: Vec<usize> = {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, STREAM_SAMPLE));
        let n = train.labels.len();
        let mut v = sample(&mut rng, n, n.min(SAMPLE_ROWS)).into_vec();
        v.sort_unstable();
        v
    };
    let (sx, sy, _) = train.rows(&sample_idx);

    let (model_cfg, matched_width) = if cfg.kind == ArchKind::Baseline {
        let m = matched_baseline_config(cfg)?;
        let w = m.layer_width;
        (m, Some(w))
    } else {
        (cfg.clone(), None)
    };
    let mut model = build_model(&model_cfg)?;
    let calib = (cfg.init == InitScheme::Lsuv).then_some((&sx, &sy));
    model.initialize(cfg.init, sub_seed(cfg.seed, STREAM_INIT), calib)?;

    let (lambda, representation, classifier) = if cfg.kind == ArchKind::Baseline {
        let log = train_baseline(&mut model, cfg, &train, &val)?;
        (None, None, log)
    } else {
        let lambda = match (cfg.kind, cfg.lambda) {
            (ArchKind::CorrNet, Lambda::Value(v)) => Some(v),
            (ArchKind::CorrNet, Lambda::Auto) => {
                let l = auto_lambda(&model, &sx, &sy)?;
                log::info!("fold {fold_index}: auto lambda = {l}");
                Some(l)
            }
            _ => None,
        };
        let rep = train_representation(&mut model, cfg, lambda.unwrap_or(0.0), &train, &val)?;
        let head = fit_head(&mut model, cfg, &train, &val)?;
        (lambda, Some(rep), head)
    };

    let predict_on = |y: &Matrix| -> Result<f64> {
        let emb = embed(&model, Some(&test.x), Some(y))?;
        balanced_accuracy(&argmax(&model.head.infer(emb.matrix())?), &test.labels)
    };
    let test_ba = predict_on(&test.y)?;
    let test_ba_zeroed = predict_on(&Matrix::zeros(test.y.rows(), test.y.cols()))?;
    let corr = if cfg.kind == ArchKind::Baseline {
        None
    } else {
        Some(embedding_correlation(&model, &test.x, &test.y)?)
    };

    Ok(TrainOutcome {
        report: TrainReport {
            config: cfg.clone(),
            options: opts,
            fold: fold_index,
            lambda,
            matched_width,
            param_count: model.total_param_count(),
            train_rows: train.labels.len(),
            representation,
            classifier,
            test_balanced_accuracy: test_ba,
            test_balanced_accuracy_y_zeroed: test_ba_zeroed,
            test_embedding_correlation: corr,
        },
        model,
    })
}

/// Mean per-dimension Pearson correlation between the embeddings of `x`
/// alone and `y` alone.
pub fn embedding_correlation(model: &MultimodalModel, x: &Matrix, y: &Matrix) -> Result<f64> {
    let hx = embed(model, Some(x), None)?.into_matrix();
    let hy = embed(model, None, Some(y))?.into_matrix();
    Ok(correlation_loss(&hx, &hy)?.value / hx.cols() as f64)
}

fn train_representation(
    model: &mut MultimodalModel,
    cfg: &ArchConfig,
    lambda: f64,
    train: &Split,
    val: &Split,
) -> Result<PhaseLog> {
    let mut adam = AdamState::with_lr(cfg.lr)?;
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, STREAM_BATCHES));
    let n = train.labels.len();
    let mut log = PhaseLog {
        train_loss: Vec::with_capacity(cfg.epochs),
        val_loss: Vec::with_capacity(cfg.epochs),
        val_balanced_accuracy: Vec::new(),
        selection: Selection::MinValLoss,
        selected_epoch: 0,
    };
    let mut best: Option<(f64, MultimodalModel)> = None;
    for epoch in 0..cfg.epochs {
        let mut total = 0.0;
        for (b, idx) in minibatches(n, cfg.batch_size, &mut rng).iter().enumerate() {
            let (xb, yb, _) = train.rows(idx);
            let eval = representation_loss(model, &xb, &yb, lambda, true)?;
            if !eval.loss.is_finite() {
                return Err(Error::Diverged { epoch, batch: b });
            }
            total += eval.loss * idx.len() as f64;
            let grads = eval.grads.expect("gradients requested");
            adam.step(&mut model.params_mut(), &grads.flat())?;
        }
        let v = representation_loss(model, &val.x, &val.y, lambda, false)?.loss;
        if !v.is_finite() {
            return Err(Error::Diverged { epoch, batch: 0 });
        }
        log.train_loss.push(total / n as f64);
        log.val_loss.push(v);
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, model.clone()));
            log.selected_epoch = epoch;
        }
        log::debug!("{} epoch {epoch}: train {:.6} val {v:.6}", cfg.kind, total / n as f64);
    }
    if let Some((_, m)) = best {
        *model = m;
    }
    Ok(log)
}

fn fit_head(model: &mut MultimodalModel, cfg: &ArchConfig, train: &Split, val: &Split) -> Result<PhaseLog> {
    let emb_train = embed(model, Some(&train.x), Some(&train.y))?.into_matrix();
    let emb_val = embed(model, Some(&val.x), Some(&val.y))?.into_matrix();
    let opts = HeadTraining {
        epochs: cfg.epochs,
        lr: cfg.lr,
        batch_size: cfg.batch_size,
        seed: sub_seed(cfg.seed, STREAM_HEAD),
    };
    let fit = train_head(
        &mut model.head,
        &emb_train,
        &train.labels,
        Some((&emb_val, &val.labels)),
        &opts,
    )?;
    Ok(PhaseLog {
        train_loss: fit.train_loss,
        val_loss: fit.val_loss,
        val_balanced_accuracy: fit.val_balanced_accuracy,
        selection: Selection::MaxValBalancedAccuracy,
        selected_epoch: fit.selected_epoch,
    })
}

fn train_baseline(model: &mut MultimodalModel, cfg: &ArchConfig, train: &Split, val: &Split) -> Result<PhaseLog> {
    let weights = class_weights(&train.labels)?;
    let mut adam = AdamState::with_lr(cfg.lr)?;
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, STREAM_BATCHES));
    let n = train.labels.len();
    let mut log = PhaseLog {
        train_loss: Vec::with_capacity(cfg.epochs),
        val_loss: Vec::with_capacity(cfg.epochs),
        val_balanced_accuracy: Vec::with_capacity(cfg.epochs),
        selection: Selection::MaxValBalancedAccuracy,
        selected_epoch: 0,
    };
    let mut best: Option<(f64, MultimodalModel)> = None;
    for epoch in 0..cfg.epochs {
        let mut total = 0.0;
        for (b, idx) in minibatches(n, cfg.batch_size, &mut rng).iter().enumerate() {
            let (xb, yb, lb) = train.rows(idx);
            let (loss, grads) = baseline_loss(model, &xb, &yb, &lb, &weights, true)?;
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, batch: b });
            }
            total += loss * idx.len() as f64;
            let grads = grads.expect("gradients requested");
            adam.step(&mut model.params_with_head_mut(), &grads.flat())?;
        }
        let emb = embed(model, Some(&val.x), Some(&val.y))?.into_matrix();
        let logits = model.head.infer(&emb)?;
        let (v, _) = weighted_cross_entropy(&logits, &val.labels, &weights)?;
        let ba = balanced_accuracy(&argmax(&logits), &val.labels)?;
        log.train_loss.push(total / n as f64);
        log.val_loss.push(v);
        log.val_balanced_accuracy.push(ba);
        if best.as_ref().is_none_or(|(b, _)| ba > *b) {
            best = Some((ba, model.clone()));
            log.selected_epoch = epoch;
        }
    }
    if let Some((_, m)) = best {
        *model = m;
    }
    Ok(log)
}
