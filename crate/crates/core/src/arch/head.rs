//! Classification head trained on frozen embeddings.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::batch::minibatches;
use crate::error::{Error, Result};
use crate::experiments::metrics::balanced_accuracy;
use crate::nn::loss::{softmax_rows, weighted_cross_entropy};
use crate::nn::{AdamState, Matrix, Mlp};

/// Per-class weights proportional to the inverse class frequency,
/// normalised as `n / (2 · n_c)`.
pub fn class_weights(labels: &[u8]) -> Result<[f64; 2]> {
    let mut counts = [0usize; 2];
    for &l in labels {
        if l > 1 {
            return Err(Error::Argument(format!("label {l} is not binary")));
        }
        counts[l as usize] += 1;
    }
    if counts.contains(&0) {
        return Err(Error::DegenerateData(format!(
            "training labels contain a single class (counts {counts:?})"
        )));
    }
    let n = labels.len() as f64;
    Ok([n / (2.0 * counts[0] as f64), n / (2.0 * counts[1] as f64)])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeadTraining {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub seed: u64,
}

/// Training history of a head.
#[derive(Clone, Debug, PartialEq)]
pub struct HeadFit {
    pub train_loss: Vec<f64>,
    /// Validation cross-entropy per epoch, weighted with the training class
    /// weights; empty without validation data.
    pub val_loss: Vec<f64>,
    /// Validation balanced accuracy per epoch; empty without validation data.
    pub val_balanced_accuracy: Vec<f64>,
    /// Zero-based epoch whose parameters were kept.
    pub selected_epoch: usize,
}

/// Trains `head` with class-weighted cross-entropy. When validation data is
/// given, the parameters from the epoch with the best validation balanced
/// accuracy are kept (earliest on ties); otherwise the last epoch is kept.
pub fn train_head(
    head: &mut Mlp,
    embeddings: &Matrix,
    labels: &[u8],
    validation: Option<(&Matrix, &[u8])>,
    opts: &HeadTraining,
) -> Result<HeadFit> {
    if embeddings.rows() != labels.len() {
        return Err(Error::Shape(format!(
            "{} embeddings for {} labels",
            embeddings.rows(),
            labels.len()
        )));
    }
    let weights = class_weights(labels)?;
    let mut adam = AdamState::with_lr(opts.lr)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut fit = HeadFit {
        train_loss: Vec::with_capacity(opts.epochs),
        val_loss: Vec::new(),
        val_balanced_accuracy: Vec::new(),
        selected_epoch: opts.epochs.saturating_sub(1),
    };
    let mut best: Option<(f64, Mlp)> = None;
    for epoch in 0..opts.epochs {
        let mut total = 0.0;
        for (b, idx) in minibatches(labels.len(), opts.batch_size, &mut rng).iter().enumerate() {
            let xb = embeddings.select_rows(idx);
            let lb: Vec<u8> = idx.iter().map(|&i| labels[i]).collect();
            let (logits, trace) = head.forward_traced(&xb)?;
            let (loss, dlogits) = weighted_cross_entropy(&logits, &lb, &weights)?;
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, batch: b });
            }
            total += loss * idx.len() as f64;
            let g = head.backward_traced(&trace, &dlogits)?;
            adam.step(&mut head.params_mut(), &g.flat())?;
        }
        fit.train_loss.push(total / labels.len() as f64);
        if let Some((ve, vl)) = validation {
            let logits = head.infer(ve)?;
            fit.val_loss.push(weighted_cross_entropy(&logits, vl, &weights)?.0);
            let ba = balanced_accuracy(&argmax(&logits), vl)?;
            fit.val_balanced_accuracy.push(ba);
            if best.as_ref().is_none_or(|(b, _)| ba > *b) {
                best = Some((ba, head.clone()));
                fit.selected_epoch = epoch;
            }
        }
    }
    if let Some((_, h)) = best {
        *head = h;
    }
    Ok(fit)
}

/// Class probabilities, one row per instance.
pub fn predict_proba(head: &Mlp, embeddings: &Matrix) -> Result<Matrix> {
    Ok(softmax_rows(&head.infer(embeddings)?))
}

/// Predicted labels (argmax of the two logits; ties go to class 0).
pub fn predict(head: &Mlp, embeddings: &Matrix) -> Result<Vec<u8>> {
    Ok(argmax(&head.infer(embeddings)?))
}

pub(crate) fn argmax(logits: &Matrix) -> Vec<u8> {
    (0..logits.rows())
        .map(|r| u8::from(logits.get(r, 1) > logits.get(r, 0)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::model::build_head;
    use crate::nn::testing::random_matrix;
    use crate::nn::{initialize, InitScheme};

    #[test]
    fn weights_follow_inverse_class_size() {
        let mut labels = vec![1u8; 1100];
        labels.extend(vec![0u8; 4142]);
        let w = class_weights(&labels).unwrap();
        assert!((w[1] / w[0] - 4142.0 / 1100.0).abs() < 1e-12);
    }

    #[test]
    fn single_class_is_degenerate() {
        assert!(matches!(class_weights(&[1, 1, 1]), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn separable_embeddings_are_learned() {
        let emb = random_matrix(400, 5, 1);
        let labels: Vec<u8> = (0..400).map(|r| u8::from(emb.get(r, 0) + 0.5 * emb.get(r, 3) > 0.3)).collect();
        let mut head = build_head(5, 16);
        initialize(&mut head, InitScheme::Kaiming, 2, None).unwrap();
        let opts = HeadTraining {
            epochs: 200,
            lr: 1e-2,
            batch_size: 64,
            seed: 3,
        };
        train_head(&mut head, &emb, &labels, None, &opts).unwrap();
        let ba = balanced_accuracy(&predict(&head, &emb).unwrap(), &labels).unwrap();
        assert!(ba >= 0.99, "{ba}");
    }

    #[test]
    fn probabilities_sum_to_one() {
        let mut head = build_head(4, 6);
        initialize(&mut head, InitScheme::Xavier, 2, None).unwrap();
        let p = predict_proba(&head, &random_matrix(10, 4, 5)).unwrap();
        for r in 0..10 {
            assert!((p.row(r).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn validation_selection_keeps_best_epoch() {
        let emb = random_matrix(200, 3, 7);
        let labels: Vec<u8> = (0..200).map(|r| u8::from(emb.get(r, 1) > 0.0)).collect();
        let val = random_matrix(60, 3, 8);
        let vl: Vec<u8> = (0..60).map(|r| u8::from(val.get(r, 1) > 0.0)).collect();
        let mut head = build_head(3, 8);
        initialize(&mut head, InitScheme::Kaiming, 1, None).unwrap();
        let opts = HeadTraining {
            epochs: 20,
            lr: 1e-2,
            batch_size: 32,
            seed: 9,
        };
        let fit = train_head(&mut head, &emb, &labels, Some((&val, &vl)), &opts).unwrap();
        let best = fit.val_balanced_accuracy.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(fit.val_balanced_accuracy[fit.selected_epoch], best);
        let now = balanced_accuracy(&predict(&head, &val).unwrap(), &vl).unwrap();
        assert_eq!(now, best);
    }
}
