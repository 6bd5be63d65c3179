//! Loss functions. Each returns the value together with its gradient.

use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Centered sums of squares at or below this are treated as zero variance.
const ZERO_VARIANCE: f64 = 1e-18;

/// Mean squared error over every element, with gradient w.r.t. `pred`.
pub fn mse_loss(pred: &Matrix, target: &Matrix) -> Result<(f64, Matrix)> {
    pred.same_shape(target, "mse_loss")?;
    let n = pred.as_slice().len();
    if n == 0 {
        return Ok((0.0, Matrix::zeros(pred.rows(), pred.cols())));
    }
    let scale = 2.0 / n as f64;
    let mut grad = Matrix::zeros(pred.rows(), pred.cols());
    let mut sum = 0.0;
    for ((g, p), t) in grad
        .as_mut_slice()
        .iter_mut()
        .zip(pred.as_slice())
        .zip(target.as_slice())
    {
        let d = p - t;
        sum += d * d;
        *g = scale * d;
    }
    Ok((sum / n as f64, grad))
}

/// Output of [`correlation_loss`].
#[derive(Clone, Debug)]
pub struct Correlation {
    /// Sum over columns of the Pearson correlation between `hx` and `hy`.
    pub value: f64,
    /// d value / d hx
    pub grad_x: Matrix,
    /// d value / d hy
    pub grad_y: Matrix,
}

/// Sum over columns of the per-column Pearson correlation between two
/// embeddings of the same batch.
///
/// Columns where either side has zero variance contribute nothing.
pub fn correlation_loss(hx: &Matrix, hy: &Matrix) -> Result<Correlation> {
    hx.same_shape(hy, "correlation_loss")?;
    let (n, d) = hx.shape();
    if n < 2 {
        return Err(Error::DegenerateBatch(format!(
            "correlation needs at least 2 rows, got {n}"
        )));
    }
    let mean_x: Vec<f64> = hx.column_sums().into_iter().map(|s| s / n as f64).collect();
    let mean_y: Vec<f64> = hy.column_sums().into_iter().map(|s| s / n as f64).collect();

    let mut sxy = vec![0.0; d];
    let mut sxx = vec![0.0; d];
    let mut syy = vec![0.0; d];
    for r in 0..n {
        for j in 0..d {
            let a = hx.get(r, j) - mean_x[j];
            let b = hy.get(r, j) - mean_y[j];
            sxy[j] += a * b;
            sxx[j] += a * a;
            syy[j] += b * b;
        }
    }

    let mut value = 0.0;
    let mut grad_x = Matrix::zeros(n, d);
    let mut grad_y = Matrix::zeros(n, d);
    for j in 0..d {
        if sxx[j] <= ZERO_VARIANCE || syy[j] <= ZERO_VARIANCE {
            continue;
        }
        let denom = (sxx[j] * syy[j]).sqrt();
        let r_j = sxy[j] / denom;
        value += r_j;
        // Centered vectors sum to zero, so the mean-subtraction term drops out.
        for r in 0..n {
            let a = hx.get(r, j) - mean_x[j];
            let b = hy.get(r, j) - mean_y[j];
            grad_x.set(r, j, b / denom - r_j * a / sxx[j]);
            grad_y.set(r, j, a / denom - r_j * b / syy[j]);
        }
    }
    Ok(Correlation {
        value,
        grad_x,
        grad_y,
    })
}

/// Numerically stable row-wise softmax.
pub fn softmax_rows(logits: &Matrix) -> Matrix {
    let mut out = logits.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

/// Class-weighted softmax cross-entropy, normalised by the total weight of
/// the batch. Returns the loss and its gradient w.r.t. `logits`.
pub fn weighted_cross_entropy(
    logits: &Matrix,
    labels: &[u8],
    class_weights: &[f64],
) -> Result<(f64, Matrix)> {
    if logits.rows() != labels.len() {
        return Err(Error::Shape(format!(
            "{} logit rows for {} labels",
            logits.rows(),
            labels.len()
        )));
    }
    if logits.cols() != class_weights.len() {
        return Err(Error::Shape(format!(
            "{} logit columns for {} class weights",
            logits.cols(),
            class_weights.len()
        )));
    }
    let probs = softmax_rows(logits);
    let total: f64 = labels.iter().map(|&l| class_weights[l as usize]).sum();
    if total <= 0.0 {
        return Err(Error::DegenerateData("batch carries zero class weight".into()));
    }
    let mut loss = 0.0;
    let mut grad = probs.clone();
    for (r, &l) in labels.iter().enumerate() {
        let w = class_weights[l as usize];
        let p = probs.get(r, l as usize).max(f64::MIN_POSITIVE);
        loss -= w * p.ln();
        let row = grad.row_mut(r);
        row[l as usize] -= 1.0;
        for v in row.iter_mut() {
            *v *= w / total;
        }
    }
    Ok((loss / total, grad))
}
