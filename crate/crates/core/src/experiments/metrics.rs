//! Evaluation metrics.

use crate::error::{Error, Result};

/// Mean over classes of per-class recall, i.e. accuracy with every instance
/// weighted by the inverse size of its class.
pub fn balanced_accuracy(predictions: &[u8], labels: &[u8]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let mut hits = [0usize; 2];
    let mut totals = [0usize; 2];
    for (&p, &l) in predictions.iter().zip(labels) {
        if l > 1 {
            return Err(Error::Argument(format!("label {l} is not binary")));
        }
        totals[l as usize] += 1;
        if p == l {
            hits[l as usize] += 1;
        }
    }
    if totals.contains(&0) {
        return Err(Error::DegenerateData(
            "balanced accuracy needs both classes among the labels".into(),
        ));
    }
    Ok((hits[0] as f64 / totals[0] as f64 + hits[1] as f64 / totals[1] as f64) / 2.0)
}

/// Mean and sample standard deviation (n − 1). The std of a single value is 0.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
