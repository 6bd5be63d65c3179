//! Per-feature z-scoring fitted on training rows.

use serde::{Deserialize, Serialize};

use super::dataset::BimodalDataset;
use crate::error::{Error, Result};
use crate::nn::Matrix;

/// Mean and sample std (n − 1) of one modality's features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// True where the feature is constant over the training rows; such
    /// features normalize to exactly 0.
    pub masked: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub x: ColumnStats,
    pub y: ColumnStats,
}

fn column_stats(m: &Matrix, rows: &[usize]) -> ColumnStats {
    let n = rows.len() as f64;
    let mut mean = vec![0.0; m.cols()];
    for &r in rows {
        for (acc, v) in mean.iter_mut().zip(m.row(r)) {
            *acc += v;
        }
    }
    mean.iter_mut().for_each(|v| *v /= n);
    let mut ss = vec![0.0; m.cols()];
    for &r in rows {
        for ((acc, v), mu) in ss.iter_mut().zip(m.row(r)).zip(&mean) {
            *acc += (v - mu) * (v - mu);
        }
    }
    let std: Vec<f64> = ss.iter().map(|s| (s / (n - 1.0)).sqrt()).collect();
    let masked = std.iter().map(|&s| s == 0.0).collect();
    ColumnStats { mean, std, masked }
}

/// Fits statistics on `train` rows only.
pub fn fit_normalization(ds: &BimodalDataset, train: &[usize]) -> Result<NormStats> {
    if train.len() < 2 {
        return Err(Error::DegenerateData(format!(
            "normalization needs at least 2 training rows, got {}",
            train.len()
        )));
    }
    if let Some(&bad) = train.iter().find(|&&r| r >= ds.len()) {
        return Err(Error::Argument(format!("row {bad} out of range for {} rows", ds.len())));
    }
    Ok(NormStats {
        x: column_stats(&ds.x, train),
        y: column_stats(&ds.y, train),
    })
}

fn apply_columns(m: &Matrix, s: &ColumnStats) -> Matrix {
    let mut out = m.clone();
    for r in 0..out.rows() {
        for (c, v) in out.row_mut(r).iter_mut().enumerate() {
            *v = if s.masked[c] { 0.0 } else { (*v - s.mean[c]) / s.std[c] };
        }
    }
    out
}

/// `(v − mean) / std` per feature, with masked features set to 0. Not
/// idempotent: the second application re-centres on the stored statistics.
pub fn apply_normalization(ds: &BimodalDataset, stats: &NormStats) -> Result<BimodalDataset> {
    if stats.x.mean.len() != ds.dim_x() || stats.y.mean.len() != ds.dim_y() {
        return Err(Error::Shape(format!(
            "stats cover {}+{} features, dataset has {}+{}",
            stats.x.mean.len(),
            stats.y.mean.len(),
            ds.dim_x(),
            ds.dim_y()
        )));
    }
    Ok(BimodalDataset {
        x: apply_columns(&ds.x, &stats.x),
        y: apply_columns(&ds.y, &stats.y),
        ..ds.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::testing::random_matrix;

    fn ds(x: Matrix, y: Matrix) -> BimodalDataset {
        let n = x.rows();
        BimodalDataset::new((0..n).map(|i| i.to_string()).collect(), x, y, vec![0; n]).unwrap()
    }

    #[test]
    fn hand_computed_column() {
        let d = ds(Matrix::from_rows(&[[1.0], [2.0], [3.0]]).unwrap(), Matrix::from_rows(&[[5.0], [5.0], [5.0]]).unwrap());
        let s = fit_normalization(&d, &[0, 1, 2]).unwrap();
        assert_eq!(s.x.mean, [2.0]);
        assert_eq!(s.x.std, [1.0]);
        assert_eq!(s.y.masked, [true]);
        let n = apply_normalization(&d, &s).unwrap();
        assert_eq!(n.x.column(0), [-1.0, 0.0, 1.0]);
        assert_eq!(n.y.column(0), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn held_out_rows_do_not_matter() {
        let mut d = ds(random_matrix(30, 4, 1), random_matrix(30, 2, 2));
        let train: Vec<usize> = (0..20).collect();
        let before = fit_normalization(&d, &train).unwrap();
        d.x.set(25, 1, 1e6);
        d.y.set(29, 0, -4.0);
        assert_eq!(fit_normalization(&d, &train).unwrap(), before);
    }

    #[test]
    fn masked_feature_is_zero_in_every_split() {
        let mut x = random_matrix(12, 3, 4);
        for r in 0..8 {
            x.set(r, 2, 7.5);
        }
        let d = ds(x, random_matrix(12, 2, 5));
        let s = fit_normalization(&d, &(0..8).collect::<Vec<_>>()).unwrap();
        let n = apply_normalization(&d, &s).unwrap();
        assert!(n.x.column(2).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn not_idempotent() {
        let d = ds(random_matrix(10, 2, 6).map(|v| 3.0 * v + 2.0), random_matrix(10, 1, 7));
        let s = fit_normalization(&d, &(0..10).collect::<Vec<_>>()).unwrap();
        let once = apply_normalization(&d, &s).unwrap();
        let twice = apply_normalization(&once, &s).unwrap();
        assert!(once.x.max_abs_diff(&twice.x) > 1e-3);
    }

    #[test]
    fn too_few_rows() {
        let d = ds(random_matrix(3, 1, 1), random_matrix(3, 1, 2));
        assert!(fit_normalization(&d, &[0]).is_err());
    }
}
