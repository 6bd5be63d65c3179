use super::dataset::BimodalDataset;
use crate::nn::Matrix;

/// Original rows, then a copy with `y` zeroed, then a copy with `x` zeroed.
/// Ids of the copies get `#x` / `#y` suffixes naming the modality kept.
pub fn augment_single_modality(ds: &BimodalDataset) -> BimodalDataset {
    let n = ds.len();
    let zx = Matrix::zeros(n, ds.dim_x());
    let zy = Matrix::zeros(n, ds.dim_y());
    let stack = |a: &Matrix, b: &Matrix, c: &Matrix| Matrix::vstack(&[a, b, c]).expect("equal widths");
    let mut ids = ds.ids.clone();
    ids.extend(ds.ids.iter().map(|id| format!("{id}#x")));
    ids.extend(ds.ids.iter().map(|id| format!("{id}#y")));
    BimodalDataset {
        ids,
        x: stack(&ds.x, &ds.x, &zx),
        y: stack(&ds.y, &zy, &ds.y),
        labels: ds.labels.repeat(3),
        x_names: ds.x_names.clone(),
        y_names: ds.y_names.clone(),
    }
}
