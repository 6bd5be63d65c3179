//! Early-fusion baseline sized to match a multimodal model's parameter count.

use super::config::{ArchConfig, ArchKind};
use super::model::{build_model, MultimodalModel};
use crate::error::{Error, Result};

/// Allowed relative gap between baseline and target parameter counts.
pub const PARITY_TOLERANCE: f64 = 0.02;

/// Parameters of a baseline at width `w`, head included: encoder over the
/// concatenated input, `depth` mixing layers, then `Linear(w→w)` and
/// `Linear(w→2)`.
pub fn baseline_param_count(dim_x: usize, dim_y: usize, width: usize, depth: usize) -> usize {
    let w = width;
    let square = w * w + w;
    let encoder = (dim_x + dim_y) * w + w + (depth - 1) * square;
    let mixing = depth * square;
    let head = square + 2 * w + 2;
    encoder + mixing + head
}

/// Head-inclusive parameter count of the multimodal model described by `cfg`.
pub fn multimodal_param_count(cfg: &ArchConfig) -> Result<usize> {
    Ok(build_model(cfg)?.total_param_count())
}

/// Baseline width whose parameter count is closest to `target`, searched
/// over `1..=10·layer_width` (smaller width wins ties).
pub fn match_baseline_width(cfg: &ArchConfig, target: usize) -> Result<usize> {
    if cfg.layer_width == 0 || cfg.layer_depth == 0 {
        return Err(Error::Config("layer width and depth must be at least 1".into()));
    }
    let count = |w| baseline_param_count(cfg.dim_x, cfg.dim_y, w, cfg.layer_depth);
    let (width, closest) = (1..=10 * cfg.layer_width)
        .map(|w| (w, count(w)))
        .min_by_key(|&(_, c)| c.abs_diff(target))
        .expect("non-empty width range");
    let gap = closest.abs_diff(target) as f64 / target.max(1) as f64;
    if gap > PARITY_TOLERANCE {
        return Err(Error::Parity {
            target,
            closest,
            width,
        });
    }
    Ok(width)
}

/// Baseline whose head-inclusive parameter count is within 2% of `target`.
pub fn build_baseline_matched(cfg: &ArchConfig, target: usize) -> Result<MultimodalModel> {
    let width = match_baseline_width(cfg, target)?;
    let mut bcfg = cfg.clone();
    bcfg.kind = ArchKind::Baseline;
    bcfg.layer_width = width;
    build_model(&bcfg)
}

/// Baseline config matched to CorrNet at the same size settings.
pub fn matched_baseline_config(cfg: &ArchConfig) -> Result<ArchConfig> {
    let mut reference = cfg.clone();
    reference.kind = ArchKind::CorrNet;
    let target = multimodal_param_count(&reference)?;
    let mut bcfg = cfg.clone();
    bcfg.kind = ArchKind::Baseline;
    bcfg.layer_width = match_baseline_width(cfg, target)?;
    Ok(bcfg)
}
