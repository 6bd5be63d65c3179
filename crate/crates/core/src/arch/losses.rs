//! Representation losses for the three architectures and the supervised
//! loss of the early-fusion baseline, each with exact gradients.

use super::config::ArchKind;
use super::model::{Autoencoder, Bidnn, Body, EarlyFusion, ModelGrads, MultimodalModel, PrivateBranches};
use crate::error::{Error, Result};
use crate::nn::loss::weighted_cross_entropy;
use crate::nn::{correlation_loss, Matrix, Mlp, MlpGrads};

/// Guards the auto-λ ratio against a vanishing correlation term.
pub const AUTO_LAMBDA_EPS: f64 = 1e-12;

/// Loss value plus gradients when they were requested.
#[derive(Clone, Debug)]
pub struct LossEval {
    pub loss: f64,
    pub grads: Option<ModelGrads>,
}

/// The individual CorrNet loss terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrNetTerms {
    /// Reconstruction MSEs `[x|h_xy, y|h_xy, x|h_x, y|h_x, x|h_y, y|h_y]`.
    pub recon: [f64; 6],
    /// Correlation between `h_x` and `h_y`, summed over dimensions.
    pub corr: f64,
}

impl CorrNetTerms {
    pub fn recon_sum(&self) -> f64 {
        self.recon.iter().sum()
    }

    pub fn total(&self, lambda: f64) -> f64 {
        self.recon_sum() - lambda * self.corr
    }
}

fn check_pair(model: &MultimodalModel, x: &Matrix, y: &Matrix) -> Result<()> {
    if x.rows() != y.rows() {
        return Err(Error::Shape(format!(
            "modalities have {} and {} rows",
            x.rows(),
            y.rows()
        )));
    }
    if x.cols() != model.cfg.dim_x || y.cols() != model.cfg.dim_y {
        return Err(Error::Shape(format!(
            "model expects dims ({}, {}), got ({}, {})",
            model.cfg.dim_x,
            model.cfg.dim_y,
            x.cols(),
            y.cols()
        )));
    }
    Ok(())
}

/// Sum of per-block MSEs for `pred` against `target`, both stacked from
/// `blocks` equal row blocks, and the gradient of that sum.
fn blocked_mse(pred: &Matrix, target: &Matrix, blocks: usize) -> Result<(Vec<f64>, Matrix)> {
    pred.same_shape(target, "reconstruction")?;
    let per_block = pred.rows() / blocks;
    let denom = (per_block * pred.cols()) as f64;
    let mut terms = vec![0.0; blocks];
    let mut grad = Matrix::zeros(pred.rows(), pred.cols());
    if denom == 0.0 {
        return Ok((terms, grad));
    }
    let cols = pred.cols();
    for (i, ((g, p), t)) in grad
        .as_mut_slice()
        .iter_mut()
        .zip(pred.as_slice())
        .zip(target.as_slice())
        .enumerate()
    {
        let d = p - t;
        terms[i / cols / per_block] += d * d;
        *g = 2.0 * d / denom;
    }
    terms.iter_mut().for_each(|t| *t /= denom);
    Ok((terms, grad))
}

/// CorrNet objective: reconstruction of both modalities from the joint code
/// `h_xy` and from each single-modality code `h_x` (y zeroed) and `h_y`
/// (x zeroed), minus `lambda` times the correlation between `h_x` and `h_y`.
pub fn corrnet_loss(
    model: &MultimodalModel,
    x: &Matrix,
    y: &Matrix,
    lambda: f64,
    want_grads: bool,
) -> Result<(LossEval, CorrNetTerms)> {
    let Body::CorrNet(ae) = &model.body else {
        return Err(Error::Config(format!("corrnet_loss on a {} model", model.kind())));
    };
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    check_pair(model, x, y)?;
    corrnet_eval(ae, x, y, lambda, want_grads)
}

fn corrnet_eval(
    ae: &Autoencoder,
    x: &Matrix,
    y: &Matrix,
    lambda: f64,
    want_grads: bool,
) -> Result<(LossEval, CorrNetTerms)> {
    let n = x.rows();
    let zx = Matrix::zeros(n, x.cols());
    let zy = Matrix::zeros(n, y.cols());
    // Three row blocks: joint, x only, y only.
    let xs = Matrix::vstack(&[x, x, &zx])?;
    let ys = Matrix::vstack(&[y, &zy, y])?;
    let (ex, tex) = ae.enc_x.forward_traced(&xs)?;
    let (ey, tey) = ae.enc_y.forward_traced(&ys)?;
    let (h, th) = ae.mixing.forward_traced(&ex.add(&ey)?)?;
    let (xr, tdx) = ae.dec_x.forward_traced(&h)?;
    let (yr, tdy) = ae.dec_y.forward_traced(&h)?;
    let (rx, gxr) = blocked_mse(&xr, &Matrix::vstack(&[x, x, x])?, 3)?;
    let (ry, gyr) = blocked_mse(&yr, &Matrix::vstack(&[y, y, y])?, 3)?;

    let hx = h.slice_rows(n, 2 * n);
    let hy = h.slice_rows(2 * n, 3 * n);
    let corr = if lambda == 0.0 && n < 2 {
        None
    } else {
        Some(correlation_loss(&hx, &hy)?)
    };
    let terms = CorrNetTerms {
        recon: [rx[0], ry[0], rx[1], ry[1], rx[2], ry[2]],
        corr: corr.as_ref().map_or(0.0, |c| c.value),
    };
    let loss = terms.total(lambda);
    if !want_grads {
        return Ok((LossEval { loss, grads: None }, terms));
    }

    let g_dx = ae.dec_x.backward_traced(&tdx, &gxr)?;
    let g_dy = ae.dec_y.backward_traced(&tdy, &gyr)?;
    let mut dh = g_dx.input.add(&g_dy.input)?;
    if let Some(c) = &corr {
        let mut gx = c.grad_x.clone();
        gx.scale(-lambda);
        let mut gy = c.grad_y.clone();
        gy.scale(-lambda);
        dh.add_rows_at(n, &gx)?;
        dh.add_rows_at(2 * n, &gy)?;
    }
    let g_mix = ae.mixing.backward_traced(&th, &dh)?;
    let g_ex = ae.enc_x.backward_traced(&tex, &g_mix.input)?;
    let g_ey = ae.enc_y.backward_traced(&tey, &g_mix.input)?;
    let grads = ModelGrads {
        parts: vec![g_ex, g_ey, g_mix, g_dx, g_dy],
        extra: Vec::new(),
    };
    Ok((
        LossEval {
            loss,
            grads: Some(grads),
        },
        terms,
    ))
}

/// JAE objective: reconstructions from `concat(private, shared)` codes plus
/// private-only reconstructions, four MSE terms in all.
pub fn jae_loss(model: &MultimodalModel, x: &Matrix, y: &Matrix, want_grads: bool) -> Result<LossEval> {
    let Body::Jae { shared, private } = &model.body else {
        return Err(Error::Config(format!("jae_loss on a {} model", model.kind())));
    };
    check_pair(model, x, y)?;
    jae_eval(shared, private, x, y, want_grads)
}

fn jae_eval(
    ae: &Autoencoder,
    pb: &PrivateBranches,
    x: &Matrix,
    y: &Matrix,
    want_grads: bool,
) -> Result<LossEval> {
    let (ex, tex) = ae.enc_x.forward_traced(x)?;
    let (ey, tey) = ae.enc_y.forward_traced(y)?;
    let (s, ts) = ae.mixing.forward_traced(&ex.add(&ey)?)?;
    let (px, tpx) = pb.penc_x.forward_traced(x)?;
    let (py, tpy) = pb.penc_y.forward_traced(y)?;
    let (xh, tdx) = ae.dec_x.forward_traced(&px.hconcat(&s)?)?;
    let (yh, tdy) = ae.dec_y.forward_traced(&py.hconcat(&s)?)?;
    let (xt, tpdx) = pb.pdec_x.forward_traced(&px)?;
    let (yt, tpdy) = pb.pdec_y.forward_traced(&py)?;

    let (l1, g1) = blocked_mse(&xh, x, 1)?;
    let (l2, g2) = blocked_mse(&yh, y, 1)?;
    let (l3, g3) = blocked_mse(&xt, x, 1)?;
    let (l4, g4) = blocked_mse(&yt, y, 1)?;
    let loss = l1[0] + l2[0] + l3[0] + l4[0];
    if !want_grads {
        return Ok(LossEval { loss, grads: None });
    }

    let w = px.cols();
    let g_dx = ae.dec_x.backward_traced(&tdx, &g1)?;
    let g_dy = ae.dec_y.backward_traced(&tdy, &g2)?;
    let g_pdx = pb.pdec_x.backward_traced(&tpdx, &g3)?;
    let g_pdy = pb.pdec_y.backward_traced(&tpdy, &g4)?;
    let (dpx_a, ds_x) = g_dx.input.hsplit(w);
    let (dpy_a, ds_y) = g_dy.input.hsplit(w);
    let g_mix = ae.mixing.backward_traced(&ts, &ds_x.add(&ds_y)?)?;
    let g_ex = ae.enc_x.backward_traced(&tex, &g_mix.input)?;
    let g_ey = ae.enc_y.backward_traced(&tey, &g_mix.input)?;
    let g_px = pb.penc_x.backward_traced(&tpx, &dpx_a.add(&g_pdx.input)?)?;
    let g_py = pb.penc_y.backward_traced(&tpy, &dpy_a.add(&g_pdy.input)?)?;
    Ok(LossEval {
        loss,
        grads: Some(ModelGrads {
            parts: vec![g_ex, g_ey, g_mix, g_dx, g_dy, g_px, g_pdx, g_py, g_pdy],
            extra: Vec::new(),
        }),
    })
}

/// BiDNN objective: `mse(f_xy(x), y) + mse(f_yx(y), x)`. The tied central
/// weights collect gradient from both directions.
pub fn bidnn_loss(model: &MultimodalModel, x: &Matrix, y: &Matrix, want_grads: bool) -> Result<LossEval> {
    let Body::Bidnn(b) = &model.body else {
        return Err(Error::Config(format!("bidnn_loss on a {} model", model.kind())));
    };
    check_pair(model, x, y)?;
    bidnn_eval(b, x, y, want_grads)
}

fn bidnn_eval(b: &Bidnn, x: &Matrix, y: &Matrix, want_grads: bool) -> Result<LossEval> {
    let central_yx = b.central_yx();
    let (ex, tex) = b.enc_x.forward_traced(x)?;
    let (cxy, tc) = b.central.forward_traced(&ex)?;
    let (yh, tdy) = b.dec_y.forward_traced(&cxy)?;
    let (ey, tey) = b.enc_y.forward_traced(y)?;
    let (cyx, tcyx) = central_yx.forward_traced(&ey)?;
    let (xh, tdx) = b.dec_x.forward_traced(&cyx)?;

    let (ly, gy) = blocked_mse(&yh, y, 1)?;
    let (lx, gx) = blocked_mse(&xh, x, 1)?;
    let loss = ly[0] + lx[0];
    if !want_grads {
        return Ok(LossEval { loss, grads: None });
    }

    let g_dy = b.dec_y.backward_traced(&tdy, &gy)?;
    let mut g_c = b.central.backward_traced(&tc, &g_dy.input)?;
    let g_ex = b.enc_x.backward_traced(&tex, &g_c.input)?;
    let g_dx = b.dec_x.backward_traced(&tdx, &gx)?;
    let g_cyx = central_yx.backward_traced(&tcyx, &g_dx.input)?;
    let g_ey = b.enc_y.backward_traced(&tey, &g_cyx.input)?;
    let mut extra = vec![Vec::new(); b.central_yx_bias.len()];
    b.fold_yx_grads(&mut g_c, &g_cyx, &mut extra)?;
    Ok(LossEval {
        loss,
        grads: Some(ModelGrads {
            parts: vec![g_ex, g_c, g_dy, g_ey, g_dx],
            extra,
        }),
    })
}

/// Unsupervised loss of a multimodal model. `lambda` is only read by CorrNet.
pub fn representation_loss(
    model: &MultimodalModel,
    x: &Matrix,
    y: &Matrix,
    lambda: f64,
    want_grads: bool,
) -> Result<LossEval> {
    match model.kind() {
        ArchKind::CorrNet => corrnet_loss(model, x, y, lambda, want_grads).map(|(e, _)| e),
        ArchKind::Jae => jae_loss(model, x, y, want_grads),
        ArchKind::Bidnn => bidnn_loss(model, x, y, want_grads),
        ArchKind::Baseline => Err(Error::Config(
            "the baseline has no representation loss; it trains end to end".into(),
        )),
    }
}

/// λ that equalizes the correlation term with the six reconstruction terms
/// on `x`, `y`: `recon_sum / max(|corr|, 1e-12)`.
pub fn auto_lambda(model: &MultimodalModel, x: &Matrix, y: &Matrix) -> Result<f64> {
    if model.kind() != ArchKind::CorrNet {
        return Err(Error::Config("auto lambda applies to CorrNet only".into()));
    }
    if x.rows() < 2 {
        return Err(Error::DegenerateBatch("auto lambda needs at least 2 rows".into()));
    }
    let (_, terms) = corrnet_loss(model, x, y, 0.0, false)?;
    Ok(terms.recon_sum() / terms.corr.abs().max(AUTO_LAMBDA_EPS))
}

/// Gradients of the baseline's supervised loss, body then head.
#[derive(Clone, Debug)]
pub struct BaselineGrads {
    pub parts: Vec<MlpGrads>,
}

impl BaselineGrads {
    pub fn flat(&self) -> Vec<&[f64]> {
        self.parts.iter().flat_map(MlpGrads::flat).collect()
    }
}

/// Class-weighted cross-entropy of the early-fusion baseline, end to end.
pub fn baseline_loss(
    model: &MultimodalModel,
    x: &Matrix,
    y: &Matrix,
    labels: &[u8],
    class_weights: &[f64; 2],
    want_grads: bool,
) -> Result<(f64, Option<BaselineGrads>)> {
    let Body::Baseline(f) = &model.body else {
        return Err(Error::Config(format!("baseline_loss on a {} model", model.kind())));
    };
    check_pair(model, x, y)?;
    baseline_eval(f, &model.head, &x.hconcat(y)?, labels, class_weights, want_grads)
}

fn baseline_eval(
    f: &EarlyFusion,
    head: &Mlp,
    joined: &Matrix,
    labels: &[u8],
    class_weights: &[f64; 2],
    want_grads: bool,
) -> Result<(f64, Option<BaselineGrads>)> {
    let (e, te) = f.encoder.forward_traced(joined)?;
    let (h, th) = f.mixing.forward_traced(&e)?;
    let (logits, tl) = head.forward_traced(&h)?;
    let (loss, dlogits) = weighted_cross_entropy(&logits, labels, class_weights)?;
    if !want_grads {
        return Ok((loss, None));
    }
    let g_head = head.backward_traced(&tl, &dlogits)?;
    let g_mix = f.mixing.backward_traced(&th, &g_head.input)?;
    let g_enc = f.encoder.backward_traced(&te, &g_mix.input)?;
    Ok((
        loss,
        Some(BaselineGrads {
            parts: vec![g_enc, g_mix, g_head],
        }),
    ))
}
