//! Model construction, initialization, and parameter bookkeeping.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{ArchConfig, ArchKind};
use crate::error::{Error, Result};
use crate::nn::init::{initialize_with_rng, uniform};
use crate::nn::{InitScheme, Linear, Matrix, Mlp, MlpGrads};

/// Shared encoder/mixing/decoder stack used by CorrNet and the shared path
/// of JAE.
#[derive(Clone, Debug, PartialEq)]
pub struct Autoencoder {
    pub enc_x: Mlp,
    pub enc_y: Mlp,
    pub mixing: Mlp,
    pub dec_x: Mlp,
    pub dec_y: Mlp,
}

/// JAE per-modality branches that bypass the mixing layers.
#[derive(Clone, Debug, PartialEq)]
pub struct PrivateBranches {
    pub penc_x: Mlp,
    pub pdec_x: Mlp,
    pub penc_y: Mlp,
    pub pdec_y: Mlp,
}

/// Two translation networks `x → ŷ` and `y → x̂` with tied central layers.
///
/// Only the `x → y` central weights are stored. The `y → x` direction runs
/// the same layers in reverse order with each weight transposed, so the two
/// views can never drift apart. Biases are not tied.
#[derive(Clone, Debug, PartialEq)]
pub struct Bidnn {
    pub enc_x: Mlp,
    pub central: Mlp,
    pub dec_y: Mlp,
    pub enc_y: Mlp,
    pub dec_x: Mlp,
    /// Biases of the `y → x` central layers, in that direction's order.
    pub central_yx_bias: Vec<Vec<f64>>,
}

impl Bidnn {
    /// Weight of layer `i` of the `y → x` central stack.
    pub fn central_yx_weight(&self, i: usize) -> Matrix {
        let d = self.central.layers.len();
        self.central.layers[d - 1 - i].weight.transpose()
    }

    /// The `y → x` central stack materialised as a network.
    pub fn central_yx(&self) -> Mlp {
        let d = self.central.layers.len();
        let layers = (0..d)
            .map(|i| Linear {
                weight: self.central_yx_weight(i),
                bias: self.central_yx_bias[i].clone(),
            })
            .collect();
        Mlp::new(layers, self.central.slope, self.central.activate_last)
            .expect("transposed central layers chain")
    }

    /// Folds gradients of the materialised `y → x` stack back onto the
    /// shared weights and the untied biases.
    pub(crate) fn fold_yx_grads(
        &self,
        xy: &mut MlpGrads,
        yx: &MlpGrads,
        yx_bias: &mut [Vec<f64>],
    ) -> Result<()> {
        let d = self.central.layers.len();
        for i in 0..d {
            xy.weights[d - 1 - i].add_assign(&yx.weights[i].transpose())?;
            yx_bias[i].clone_from(&yx.biases[i]);
        }
        Ok(())
    }
}

/// Early-fusion classifier input path: encoder over `concat(x, y)` and mixing.
#[derive(Clone, Debug, PartialEq)]
pub struct EarlyFusion {
    pub encoder: Mlp,
    pub mixing: Mlp,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Body {
    CorrNet(Autoencoder),
    Jae {
        shared: Autoencoder,
        private: PrivateBranches,
    },
    Bidnn(Bidnn),
    Baseline(EarlyFusion),
}

/// One architecture's representation network plus its classification head.
#[derive(Clone, Debug, PartialEq)]
pub struct MultimodalModel {
    pub cfg: ArchConfig,
    pub body: Body,
    /// `Linear(embedding → layer_width) → LeakyReLU → Linear(→ 2)`
    pub head: Mlp,
}

/// Gradients of the representation parameters, in [`MultimodalModel::params_mut`] order.
#[derive(Clone, Debug)]
pub struct ModelGrads {
    pub parts: Vec<MlpGrads>,
    pub extra: Vec<Vec<f64>>,
}

impl ModelGrads {
    pub fn flat(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = self.parts.iter().flat_map(MlpGrads::flat).collect();
        out.extend(self.extra.iter().map(Vec::as_slice));
        out
    }
}

/// `depth` layers from `input` to `width`.
fn encoder(input: usize, width: usize, depth: usize) -> Mlp {
    let mut dims = vec![input];
    dims.extend(std::iter::repeat_n(width, depth));
    Mlp::with_dims(&dims, true)
}

/// `depth` layers from `input` to `output`, hidden layers at `width`,
/// linear output.
fn decoder(input: usize, width: usize, depth: usize, output: usize) -> Mlp {
    let mut dims = vec![input];
    dims.extend(std::iter::repeat_n(width, depth - 1));
    dims.push(output);
    Mlp::with_dims(&dims, false)
}

/// Classification head for an embedding of width `rep`.
pub fn build_head(rep: usize, hidden: usize) -> Mlp {
    Mlp::with_dims(&[rep, hidden, 2], false)
}

/// Builds a zero-weight model for `cfg`. Call [`MultimodalModel::initialize`]
/// before training.
pub fn build_model(cfg: &ArchConfig) -> Result<MultimodalModel> {
    cfg.validate()?;
    let w = cfg.effective_width();
    let d = cfg.layer_depth;
    let (dx, dy) = (cfg.dim_x, cfg.dim_y);
    let body = match cfg.kind {
        ArchKind::CorrNet => Body::CorrNet(Autoencoder {
            enc_x: encoder(dx, w, d),
            enc_y: encoder(dy, w, d),
            mixing: encoder(w, w, d),
            dec_x: decoder(w, w, d, dx),
            dec_y: decoder(w, w, d, dy),
        }),
        ArchKind::Jae => Body::Jae {
            shared: Autoencoder {
                enc_x: encoder(dx, w, d),
                enc_y: encoder(dy, w, d),
                mixing: encoder(w, w, d),
                dec_x: decoder(2 * w, w, d, dx),
                dec_y: decoder(2 * w, w, d, dy),
            },
            private: PrivateBranches {
                penc_x: encoder(dx, w, d),
                pdec_x: decoder(w, w, d, dx),
                penc_y: encoder(dy, w, d),
                pdec_y: decoder(w, w, d, dy),
            },
        },
        ArchKind::Bidnn => Body::Bidnn(Bidnn {
            enc_x: encoder(dx, w, d),
            central: encoder(w, w, d),
            dec_y: decoder(w, w, d, dy),
            enc_y: encoder(dy, w, d),
            dec_x: decoder(w, w, d, dx),
            central_yx_bias: vec![vec![0.0; w]; d],
        }),
        ArchKind::Baseline => Body::Baseline(EarlyFusion {
            encoder: encoder(dx + dy, w, d),
            mixing: encoder(w, w, d),
        }),
    };
    Ok(MultimodalModel {
        cfg: cfg.clone(),
        body,
        head: build_head(cfg.embedding_width(), cfg.layer_width),
    })
}

impl MultimodalModel {
    pub fn kind(&self) -> ArchKind {
        self.cfg.kind
    }

    /// Representation networks in parameter order.
    pub fn parts(&self) -> Vec<(&'static str, &Mlp)> {
        match &self.body {
            Body::CorrNet(ae) => ae_parts(ae),
            Body::Jae { shared, private } => {
                let mut v = ae_parts(shared);
                v.extend([
                    ("penc_x", &private.penc_x),
                    ("pdec_x", &private.pdec_x),
                    ("penc_y", &private.penc_y),
                    ("pdec_y", &private.pdec_y),
                ]);
                v
            }
            Body::Bidnn(b) => vec![
                ("enc_x", &b.enc_x),
                ("central", &b.central),
                ("dec_y", &b.dec_y),
                ("enc_y", &b.enc_y),
                ("dec_x", &b.dec_x),
            ],
            Body::Baseline(f) => vec![("encoder", &f.encoder), ("mixing", &f.mixing)],
        }
    }

    /// Representation parameters (head excluded), matching [`ModelGrads::flat`].
    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        body_params_mut(&mut self.body)
    }

    /// Representation parameters followed by head parameters, the order
    /// of [`MultimodalModel::named_tensors`].
    pub fn params_with_head_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = body_params_mut(&mut self.body);
        out.extend(self.head.params_mut());
        out
    }

    /// Named tensors, with shapes, for every parameter including the head.
    pub fn named_tensors(&self) -> Vec<(String, &[f64], Vec<usize>)> {
        let mut out = Vec::new();
        for (name, m) in self.parts() {
            out.extend(m.named_params(name));
        }
        if let Body::Bidnn(b) = &self.body {
            for (i, bias) in b.central_yx_bias.iter().enumerate() {
                out.push((format!("central_yx.{i}.bias"), bias.as_slice(), vec![bias.len()]));
            }
        }
        out.extend(self.head.named_params("head"));
        out
    }

    /// Representation parameter count, head excluded.
    pub fn param_count(&self) -> usize {
        let extra: usize = match &self.body {
            Body::Bidnn(b) => b.central_yx_bias.iter().map(Vec::len).sum(),
            _ => 0,
        };
        self.parts().iter().map(|(_, m)| m.param_count()).sum::<usize>() + extra
    }

    pub fn head_param_count(&self) -> usize {
        self.head.param_count()
    }

    pub fn total_param_count(&self) -> usize {
        self.param_count() + self.head_param_count()
    }

    /// Initializes every network with `scheme`. LSUV needs a calibration
    /// batch of both modalities, which is propagated through the
    /// architecture so each network is calibrated on its real inputs.
    pub fn initialize(
        &mut self,
        scheme: InitScheme,
        seed: u64,
        calibration: Option<(&Matrix, &Matrix)>,
    ) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let calib = match scheme {
            InitScheme::Lsuv => Some(calibration.ok_or_else(|| {
                Error::Argument("LSUV initialization needs a calibration batch".into())
            })?),
            _ => None,
        };
        let mut init = |m: &mut Mlp, input: Option<&Matrix>| -> Result<Option<Matrix>> {
            initialize_with_rng(m, scheme, &mut rng, input)
        };
        let head_input = match &mut self.body {
            Body::CorrNet(ae) => init_autoencoder(ae, calib, &mut init)?,
            Body::Jae { shared, private } => {
                let (x, y) = split(calib);
                let ex = init(&mut shared.enc_x, x)?;
                let ey = init(&mut shared.enc_y, y)?;
                let s = init(&mut shared.mixing, sum(ex, ey)?.as_ref())?;
                let px = init(&mut private.penc_x, x)?;
                let py = init(&mut private.penc_y, y)?;
                init(&mut shared.dec_x, cat(px.as_ref(), s.as_ref())?.as_ref())?;
                init(&mut shared.dec_y, cat(py.as_ref(), s.as_ref())?.as_ref())?;
                init(&mut private.pdec_x, px.as_ref())?;
                init(&mut private.pdec_y, py.as_ref())?;
                s
            }
            Body::Bidnn(b) => {
                let (x, y) = split(calib);
                let ex = init(&mut b.enc_x, x)?;
                let cxy = init(&mut b.central, ex.as_ref())?;
                init(&mut b.dec_y, cxy.as_ref())?;
                let ey = init(&mut b.enc_y, y)?;
                let w = b.central.output_dim();
                let bound = 1.0 / (w as f64).sqrt();
                // The untied biases are drawn after the shared weights are final.
                for bias in &mut b.central_yx_bias {
                    bias.iter_mut().for_each(|v| *v = uniform(&mut rng, bound));
                }
                let cyx = match &ey {
                    Some(e) => Some(b.central_yx().infer(e)?),
                    None => None,
                };
                initialize_with_rng(&mut b.dec_x, scheme, &mut rng, cyx.as_ref())?;
                match (cxy, cyx) {
                    (Some(a), Some(c)) => Some(a.hconcat(&c)?),
                    _ => None,
                }
            }
            Body::Baseline(f) => {
                let joined = match calib {
                    Some((x, y)) => Some(x.hconcat(y)?),
                    None => None,
                };
                let e = init(&mut f.encoder, joined.as_ref())?;
                init(&mut f.mixing, e.as_ref())?
            }
        };
        initialize_with_rng(&mut self.head, scheme, &mut rng, head_input.as_ref())?;
        Ok(())
    }
}

fn body_params_mut(body: &mut Body) -> Vec<&mut [f64]> {
    let (mlps, extra): (Vec<&mut Mlp>, Vec<&mut Vec<f64>>) = match body {
        Body::CorrNet(ae) => (ae_parts_mut(ae), Vec::new()),
        Body::Jae { shared, private } => {
            let mut v = ae_parts_mut(shared);
            v.extend([
                &mut private.penc_x,
                &mut private.pdec_x,
                &mut private.penc_y,
                &mut private.pdec_y,
            ]);
            (v, Vec::new())
        }
        Body::Bidnn(b) => (
            vec![&mut b.enc_x, &mut b.central, &mut b.dec_y, &mut b.enc_y, &mut b.dec_x],
            b.central_yx_bias.iter_mut().collect(),
        ),
        Body::Baseline(f) => (vec![&mut f.encoder, &mut f.mixing], Vec::new()),
    };
    let mut out: Vec<&mut [f64]> = Vec::new();
    for m in mlps {
        out.extend(m.params_mut());
    }
    out.extend(extra.into_iter().map(|v| v.as_mut_slice()));
    out
}

fn ae_parts(ae: &Autoencoder) -> Vec<(&'static str, &Mlp)> {
    vec![
        ("enc_x", &ae.enc_x),
        ("enc_y", &ae.enc_y),
        ("mixing", &ae.mixing),
        ("dec_x", &ae.dec_x),
        ("dec_y", &ae.dec_y),
    ]
}

fn ae_parts_mut(ae: &mut Autoencoder) -> Vec<&mut Mlp> {
    vec![
        &mut ae.enc_x,
        &mut ae.enc_y,
        &mut ae.mixing,
        &mut ae.dec_x,
        &mut ae.dec_y,
    ]
}

type InitFn<'a> = dyn FnMut(&mut Mlp, Option<&Matrix>) -> Result<Option<Matrix>> + 'a;

fn init_autoencoder(
    ae: &mut Autoencoder,
    calib: Option<(&Matrix, &Matrix)>,
    init: &mut InitFn<'_>,
) -> Result<Option<Matrix>> {
    let (x, y) = split(calib);
    let ex = init(&mut ae.enc_x, x)?;
    let ey = init(&mut ae.enc_y, y)?;
    let h = init(&mut ae.mixing, sum(ex, ey)?.as_ref())?;
    init(&mut ae.dec_x, h.as_ref())?;
    init(&mut ae.dec_y, h.as_ref())?;
    Ok(h)
}

fn split<'a>(c: Option<(&'a Matrix, &'a Matrix)>) -> (Option<&'a Matrix>, Option<&'a Matrix>) {
    match c {
        Some((x, y)) => (Some(x), Some(y)),
        None => (None, None),
    }
}

fn sum(a: Option<Matrix>, b: Option<Matrix>) -> Result<Option<Matrix>> {
    match (a, b) {
        (Some(a), Some(b)) => Ok(Some(a.add(&b)?)),
        _ => Ok(None),
    }
}

fn cat(a: Option<&Matrix>, b: Option<&Matrix>) -> Result<Option<Matrix>> {
    match (a, b) {
        (Some(a), Some(b)) => Ok(Some(a.hconcat(b)?)),
        _ => Ok(None),
    }
}
