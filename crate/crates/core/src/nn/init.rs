//! Weight initialization schemes.
//!
//! Weights follow the chosen scheme; biases are always drawn uniformly from
//! `(-1/sqrt(fan_in), 1/sqrt(fan_in))`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use super::mlp::{leaky_relu, Mlp};
use crate::error::{Error, Result};

/// LSUV stops once the layer output std falls inside this band.
pub const LSUV_BAND: (f64, f64) = (0.9, 1.1);
/// Maximum rescaling passes per layer.
pub const LSUV_MAX_ITERS: usize = 10;

/// Serialized as its display string: `kaiming`, `xavier`, `lsuv`, `constant:<c>`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InitScheme {
    Constant(f64),
    #[default]
    Kaiming,
    Xavier,
    Lsuv,
}

impl fmt::Display for InitScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitScheme::Constant(c) => write!(f, "constant:{c}"),
            InitScheme::Kaiming => f.write_str("kaiming"),
            InitScheme::Xavier => f.write_str("xavier"),
            InitScheme::Lsuv => f.write_str("lsuv"),
        }
    }
}

impl From<InitScheme> for String {
    fn from(s: InitScheme) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for InitScheme {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for InitScheme {
    type Err = Error;

    /// Accepts `kaiming`, `xavier`, `lsuv`, `constant` (c = 0.01) or `constant:<c>`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "kaiming" => Ok(InitScheme::Kaiming),
            "xavier" => Ok(InitScheme::Xavier),
            "lsuv" => Ok(InitScheme::Lsuv),
            "constant" => Ok(InitScheme::Constant(DEFAULT_CONSTANT)),
            other => {
                if let Some(v) = other.strip_prefix("constant:") {
                    let c: f64 = v
                        .parse()
                        .map_err(|_| Error::Argument(format!("bad constant init value `{v}`")))?;
                    if !c.is_finite() {
                        return Err(Error::Argument("constant init must be finite".into()));
                    }
                    Ok(InitScheme::Constant(c))
                } else {
                    Err(Error::Argument(format!("unknown init scheme `{s}`")))
                }
            }
        }
    }
}

/// Weight value used by the `constant` scheme when none is given.
pub const DEFAULT_CONSTANT: f64 = 0.01;

/// Kaiming gain for LeakyReLU with the given negative slope.
pub fn leaky_gain(slope: f64) -> f64 {
    (2.0 / (1.0 + slope * slope)).sqrt()
}

pub(crate) fn uniform(rng: &mut ChaCha8Rng, bound: f64) -> f64 {
    (rng.random::<f64>() * 2.0 - 1.0) * bound
}

/// Initializes `mlp` in place. LSUV needs a calibration batch.
pub fn initialize(
    mlp: &mut Mlp,
    scheme: InitScheme,
    seed: u64,
    calibration: Option<&Matrix>,
) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    initialize_with_rng(mlp, scheme, &mut rng, calibration).map(|_| ())
}

/// Like [`initialize`], drawing from a caller-owned generator. Returns the
/// network output on the calibration batch when one was supplied.
pub fn initialize_with_rng(
    mlp: &mut Mlp,
    scheme: InitScheme,
    rng: &mut ChaCha8Rng,
    calibration: Option<&Matrix>,
) -> Result<Option<Matrix>> {
    if let InitScheme::Constant(c) = scheme {
        if !c.is_finite() {
            return Err(Error::Config("constant init must be finite".into()));
        }
    }
    if scheme == InitScheme::Lsuv && calibration.is_none() {
        return Err(Error::Argument("LSUV initialization needs a calibration batch".into()));
    }
    let slope = mlp.slope;
    for layer in &mut mlp.layers {
        let fan_in = layer.input_dim();
        let fan_out = layer.output_dim();
        match scheme {
            InitScheme::Constant(c) => layer.weight.as_mut_slice().fill(c),
            InitScheme::Kaiming => {
                let b = leaky_gain(slope) * (3.0 / fan_in as f64).sqrt();
                layer.weight.as_mut_slice().iter_mut().for_each(|w| *w = uniform(rng, b));
            }
            InitScheme::Xavier => {
                let b = (6.0 / (fan_in + fan_out) as f64).sqrt();
                layer.weight.as_mut_slice().iter_mut().for_each(|w| *w = uniform(rng, b));
            }
            InitScheme::Lsuv => layer.weight = orthonormal(fan_out, fan_in, rng),
        }
        let bb = 1.0 / (fan_in as f64).sqrt();
        layer.bias.iter_mut().for_each(|b| *b = uniform(rng, bb));
    }

    let Some(calib) = calibration else {
        return Ok(None);
    };
    if calib.cols() != mlp.input_dim() {
        return Err(Error::Shape(format!(
            "calibration batch has {} columns, network expects {}",
            calib.cols(),
            mlp.input_dim()
        )));
    }
    let n_layers = mlp.layers.len();
    let activate_last = mlp.activate_last;
    let mut input = calib.clone();
    for (i, layer) in mlp.layers.iter_mut().enumerate() {
        let mut pre = layer.forward(&input)?;
        if scheme == InitScheme::Lsuv {
            for iter in 0..=LSUV_MAX_ITERS {
                let std = pre.std_all();
                if (LSUV_BAND.0..=LSUV_BAND.1).contains(&std) || std == 0.0 || iter == LSUV_MAX_ITERS {
                    break;
                }
                layer.weight.scale(1.0 / std);
                pre = layer.forward(&input)?;
            }
        }
        input = if i + 1 < n_layers || activate_last {
            pre.map(|v| leaky_relu(v, slope))
        } else {
            pre
        };
    }
    Ok(Some(input))
}

/// Random matrix with orthonormal rows (or columns, when taller than wide).
fn orthonormal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let (n, len) = if rows <= cols { (rows, cols) } else { (cols, rows) };
    let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(n);
    while vecs.len() < n {
        let mut v: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
        for u in &vecs {
            let dot: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|a| *a /= norm);
            vecs.push(v);
        }
    }
    let mut m = Matrix::zeros(rows, cols);
    for (i, v) in vecs.iter().enumerate() {
        for (j, &a) in v.iter().enumerate() {
            if rows <= cols {
                m.set(i, j, a);
            } else {
                m.set(j, i, a);
            }
        }
    }
    m
}
