use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::nn::InitScheme;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArchKind {
    CorrNet,
    Jae,
    Bidnn,
    Baseline,
}

impl ArchKind {
    pub const MULTIMODAL: [ArchKind; 3] = [ArchKind::CorrNet, ArchKind::Jae, ArchKind::Bidnn];

    /// Column label used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            ArchKind::CorrNet => "CorrNet",
            ArchKind::Jae => "JAE",
            ArchKind::Bidnn => "BiDNN",
            ArchKind::Baseline => "Baseline",
        }
    }
}

impl fmt::Display for ArchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArchKind::CorrNet => "corrnet",
            ArchKind::Jae => "jae",
            ArchKind::Bidnn => "bidnn",
            ArchKind::Baseline => "baseline",
        })
    }
}

impl FromStr for ArchKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "corrnet" => Ok(ArchKind::CorrNet),
            "jae" => Ok(ArchKind::Jae),
            "bidnn" => Ok(ArchKind::Bidnn),
            "baseline" => Ok(ArchKind::Baseline),
            _ => Err(Error::Argument(format!(
                "unknown architecture `{s}` (expected corrnet, jae, bidnn or baseline)"
            ))),
        }
    }
}

/// Weight of the correlation term in the CorrNet loss.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Lambda {
    Value(f64),
    /// Chosen once after initialization so the correlation term matches the
    /// reconstruction terms in magnitude.
    Auto,
}

impl Lambda {
    pub fn value(self) -> Option<f64> {
        match self {
            Lambda::Value(v) => Some(v),
            Lambda::Auto => None,
        }
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lambda::Value(v) => write!(f, "{v}"),
            Lambda::Auto => f.write_str("auto"),
        }
    }
}

impl FromStr for Lambda {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Lambda::Auto);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::Argument(format!("lambda must be a number or `auto`, got `{s}`")))?;
        Ok(Lambda::Value(v))
    }
}

impl Serialize for Lambda {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Lambda::Value(v) => s.serialize_f64(*v),
            Lambda::Auto => s.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for Lambda {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Lambda;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"auto\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Lambda, E> {
                Ok(Lambda::Value(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Lambda, E> {
                Ok(Lambda::Value(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Lambda, E> {
                Ok(Lambda::Value(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Lambda, E> {
                v.parse().map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

/// Everything needed to build and train one model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchConfig {
    pub kind: ArchKind,
    pub layer_width: usize,
    pub layer_depth: usize,
    pub dim_x: usize,
    pub dim_y: usize,
    /// Only read for CorrNet.
    pub lambda: Lambda,
    pub init: InitScheme,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub seed: u64,
}

pub const DEFAULT_WIDTH: usize = 50;
pub const DEFAULT_DEPTH: usize = 1;
pub const DEFAULT_EPOCHS: usize = 100;
pub const DEFAULT_BATCH_SIZE: usize = 256;
pub const DEFAULT_LAMBDA: f64 = 0.1;

impl ArchConfig {
    /// Defaults: 50 nodes × 1 layer, 100 epochs, Adam lr 1e-3, batch 256,
    /// Kaiming init, λ = 0.1.
    pub fn new(kind: ArchKind, dim_x: usize, dim_y: usize) -> Self {
        ArchConfig {
            kind,
            layer_width: DEFAULT_WIDTH,
            layer_depth: DEFAULT_DEPTH,
            dim_x,
            dim_y,
            lambda: Lambda::Value(DEFAULT_LAMBDA),
            init: InitScheme::Kaiming,
            epochs: DEFAULT_EPOCHS,
            lr: 1e-3,
            batch_size: DEFAULT_BATCH_SIZE,
            seed: 0,
        }
    }

    pub fn with_size(mut self, width: usize, depth: usize) -> Self {
        self.layer_width = width;
        self.layer_depth = depth;
        self
    }

    /// Internal layer width. JAE runs at half width to offset its private
    /// branches.
    pub fn effective_width(&self) -> usize {
        match self.kind {
            ArchKind::Jae => self.layer_width / 2,
            _ => self.layer_width,
        }
    }

    /// Width of the representation handed to the classification head.
    pub fn embedding_width(&self) -> usize {
        match self.kind {
            ArchKind::Bidnn => 2 * self.layer_width,
            _ => self.effective_width(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_width == 0 || self.layer_depth == 0 {
            return Err(Error::Config("layer width and depth must be at least 1".into()));
        }
        if self.dim_x == 0 || self.dim_y == 0 {
            return Err(Error::Config(format!(
                "modality dims must be positive, got {} and {}",
                self.dim_x, self.dim_y
            )));
        }
        if self.kind == ArchKind::Jae && self.effective_width() == 0 {
            return Err(Error::Config(format!(
                "JAE halves the layer width; width {} leaves no nodes",
                self.layer_width
            )));
        }
        if let Lambda::Value(l) = self.lambda {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::Config(format!("lambda must be finite and >= 0, got {l}")));
            }
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch size must be positive".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.lr)));
        }
        Ok(())
    }
}
