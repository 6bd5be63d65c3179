//! Model files: a version-tagged JSON document holding the config and a flat
//! list of named tensors.
//!
//! ```json
//! {
//!   "format": "mmflaw-model",
//!   "version": 1,
//!   "config": { ...ArchConfig... },
//!   "tensors": [ { "name": "enc_x.0.weight", "shape": [50, 722], "data": [...] }, ... ]
//! }
//! ```
//!
//! Weights are row-major `out × in`. BiDNN stores only the `x → y` central
//! weights plus `central_yx.<i>.bias`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ArchConfig;
use super::model::{build_model, MultimodalModel};
use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "mmflaw-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Tensor {
    name: String,
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: String,
    version: u32,
    config: ArchConfig,
    tensors: Vec<Tensor>,
}

pub fn model_to_json(model: &MultimodalModel) -> Result<String> {
    let file = ModelFile {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        config: model.cfg.clone(),
        tensors: model
            .named_tensors()
            .into_iter()
            .map(|(name, data, shape)| Tensor {
                name,
                shape,
                data: data.to_vec(),
            })
            .collect(),
    };
    serde_json::to_string(&file).map_err(|e| Error::Format(e.to_string()))
}

pub fn model_from_json(text: &str) -> Result<MultimodalModel> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    if file.format != MODEL_FORMAT {
        return Err(Error::Format(format!("not a model file: format `{}`", file.format)));
    }
    if file.version != MODEL_VERSION {
        return Err(Error::Format(format!(
            "unsupported model version {} (expected {MODEL_VERSION})",
            file.version
        )));
    }
    let mut model = build_model(&file.config)?;
    let expected: Vec<(String, Vec<usize>)> = model
        .named_tensors()
        .into_iter()
        .map(|(n, _, s)| (n, s))
        .collect();
    if expected.len() != file.tensors.len() {
        return Err(Error::Format(format!(
            "expected {} tensors, found {}",
            expected.len(),
            file.tensors.len()
        )));
    }
    for ((name, shape), t) in expected.iter().zip(&file.tensors) {
        if *name != t.name || *shape != t.shape || t.data.len() != shape.iter().product::<usize>() {
            return Err(Error::Format(format!(
                "tensor `{}` {:?} does not match expected `{name}` {shape:?}",
                t.name, t.shape
            )));
        }
    }
    for (slot, t) in model.params_with_head_mut().into_iter().zip(&file.tensors) {
        slot.copy_from_slice(&t.data);
    }
    Ok(model)
}

pub fn save_model(model: &MultimodalModel, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_json(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<MultimodalModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}
