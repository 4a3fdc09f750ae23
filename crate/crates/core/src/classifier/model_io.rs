//! Model files: one JSON object holding a versioned header and the model.
//!
//! ```text
//! {"format":"qsep-kernel-model","version":1,"dim":<usize>,"model":{
//!    "kernel":{"kind":"GAUSSIAN","gamma":<f64>} | {"kind":"POLYNOMIAL","degree":<u32>,"coef0":<f64>},
//!    "support_vectors":[[<f64>; dim], ...],
//!    "dual_coefs":[<f64>, ...],
//!    "bias":<f64>,
//!    "scaling":null | {"mean":[<f64>; dim],"scale":[<f64>; dim]},
//!    "meta":{"c":<f64>,"seed":<u64>|null,"fold_scores":[<f64>],"tol":<f64>,"iterations":<usize>}}}
//! ```
//!
//! Floats are written in shortest round-trip form and parsed exactly, so a
//! loaded model predicts bit-identically to the saved one.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::model::KernelModel;
use crate::error::{QsepError, Result};

pub const MODEL_FORMAT: &str = "qsep-kernel-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    dim: usize,
    model: KernelModel,
}

pub fn model_to_string(model: &KernelModel) -> Result<String> {
    let file = ModelFile {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        dim: model.dim(),
        model: model.clone(),
    };
    let mut s = serde_json::to_string(&file).map_err(|e| QsepError::invalid(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn model_from_str(s: &str) -> Result<KernelModel> {
    let load = |m: String| QsepError::Load { line: 1, message: m };
    let file: ModelFile = serde_json::from_str(s).map_err(|e| load(e.to_string()))?;
    if file.format != MODEL_FORMAT {
        return Err(load(format!("not a model file (format {:?})", file.format)));
    }
    if file.version != MODEL_VERSION {
        return Err(load(format!("unsupported model version {}", file.version)));
    }
    let m = file.model;
    m.kernel.validate().map_err(|e| load(e.to_string()))?;
    if m.support_vectors.len() != m.dual_coefs.len() {
        return Err(load("support vector and coefficient counts differ".into()));
    }
    if m.support_vectors.iter().any(|sv| sv.len() != file.dim) || m.dim() != file.dim {
        return Err(load("support vector length does not match dim".into()));
    }
    Ok(m)
}

pub fn write_model<W: Write>(mut out: W, model: &KernelModel) -> Result<()> {
    out.write_all(model_to_string(model)?.as_bytes())?;
    Ok(())
}

pub fn read_model<R: Read>(mut input: R) -> Result<KernelModel> {
    let mut s = String::new();
    input.read_to_string(&mut s)?;
    model_from_str(&s)
}
