//! Versioned JSON model documents.
//!
//! ```text
//! {
//!   "format_version": 1,
//!   "model_kind": "linear" | "svr" | "forest",
//!   "feature_labels": [...],
//!   "payload": { model-specific fields }
//! }
//! ```
//!
//! Floats are written in the shortest form that parses back to the identical
//! `f64`, so a loaded model predicts bit-for-bit like the saved one.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{FittedModel, ForestModel, LinearModel, ModelError, ModelKind, Regressor, SvrModel};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Serialize)]
struct DocumentOut<'a, P: Serialize> {
    format_version: u64,
    model_kind: ModelKind,
    feature_labels: &'a [String],
    payload: &'a P,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentIn {
    #[allow(dead_code)]
    format_version: u64,
    model_kind: ModelKind,
    feature_labels: Vec<String>,
    payload: Value,
}

fn render<P: Serialize>(model: &FittedModel, payload: &P) -> String {
    let doc = DocumentOut {
        format_version: FORMAT_VERSION,
        model_kind: model.kind(),
        feature_labels: model.feature_labels(),
        payload,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("model documents always serialize");
    s.push('\n');
    s
}

pub fn save_model(model: &FittedModel) -> String {
    match model {
        FittedModel::Linear(m) => render(model, m),
        FittedModel::Svr(m) => render(model, m),
        FittedModel::Forest(m) => render(model, m),
    }
}

fn malformed(e: impl std::fmt::Display) -> ModelError {
    ModelError::MalformedDocument(e.to_string())
}

pub fn load_model(text: &str) -> Result<FittedModel, ModelError> {
    let raw: Value = serde_json::from_str(text).map_err(malformed)?;
    let version = raw
        .get("format_version")
        .ok_or_else(|| malformed("missing format_version"))?;
    match version.as_u64() {
        Some(FORMAT_VERSION) => {}
        _ => return Err(ModelError::UnknownVersion(version.to_string())),
    }
    let doc: DocumentIn = serde_json::from_value(raw).map_err(malformed)?;
    let labels = doc.feature_labels;
    let m = labels.len();
    if m == 0 {
        return Err(malformed("feature_labels is empty"));
    }
    let model = match doc.model_kind {
        ModelKind::Linear => {
            let mut lm: LinearModel = serde_json::from_value(doc.payload).map_err(malformed)?;
            if lm.coefficients.len() != m {
                return Err(malformed("coefficient count differs from feature_labels"));
            }
            lm.feature_labels = labels;
            FittedModel::Linear(lm)
        }
        ModelKind::Svr => {
            let mut sm: SvrModel = serde_json::from_value(doc.payload).map_err(malformed)?;
            let sv = &sm.support_vectors;
            if sv.rows() != sm.dual_weights.len() {
                return Err(malformed("support vector count differs from dual weights"));
            }
            if sv.rows() > 0 && sv.cols() != m {
                return Err(malformed("support vector width differs from feature_labels"));
            }
            if sv.as_slice().len() != sv.rows() * sv.cols() {
                return Err(malformed("support vector matrix has the wrong size"));
            }
            sm.feature_labels = labels;
            FittedModel::Svr(sm)
        }
        ModelKind::Forest => {
            let mut fm: ForestModel = serde_json::from_value(doc.payload).map_err(malformed)?;
            if fm.trees.is_empty() || fm.trees.len() != fm.n_trees {
                return Err(malformed("tree count differs from n_trees"));
            }
            for t in &fm.trees {
                t.validate(m).map_err(malformed)?;
            }
            fm.feature_labels = labels;
            FittedModel::Forest(fm)
        }
    };
    Ok(model)
}
