//! Three regressors behind one contract: ordinary least squares, epsilon-SVR
//! and a CART random forest.
//!
//! Every fitter takes a feature matrix (rows are respondents), the target
//! vector and the feature labels, and returns an immutable model. Predictions
//! are raw: nothing is clipped to the survey scale here.

mod forest;
mod linear;
mod persist;
mod svr;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;

pub use forest::{fit_forest, tree_seed, ForestModel, Node, RegressionTree};
pub use linear::{fit_linear, LinearModel};
pub use persist::{load_model, save_model, FORMAT_VERSION};
pub use svr::{fit_svr, Kernel, SvrDiagnostics, SvrModel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("DimensionMismatch: expected {expected} values, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("RankDeficient: design matrix has rank {rank}, needs {required}")]
    RankDeficient { rank: usize, required: usize },
    #[error("NotConverged: SMO made no progress; KKT violation {violation:.3e} after {iterations} iterations")]
    NotConverged { iterations: usize, violation: f64 },
    #[error("InsufficientData: {0}")]
    InsufficientData(String),
    #[error("InvalidParams: {0}")]
    InvalidParams(String),
    #[error("NonFinite: {0}")]
    NonFinite(String),
    #[error("UnknownVersion: {0}")]
    UnknownVersion(String),
    #[error("MalformedDocument: {0}")]
    MalformedDocument(String),
}

/// Model families, in the fixed order used to break ties between reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Linear,
    Svr,
    Forest,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Linear, ModelKind::Svr, ModelKind::Forest];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::Svr => "svr",
            ModelKind::Forest => "forest",
        }
    }

    /// Long name, as used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Linear => "Linear Regression",
            ModelKind::Svr => "Support Vector Regression",
            ModelKind::Forest => "Random Forest Regression",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(ModelKind::Linear),
            "svr" => Ok(ModelKind::Svr),
            "forest" | "random_forest" | "rf" => Ok(ModelKind::Forest),
            other => Err(ModelError::InvalidParams(format!("unknown model kind {other:?}"))),
        }
    }
}

/// `gamma` for the RBF kernel: either fixed, or `1 / (m * var(X))` computed
/// from the training matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gamma {
    Scale,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelSpec {
    Rbf(Gamma),
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    pub ridge_lambda: f64,
}

impl Default for LinearParams {
    fn default() -> Self {
        LinearParams { ridge_lambda: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon: f64,
    pub kernel: KernelSpec,
    /// Stop once the maximal KKT violation drops to this value.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SvrParams {
    fn default() -> Self {
        SvrParams {
            c: 1.0,
            epsilon: 0.1,
            kernel: KernelSpec::Rbf(Gamma::Scale),
            tolerance: 1e-3,
            max_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` grows until the other stopping rules apply.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub bootstrap: bool,
    /// Features examined per split; `None` means all of them.
    pub max_features: Option<usize>,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            bootstrap: true,
            max_features: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub linear: LinearParams,
    pub svr: SvrParams,
    pub forest: ForestParams,
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::InvalidParams(m));
        if !(self.linear.ridge_lambda >= 0.0 && self.linear.ridge_lambda.is_finite()) {
            return bad(format!("ridge_lambda must be >= 0, got {}", self.linear.ridge_lambda));
        }
        let s = &self.svr;
        if !(s.c > 0.0 && s.c.is_finite()) {
            return bad(format!("svr c must be > 0, got {}", s.c));
        }
        if !(s.epsilon >= 0.0 && s.epsilon.is_finite()) {
            return bad(format!("svr epsilon must be >= 0, got {}", s.epsilon));
        }
        if !(s.tolerance > 0.0) {
            return bad(format!("svr tolerance must be > 0, got {}", s.tolerance));
        }
        if s.max_iterations == 0 {
            return bad("svr max_iterations must be >= 1".into());
        }
        if let KernelSpec::Rbf(Gamma::Value(g)) = s.kernel {
            if !(g > 0.0 && g.is_finite()) {
                return bad(format!("rbf gamma must be > 0, got {g}"));
            }
        }
        let f = &self.forest;
        if f.n_trees == 0 {
            return bad("forest n_trees must be >= 1".into());
        }
        if f.min_samples_split < 2 {
            return bad("forest min_samples_split must be >= 2".into());
        }
        if f.max_features == Some(0) {
            return bad("forest max_features must be >= 1".into());
        }
        Ok(())
    }
}

/// The uniform prediction contract shared by all fitted models.
pub trait Regressor {
    fn kind(&self) -> ModelKind;

    fn feature_labels(&self) -> &[String];

    /// Prediction for an input of the right length.
    fn predict_unchecked(&self, x: &[f64]) -> f64;

    fn predict(&self, x: &[f64]) -> Result<f64, ModelError> {
        let expected = self.feature_labels().len();
        if x.len() != expected {
            return Err(ModelError::DimensionMismatch {
                expected,
                found: x.len(),
            });
        }
        Ok(self.predict_unchecked(x))
    }

    fn predict_rows(&self, x: &Matrix) -> Result<Vec<f64>, ModelError> {
        x.iter_rows().map(|r| self.predict(r)).collect()
    }
}

/// Any fitted model.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Linear(LinearModel),
    Svr(SvrModel),
    Forest(ForestModel),
}

impl FittedModel {
    fn inner(&self) -> &dyn Regressor {
        match self {
            FittedModel::Linear(m) => m,
            FittedModel::Svr(m) => m,
            FittedModel::Forest(m) => m,
        }
    }
}

impl Regressor for FittedModel {
    fn kind(&self) -> ModelKind {
        self.inner().kind()
    }

    fn feature_labels(&self) -> &[String] {
        self.inner().feature_labels()
    }

    fn predict_unchecked(&self, x: &[f64]) -> f64 {
        self.inner().predict_unchecked(x)
    }
}

impl From<LinearModel> for FittedModel {
    fn from(m: LinearModel) -> Self {
        FittedModel::Linear(m)
    }
}

impl From<SvrModel> for FittedModel {
    fn from(m: SvrModel) -> Self {
        FittedModel::Svr(m)
    }
}

impl From<ForestModel> for FittedModel {
    fn from(m: ForestModel) -> Self {
        FittedModel::Forest(m)
    }
}

/// Fits the requested model kind with its parameters from `params`.
pub fn fit(
    kind: ModelKind,
    x: &Matrix,
    y: &[f64],
    labels: &[String],
    params: &ModelParams,
) -> Result<FittedModel, ModelError> {
    params.validate()?;
    Ok(match kind {
        ModelKind::Linear => fit_linear(x, y, labels, params.linear.ridge_lambda)?.into(),
        ModelKind::Svr => fit_svr(x, y, labels, &params.svr)?.into(),
        ModelKind::Forest => fit_forest(x, y, labels, &params.forest)?.into(),
    })
}

/// Shape and finiteness checks common to every fitter.
pub(crate) fn check_training_data(
    x: &Matrix,
    y: &[f64],
    labels: &[String],
    min_rows: usize,
) -> Result<(), ModelError> {
    if x.rows() != y.len() {
        return Err(ModelError::DimensionMismatch {
            expected: x.rows(),
            found: y.len(),
        });
    }
    if x.cols() != labels.len() {
        return Err(ModelError::DimensionMismatch {
            expected: x.cols(),
            found: labels.len(),
        });
    }
    if x.cols() == 0 {
        return Err(ModelError::InsufficientData("at least one feature is required".into()));
    }
    if x.rows() < min_rows {
        return Err(ModelError::InsufficientData(format!(
            "{} rows given, at least {min_rows} required",
            x.rows()
        )));
    }
    if x.as_slice().iter().chain(y).any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite("training data contains NaN or infinity".into()));
    }
    Ok(())
}
