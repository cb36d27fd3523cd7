//! Regression error metrics, fuzzy-label classification scores, and the
//! end-to-end assessment pipeline.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataio::{self, Dataset};
use crate::fuzzy::{canonical_label, FuzzyPartition};
use crate::regression::{self, save_model, FittedModel, ModelKind, ModelParams, Regressor, SvrDiagnostics};
use crate::stats;
use crate::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("LengthMismatch: {0} true values vs {1} predictions")]
    LengthMismatch(usize, usize),
    #[error("Empty: no samples to score")]
    Empty,
    #[error("UnknownTerm: {0}")]
    UnknownTerm(String),
    #[error("NonFinite: prediction or target is NaN or infinite")]
    NonFinite,
}

/// MAE, MSE and RMSE over a test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub model_kind: Option<ModelKind>,
    pub n_test: usize,
    pub mae: f64,
    pub mse: f64,
    pub rmse: f64,
}

pub fn regression_metrics(y_true: &[f64], y_pred: &[f64]) -> Result<RegressionReport, EvalError> {
    if y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch(y_true.len(), y_pred.len()));
    }
    if y_true.is_empty() {
        return Err(EvalError::Empty);
    }
    if y_true.iter().chain(y_pred).any(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite);
    }
    let n = y_true.len() as f64;
    let (mut abs, mut sq) = (0.0, 0.0);
    for (t, p) in y_true.iter().zip(y_pred) {
        let e = t - p;
        abs += e.abs();
        sq += e * e;
    }
    let mse = sq / n;
    Ok(RegressionReport {
        model_kind: None,
        n_test: y_true.len(),
        mae: abs / n,
        mse,
        rmse: mse.sqrt(),
    })
}

/// Counts with rows = true term, columns = predicted term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub term_order: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn from_labels<S: AsRef<str>>(
        true_terms: &[S],
        pred_terms: &[S],
        term_order: &[String],
    ) -> Result<Self, EvalError> {
        if true_terms.len() != pred_terms.len() {
            return Err(EvalError::LengthMismatch(true_terms.len(), pred_terms.len()));
        }
        let order: Vec<String> = term_order.iter().map(|t| canonical_label(t).to_string()).collect();
        let find = |t: &str| {
            let t = canonical_label(t);
            order
                .iter()
                .position(|o| o == t)
                .ok_or_else(|| EvalError::UnknownTerm(t.to_string()))
        };
        let k = order.len();
        let mut counts = vec![vec![0; k]; k];
        for (t, p) in true_terms.iter().zip(pred_terms) {
            counts[find(t.as_ref())?][find(p.as_ref())?] += 1;
        }
        Ok(ConfusionMatrix {
            term_order: order,
            counts,
        })
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }

    /// Samples whose true term is class `i`.
    pub fn support(&self, i: usize) -> usize {
        self.counts[i].iter().sum()
    }

    pub fn predicted(&self, i: usize) -> usize {
        self.counts.iter().map(|r| r[i]).sum()
    }

    /// One-vs-rest scores for class `i`; a zero denominator yields 0.
    pub fn class_scores(&self, i: usize) -> ClassScores {
        let tp = self.counts[i][i] as f64;
        let ratio = |num: f64, den: usize| if den == 0 { 0.0 } else { num / den as f64 };
        let precision = ratio(tp, self.predicted(i));
        let recall = ratio(tp, self.support(i));
        ClassScores {
            label: self.term_order[i].clone(),
            precision,
            recall,
            f1: harmonic_mean(precision, recall),
            support: self.support(i),
        }
    }
}

fn harmonic_mean(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragedScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Accuracy plus per-class, macro-averaged and single-class views of
/// precision, recall and F1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub accuracy: f64,
    pub per_class: Vec<ClassScores>,
    /// Unweighted mean over the classes that occur among true or predicted terms.
    pub macro_avg: AveragedScores,
    pub positive_class: ClassScores,
    pub confusion: ConfusionMatrix,
}

pub fn classification_metrics<S: AsRef<str>>(
    true_terms: &[S],
    pred_terms: &[S],
    term_order: &[String],
    positive_class: &str,
) -> Result<ClassificationReport, EvalError> {
    let confusion = ConfusionMatrix::from_labels(true_terms, pred_terms, term_order)?;
    let total = confusion.total();
    if total == 0 {
        return Err(EvalError::Empty);
    }
    let k = confusion.term_order.len();
    let per_class: Vec<ClassScores> = (0..k).map(|i| confusion.class_scores(i)).collect();
    let pos = canonical_label(positive_class);
    let positive = per_class
        .iter()
        .find(|c| c.label == pos)
        .cloned()
        .ok_or_else(|| EvalError::UnknownTerm(positive_class.to_string()))?;
    let present: Vec<&ClassScores> = (0..k)
        .filter(|&i| confusion.support(i) + confusion.predicted(i) > 0)
        .map(|i| &per_class[i])
        .collect();
    let mean = |f: fn(&ClassScores) -> f64| present.iter().map(|c| f(c)).sum::<f64>() / present.len() as f64;
    let macro_avg = AveragedScores {
        precision: mean(|c| c.precision),
        recall: mean(|c| c.recall),
        f1: mean(|c| c.f1),
    };
    Ok(ClassificationReport {
        accuracy: confusion.trace() as f64 / total as f64,
        per_class,
        macro_avg,
        positive_class: positive,
        confusion,
    })
}

/// How the pipeline picks regressors' inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureChoice {
    /// Use exactly these columns.
    Explicit(Vec<String>),
    /// Select required columns whose |r| with the target exceeds the threshold.
    Threshold(f64),
}

impl Default for FeatureChoice {
    fn default() -> Self {
        FeatureChoice::Threshold(0.3)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub features: FeatureChoice,
    pub test_fraction: f64,
    pub seed: u64,
    pub params: ModelParams,
    pub partition: FuzzyPartition,
    pub positive_class: String,
    /// Models to fit and compare, in report order.
    pub models: Vec<ModelKind>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            features: FeatureChoice::default(),
            test_fraction: 0.2,
            seed: 42,
            params: ModelParams::default(),
            partition: FuzzyPartition::default_partition(),
            positive_class: "High".to_string(),
            models: ModelKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub seed: u64,
    pub test_fraction: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub test_indices: Vec<usize>,
}

/// One test respondent, as seen by the winning model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestAssessment {
    pub row: usize,
    pub actual: f64,
    pub predicted: f64,
    pub true_term: String,
    pub predicted_term: String,
    pub predicted_degree: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub target: String,
    pub features: Vec<String>,
    /// Correlation of each feature with the target when chosen by threshold.
    pub feature_correlations: Option<Vec<f64>>,
    pub split: SplitSummary,
    pub regression: Vec<RegressionReport>,
    pub svr_diagnostics: Option<SvrDiagnostics>,
    pub winner: ModelKind,
    pub partition: FuzzyPartition,
    pub classification: ClassificationReport,
    pub assessments: Vec<TestAssessment>,
}

/// The pipeline's result: the report, every fitted model (in the order of
/// `PipelineConfig::models`) and the winner's persisted document.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub report: PipelineReport,
    pub models: Vec<FittedModel>,
    pub winning_document: String,
}

/// Lowest RMSE wins; ties fall to lower MAE, then to the fixed order
/// linear, svr, forest.
pub fn select_winner(reports: &[RegressionReport]) -> Option<ModelKind> {
    reports
        .iter()
        .filter_map(|r| r.model_kind.map(|k| (r, k)))
        .min_by(|(a, ka), (b, kb)| {
            a.rmse
                .total_cmp(&b.rmse)
                .then(a.mae.total_cmp(&b.mae))
                .then(ka.cmp(kb))
        })
        .map(|(_, k)| k)
}

/// Resolves the feature list, optionally returning correlations with the target.
pub fn resolve_features(
    dataset: &Dataset,
    choice: &FeatureChoice,
) -> Result<(Vec<String>, Option<Vec<f64>>), Error> {
    match choice {
        FeatureChoice::Explicit(labels) => {
            if labels.is_empty() {
                return Err(dataio::DataError::InvalidArgument("feature list is empty".into()).into());
            }
            for l in labels {
                if dataset.column_index(l).is_none() {
                    return Err(dataio::DataError::UnknownLabel(l.clone()).into());
                }
            }
            Ok((labels.clone(), None))
        }
        FeatureChoice::Threshold(t) => {
            let mut pool = dataset.candidate_features();
            pool.push(dataset.target_label().to_string());
            let corr = stats::pearson_of(dataset, &pool)?;
            let sel = stats::select_features(&corr, dataset.target_label(), *t)?;
            Ok((sel.selected_labels, Some(sel.correlations)))
        }
    }
}

/// Runs selection, split, fitting, scoring, winner choice, fuzzification
/// and classification scoring.
pub fn evaluate_pipeline(dataset: &Dataset, config: &PipelineConfig) -> Result<PipelineOutcome, Error> {
    if config.models.is_empty() {
        return Err(regression::ModelError::InvalidParams("no model kinds requested".into()).into());
    }
    config.params.validate()?;
    if config.partition.term_index(&config.positive_class).is_none() {
        return Err(EvalError::UnknownTerm(config.positive_class.clone()).into());
    }
    let (features, feature_correlations) = resolve_features(dataset, &config.features)?;
    let split = dataio::split(dataset, config.test_fraction, config.seed)?;
    let (x, y) = dataset.design(&features)?;
    let x_train = x.select_rows(&split.train_indices);
    let y_train: Vec<f64> = split.train_indices.iter().map(|&i| y[i]).collect();
    let x_test = x.select_rows(&split.test_indices);
    let y_test: Vec<f64> = split.test_indices.iter().map(|&i| y[i]).collect();

    let mut params = config.params.clone();
    params.forest.seed = config.seed;

    let mut models = Vec::with_capacity(config.models.len());
    let mut reports = Vec::with_capacity(config.models.len());
    let mut predictions = Vec::with_capacity(config.models.len());
    for &kind in &config.models {
        let model = regression::fit(kind, &x_train, &y_train, &features, &params)?;
        let pred = model.predict_rows(&x_test)?;
        let mut rep = regression_metrics(&y_test, &pred)?;
        rep.model_kind = Some(kind);
        reports.push(rep);
        predictions.push(pred);
        models.push(model);
    }
    let winner = select_winner(&reports).expect("at least one model was fitted");
    let w = config.models.iter().position(|&k| k == winner).expect("winner was fitted");

    let partition = &config.partition;
    let mut assessments = Vec::with_capacity(y_test.len());
    for ((&row, &actual), &predicted) in split.test_indices.iter().zip(&y_test).zip(&predictions[w]) {
        let truth = partition.fuzzify(actual)?;
        let guess = partition.fuzzify(predicted)?;
        assessments.push(TestAssessment {
            row,
            actual,
            predicted,
            true_term: truth.chosen_term,
            predicted_term: guess.chosen_term,
            predicted_degree: guess.chosen_degree,
        });
    }
    let true_terms: Vec<&str> = assessments.iter().map(|a| a.true_term.as_str()).collect();
    let pred_terms: Vec<&str> = assessments.iter().map(|a| a.predicted_term.as_str()).collect();
    let classification = classification_metrics(&true_terms, &pred_terms, &partition.labels(), &config.positive_class)?;

    let svr_diagnostics = models.iter().find_map(|m| match m {
        FittedModel::Svr(s) => Some(s.diagnostics.clone()),
        _ => None,
    });
    let winning_document = save_model(&models[w]);
    let report = PipelineReport {
        target: dataset.target_label().to_string(),
        features,
        feature_correlations,
        split: SplitSummary {
            seed: split.seed,
            test_fraction: split.test_fraction,
            n_train: split.train_indices.len(),
            n_test: split.test_indices.len(),
            test_indices: split.test_indices,
        },
        regression: reports,
        svr_diagnostics,
        winner,
        partition: partition.clone(),
        classification,
        assessments,
    };
    Ok(PipelineOutcome {
        report,
        models,
        winning_document,
    })
}

impl PipelineReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Plain-text rendering: an error-measure table per model, then the
    /// classification scores of the winner's fuzzified predictions.
    pub fn render_tables(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Target: {}", self.target);
        let _ = writeln!(out, "Features: {}", self.features.join(", "));
        let _ = writeln!(
            out,
            "Split: {} train / {} test (fraction {}, seed {})",
            self.split.n_train, self.split.n_test, self.split.test_fraction, self.split.seed
        );
        out.push('\n');
        out.push_str(&render_regression_table(&self.regression));
        let _ = writeln!(out, "\nSelected model: {}", self.winner.display_name());
        out.push('\n');
        out.push_str(&render_classification_table(&self.classification, self.winner));
        out
    }
}

pub fn render_regression_table(reports: &[RegressionReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<28}{:>10}{:>10}{:>10}", "Measures of error", "MAE", "MSE", "RMSE");
    for r in reports {
        let name = r.model_kind.map_or("model", |k| k.display_name());
        let _ = writeln!(out, "{:<28}{:>10.3}{:>10.3}{:>10.3}", name, r.mae, r.mse, r.rmse);
    }
    out
}

pub fn render_classification_table(c: &ClassificationReport, winner: ModelKind) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<40}{:>10}{:>11}{:>10}{:>10}",
        "Fuzzy classification", "Accuracy", "Precision", "Recall", "F1 Score"
    );
    let name = format!("{} Fuzzy model", winner.display_name());
    let p = &c.positive_class;
    let _ = writeln!(
        out,
        "{:<40}{:>10.4}{:>11.4}{:>10.4}{:>10.4}",
        format!("{name} [{}]", p.label),
        c.accuracy,
        p.precision,
        p.recall,
        p.f1
    );
    let m = &c.macro_avg;
    let _ = writeln!(
        out,
        "{:<40}{:>10.4}{:>11.4}{:>10.4}{:>10.4}",
        format!("{name} [macro]"),
        c.accuracy,
        m.precision,
        m.recall,
        m.f1
    );
    out.push('\n');
    let _ = writeln!(out, "{:<12}{:>11}{:>10}{:>10}{:>9}", "Class", "Precision", "Recall", "F1", "Support");
    for s in &c.per_class {
        let _ = writeln!(
            out,
            "{:<12}{:>11.4}{:>10.4}{:>10.4}{:>9}",
            s.label, s.precision, s.recall, s.f1, s.support
        );
    }
    out.push('\n');
    let _ = write!(out, "{:<12}", "true\\pred");
    for t in &c.confusion.term_order {
        let _ = write!(out, "{t:>9}");
    }
    out.push('\n');
    for (t, row) in c.confusion.term_order.iter().zip(&c.confusion.counts) {
        let _ = write!(out, "{t:<12}");
        for n in row {
            let _ = write!(out, "{n:>9}");
        }
        out.push('\n');
    }
    out
}
