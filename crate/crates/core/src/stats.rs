//! Descriptive statistics, Pearson correlation and threshold feature selection.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataio::Dataset;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("EmptyColumn: {0} has no values")]
    EmptyColumn(String),
    #[error("UnknownLabel: {0}")]
    UnknownLabel(String),
    #[error("InvalidThreshold: {0}")]
    InvalidThreshold(f64),
    #[error("NoFeaturesSelected: no |r| against {target} exceeds {threshold}; realized: {}", format_realized(.realized))]
    NoFeaturesSelected {
        target: String,
        threshold: f64,
        /// Every candidate's correlation with the target, strongest first.
        realized: Vec<(String, Option<f64>)>,
    },
}

fn format_realized(realized: &[(String, Option<f64>)]) -> String {
    realized
        .iter()
        .map(|(l, r)| match r {
            Some(r) => format!("{l}={r:.4}"),
            None => format!("{l}=undefined"),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Summary of one column. `std` is the sample deviation (divisor n - 1) and is
/// `None` for a single observation. Quantiles interpolate linearly between
/// closest ranks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub label: String,
    pub count: usize,
    pub mean: f64,
    pub std: Option<f64>,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub columns: Vec<ColumnSummary>,
}

impl DescriptiveStats {
    pub fn get(&self, label: &str) -> Option<&ColumnSummary> {
        self.columns.iter().find(|c| c.label == label)
    }

    /// Renders a count/mean/std/min/25%/50%/75%/max table as CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,count,mean,std,min,25%,50%,75%,max\n");
        for c in &self.columns {
            let std = c.std.map_or(String::new(), |s| format!("{s:.4}"));
            out.push_str(&format!(
                "{},{},{:.4},{},{:.4},{:.4},{:.4},{:.4},{:.4}\n",
                c.label, c.count, c.mean, std, c.min, c.q25, c.median, c.q75, c.max
            ));
        }
        out
    }
}

/// Quantile `p` of sorted data, linear interpolation between closest ranks.
pub(crate) fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(label: &str, values: &[f64]) -> Result<ColumnSummary, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyColumn(label.to_string()));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = (n >= 2).then(|| {
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    });
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(ColumnSummary {
        label: label.to_string(),
        count: n,
        mean,
        std,
        min: sorted[0],
        q25: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q75: quantile_sorted(&sorted, 0.75),
        max: sorted[n - 1],
    })
}

/// Summarizes every column that has at least one value. Optional columns
/// report their own count; a wholly empty optional column is omitted.
pub fn describe(dataset: &Dataset) -> DescriptiveStats {
    let columns = dataset
        .column_labels()
        .iter()
        .enumerate()
        .filter_map(|(c, label)| {
            let values: Vec<f64> = dataset.column(c).flatten().collect();
            summarize(label, &values).ok()
        })
        .collect();
    DescriptiveStats { columns }
}

/// Pearson product-moment correlation. `None` when fewer than two pairs or
/// either side has zero variance.
pub fn pearson_pair(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Symmetric matrix of pairwise Pearson coefficients. Undefined entries
/// (a constant column, or fewer than two complete pairs) are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    labels: Vec<String>,
    values: Vec<Option<f64>>,
}

impl CorrelationMatrix {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i * self.labels.len() + j]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn between(&self, a: &str, b: &str) -> Result<Option<f64>, StatsError> {
        let i = self.index_of(a).ok_or_else(|| StatsError::UnknownLabel(a.to_string()))?;
        let j = self.index_of(b).ok_or_else(|| StatsError::UnknownLabel(b.to_string()))?;
        Ok(self.get(i, j))
    }

    /// Every other label's correlation with `target`, in descending order of
    /// the signed coefficient. Undefined entries go last, in matrix order.
    pub fn sorted_against(&self, target: &str) -> Result<Vec<(String, Option<f64>)>, StatsError> {
        let t = self
            .index_of(target)
            .ok_or_else(|| StatsError::UnknownLabel(target.to_string()))?;
        let mut pairs: Vec<(String, Option<f64>)> = (0..self.len())
            .filter(|&i| i != t)
            .map(|i| (self.labels[i].clone(), self.get(i, t)))
            .collect();
        pairs.sort_by(|a, b| match (a.1, b.1) {
            (Some(x), Some(y)) => y.total_cmp(&x),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        });
        Ok(pairs)
    }

    /// Renders the matrix as CSV with a leading label column; undefined
    /// entries are written as `NA`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(l);
            for j in 0..self.len() {
                match self.get(i, j) {
                    Some(r) => out.push_str(&format!(",{r:.4}")),
                    None => out.push_str(",NA"),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Correlation matrix over every dataset column, using pairwise-complete rows.
pub fn pearson(dataset: &Dataset) -> CorrelationMatrix {
    let labels = dataset.column_labels().to_vec();
    pearson_of(dataset, &labels).expect("labels come from the dataset")
}

/// Correlation matrix over the named columns only.
pub fn pearson_of(dataset: &Dataset, labels: &[String]) -> Result<CorrelationMatrix, StatsError> {
    let cols: Vec<Vec<Option<f64>>> = labels
        .iter()
        .map(|l| {
            dataset
                .column_index(l)
                .map(|c| dataset.column(c).collect())
                .ok_or_else(|| StatsError::UnknownLabel(l.clone()))
        })
        .collect::<Result<_, _>>()?;
    let m = labels.len();
    let mut values = vec![None; m * m];
    for i in 0..m {
        for j in i..m {
            let (x, y): (Vec<f64>, Vec<f64>) = cols[i]
                .iter()
                .zip(&cols[j])
                .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
                .unzip();
            let r = if i == j {
                pearson_pair(&x, &y).map(|_| 1.0)
            } else {
                pearson_pair(&x, &y)
            };
            values[i * m + j] = r;
            values[j * m + i] = r;
        }
    }
    Ok(CorrelationMatrix {
        labels: labels.to_vec(),
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSelection {
    pub target_label: String,
    pub threshold: f64,
    pub selected_labels: Vec<String>,
    /// Correlation of each selected label with the target, same order.
    pub correlations: Vec<f64>,
}

/// Picks labels whose |r| with `target` strictly exceeds `threshold`,
/// strongest first; equal |r| keeps matrix order.
pub fn select_features(
    corr: &CorrelationMatrix,
    target: &str,
    threshold: f64,
) -> Result<FeatureSelection, StatsError> {
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(StatsError::InvalidThreshold(threshold));
    }
    let t = corr
        .index_of(target)
        .ok_or_else(|| StatsError::UnknownLabel(target.to_string()))?;
    let mut candidates: Vec<(usize, Option<f64>)> = (0..corr.len())
        .filter(|&i| i != t)
        .map(|i| (i, corr.get(i, t)))
        .collect();
    // stable sort keeps matrix order among equal magnitudes
    candidates.sort_by(|a, b| match (a.1, b.1) {
        (Some(x), Some(y)) => y.abs().total_cmp(&x.abs()),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    });
    let (selected, correlations): (Vec<String>, Vec<f64>) = candidates
        .iter()
        .filter_map(|&(i, r)| r.filter(|r| r.abs() > threshold).map(|r| (corr.labels[i].clone(), r)))
        .unzip();
    if selected.is_empty() {
        return Err(StatsError::NoFeaturesSelected {
            target: target.to_string(),
            threshold,
            realized: candidates
                .into_iter()
                .map(|(i, r)| (corr.labels[i].clone(), r))
                .collect(),
        });
    }
    Ok(FeatureSelection {
        target_label: target.to_string(),
        threshold,
        selected_labels: selected,
        correlations,
    })
}
