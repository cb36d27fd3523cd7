//! Survey schema, cohort ingestion, train/test splitting and synthetic cohorts.
//!
//! A [`SurveySchema`] lists the questionnaire fields in order. Parsing a
//! delimited file against it yields a [`Dataset`]: every non-identity field
//! becomes a numeric column, identity fields (name, phone) are dropped on the
//! way in and never stored.
//!
//! Cells are `Option<f64>`. Only optional fields (GPA in the Balance-Wheel
//! schema) may hold `None`; required columns are always complete.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;

/// Errors raised while building schemas, parsing cohorts or splitting them.
///
/// Row numbers are 1-based data rows: the first line after the header is row 1.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("EmptyFile: no header line found")]
    EmptyFile,
    #[error("MissingColumn: {0}")]
    MissingColumn(String),
    #[error("DuplicateColumn: {0}")]
    DuplicateColumn(String),
    #[error("OutOfRange: row {row}, column {label}: value {value} outside [{min}, {max}]")]
    OutOfRange {
        row: usize,
        label: String,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("NotNumeric: row {row}, column {label}: {value:?} is not a number")]
    NotNumeric {
        row: usize,
        label: String,
        value: String,
    },
    #[error("NotInteger: row {row}, column {label}: {value} is not a whole score")]
    NotInteger { row: usize, label: String, value: f64 },
    #[error("MissingValue: row {row}, column {label} is empty")]
    MissingValue { row: usize, label: String },
    #[error("RaggedRow: row {row} has {found} cells, header has {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("Csv: {0}")]
    Csv(String),
    #[error("InvalidSchema: {0}")]
    InvalidSchema(String),
    #[error("InvalidDataset: {0}")]
    InvalidDataset(String),
    #[error("UnknownLabel: {0}")]
    UnknownLabel(String),
    #[error("IncompleteColumn: {label} has {missing} missing cell(s) among the selected rows")]
    IncompleteColumn { label: String, missing: usize },
    #[error("InvalidFraction: test fraction {0} must lie strictly between 0 and 1")]
    InvalidFraction(f64),
    #[error("DegenerateSplit: {n} rows with {test} test rows leaves one side empty")]
    DegenerateSplit { n: usize, test: usize },
    #[error("InvalidArgument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    /// Whole-number score within the field's scale.
    OrdinalScale,
    /// Any finite decimal within the field's scale.
    Continuous,
    /// Personal data; parsed and dropped.
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub label: String,
    /// Balance-Wheel sector, e.g. "Career" or "Health".
    pub wheel_section: String,
    pub scale_min: f64,
    pub scale_max: f64,
    pub kind: FieldKind,
    pub required: bool,
}

impl FieldSpec {
    /// A required 1-10 score.
    pub fn scale(label: &str, wheel_section: &str) -> Self {
        FieldSpec {
            label: label.to_string(),
            wheel_section: wheel_section.to_string(),
            scale_min: 1.0,
            scale_max: 10.0,
            kind: FieldKind::OrdinalScale,
            required: true,
        }
    }

    pub fn identity(label: &str) -> Self {
        FieldSpec {
            label: label.to_string(),
            wheel_section: "General".to_string(),
            scale_min: 0.0,
            scale_max: 1.0,
            kind: FieldKind::Identity,
            required: false,
        }
    }

    pub fn continuous(label: &str, wheel_section: &str, min: f64, max: f64, required: bool) -> Self {
        FieldSpec {
            label: label.to_string(),
            wheel_section: wheel_section.to_string(),
            scale_min: min,
            scale_max: max,
            kind: FieldKind::Continuous,
            required,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.kind == FieldKind::Identity
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.scale_min && v <= self.scale_max
    }
}

/// Ordered questionnaire fields plus the designated target field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveySchema {
    fields: Vec<FieldSpec>,
    target_label: String,
}

/// The four predictors the threshold rule picks on the Balance-Wheel cohort.
pub const COHORT_FEATURES: [&str; 4] = ["CommunityRate", "ComfortZone", "SalaryExp", "CommunicationRate"];

/// The default regression target: openness to new opportunities.
pub const DEFAULT_TARGET: &str = "Opportunities";

impl SurveySchema {
    pub fn new(fields: Vec<FieldSpec>, target_label: &str) -> Result<Self, DataError> {
        let mut seen = HashSet::new();
        for f in &fields {
            if !seen.insert(f.label.as_str()) {
                return Err(DataError::InvalidSchema(format!("duplicate label {}", f.label)));
            }
            if !(f.scale_min < f.scale_max) {
                return Err(DataError::InvalidSchema(format!(
                    "{}: scale_min {} must be below scale_max {}",
                    f.label, f.scale_min, f.scale_max
                )));
            }
        }
        match fields.iter().find(|f| f.label == target_label) {
            None => {
                return Err(DataError::InvalidSchema(format!(
                    "target {target_label} is not a schema field"
                )))
            }
            Some(f) if f.is_identity() => {
                return Err(DataError::InvalidSchema(format!(
                    "target {target_label} is an identity field"
                )))
            }
            Some(_) => {}
        }
        if fields.iter().filter(|f| !f.is_identity()).count() < 2 {
            return Err(DataError::InvalidSchema(
                "a schema needs at least two non-identity fields".into(),
            ));
        }
        Ok(SurveySchema {
            fields,
            target_label: target_label.to_string(),
        })
    }

    /// The Balance-Wheel questionnaire: two identity questions, fourteen 1-10
    /// scales, and an optional GPA on [0, 4]. Target is `Opportunities`.
    pub fn balance_wheel() -> Self {
        let fields = vec![
            FieldSpec::identity("Name"),
            FieldSpec::identity("PhoneNumber"),
            FieldSpec::scale("LearningRate", "Career"),
            FieldSpec::scale("WorkingExp", "Career"),
            FieldSpec::scale("SalaryExp", "Money"),
            FieldSpec::scale("FamilyTime", "Family"),
            FieldSpec::scale("CommunicationRate", "Fun"),
            FieldSpec::scale("HobbyTimeRate", "Fun"),
            FieldSpec::scale("CommunityRate", "Friends"),
            FieldSpec::scale("PhysicalFormRate", "Health"),
            FieldSpec::scale("WantToUpPhysicalForm", "Health"),
            FieldSpec::scale("NutritionRate", "Health"),
            FieldSpec::scale("ConflictSituations", "Love / Career / Friends / Family"),
            FieldSpec::scale("ComfortZone", "Spirituality"),
            FieldSpec::scale(DEFAULT_TARGET, "All aspects"),
            FieldSpec::scale("ChangeLife", "All aspects"),
            FieldSpec::continuous("GPA", "Academic", 0.0, 4.0, false),
        ];
        SurveySchema::new(fields, DEFAULT_TARGET).expect("built-in schema is valid")
    }

    /// Schema of [`generate_synthetic`] output: continuous features `X1..Xk`
    /// and target `Y`, all on [1, 10].
    pub fn synthetic(n_features: usize) -> Self {
        let mut fields: Vec<FieldSpec> = (1..=n_features)
            .map(|i| FieldSpec::continuous(&format!("X{i}"), "Synthetic", 1.0, 10.0, true))
            .collect();
        fields.push(FieldSpec::continuous("Y", "Synthetic", 1.0, 10.0, true));
        SurveySchema::new(fields, "Y").expect("synthetic schema needs at least one feature")
    }

    pub fn fields(&self) -> &[FieldSpec] {
        &self.fields
    }

    pub fn target_label(&self) -> &str {
        &self.target_label
    }

    pub fn field(&self, label: &str) -> Option<&FieldSpec> {
        self.fields.iter().find(|f| f.label == label)
    }

    /// Non-identity fields, in schema order. These become dataset columns.
    pub fn data_fields(&self) -> impl Iterator<Item = &FieldSpec> + '_ {
        self.fields.iter().filter(|f| !f.is_identity())
    }

    /// Returns a copy of the schema with a different target field.
    pub fn with_target(&self, target_label: &str) -> Result<Self, DataError> {
        SurveySchema::new(self.fields.clone(), target_label)
    }
}

/// One respondent's answers.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SurveyResponse {
    pub scores: BTreeMap<String, i32>,
    pub gpa: Option<f64>,
}

impl SurveyResponse {
    /// Checks every required ordinal field is present and in range.
    pub fn validate(&self, schema: &SurveySchema) -> Result<(), DataError> {
        for f in schema.data_fields() {
            if f.kind != FieldKind::OrdinalScale {
                continue;
            }
            match self.scores.get(&f.label) {
                None if f.required => return Err(DataError::MissingColumn(f.label.clone())),
                None => {}
                Some(&v) if !f.contains(f64::from(v)) => {
                    return Err(DataError::OutOfRange {
                        row: 1,
                        label: f.label.clone(),
                        value: f64::from(v),
                        min: f.scale_min,
                        max: f.scale_max,
                    })
                }
                Some(_) => {}
            }
        }
        if let Some(g) = self.gpa {
            if !(0.0..=4.0).contains(&g) {
                return Err(DataError::OutOfRange {
                    row: 1,
                    label: "GPA".into(),
                    value: g,
                    min: 0.0,
                    max: 4.0,
                });
            }
        }
        Ok(())
    }

    fn value(&self, label: &str) -> Option<f64> {
        if label == "GPA" {
            return self.gpa;
        }
        self.scores.get(label).map(|&v| f64::from(v))
    }
}

/// A validated cohort: an n x m numeric table with a designated target column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: SurveySchema,
    column_labels: Vec<String>,
    n_rows: usize,
    cells: Vec<Option<f64>>,
    target_index: usize,
}

impl Dataset {
    /// Builds a dataset whose columns are the schema's non-identity fields in
    /// order. Every row must supply one cell per column.
    pub fn from_rows(schema: SurveySchema, rows: Vec<Vec<Option<f64>>>) -> Result<Self, DataError> {
        let fields: Vec<&FieldSpec> = schema.data_fields().collect();
        let m = fields.len();
        if rows.is_empty() {
            return Err(DataError::InvalidDataset("a dataset needs at least one row".into()));
        }
        let mut cells = Vec::with_capacity(rows.len() * m);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(DataError::RaggedRow {
                    row: i + 1,
                    expected: m,
                    found: row.len(),
                });
            }
            for (f, cell) in fields.iter().zip(row) {
                check_cell(f, *cell, i + 1)?;
                cells.push(*cell);
            }
        }
        let column_labels: Vec<String> = fields.iter().map(|f| f.label.clone()).collect();
        let target_index = column_labels
            .iter()
            .position(|l| l == schema.target_label())
            .expect("schema guarantees the target is a data field");
        Ok(Dataset {
            schema,
            column_labels,
            n_rows: rows.len(),
            cells,
            target_index,
        })
    }

    pub fn from_responses(schema: SurveySchema, responses: &[SurveyResponse]) -> Result<Self, DataError> {
        let mut rows = Vec::with_capacity(responses.len());
        for (i, r) in responses.iter().enumerate() {
            r.validate(&schema).map_err(|e| with_row(e, i + 1))?;
            rows.push(schema.data_fields().map(|f| r.value(&f.label)).collect());
        }
        Dataset::from_rows(schema, rows)
    }

    pub fn schema(&self) -> &SurveySchema {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.column_labels.len()
    }

    pub fn column_labels(&self) -> &[String] {
        &self.column_labels
    }

    pub fn target_index(&self) -> usize {
        self.target_index
    }

    pub fn target_label(&self) -> &str {
        &self.column_labels[self.target_index]
    }

    pub fn column_index(&self, label: &str) -> Option<usize> {
        self.column_labels.iter().position(|l| l == label)
    }

    pub fn value(&self, row: usize, col: usize) -> Option<f64> {
        self.cells[row * self.n_cols() + col]
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = Option<f64>> + '_ {
        (0..self.n_rows).map(move |r| self.value(r, col))
    }

    /// Whether the column is declared required (and therefore complete).
    pub fn is_required(&self, col: usize) -> bool {
        self.schema
            .field(&self.column_labels[col])
            .is_some_and(|f| f.required)
    }

    /// Labels of the complete, required columns other than the target:
    /// the default candidate pool for feature selection.
    pub fn candidate_features(&self) -> Vec<String> {
        (0..self.n_cols())
            .filter(|&c| c != self.target_index && self.is_required(c))
            .map(|c| self.column_labels[c].clone())
            .collect()
    }

    /// Extracts the feature matrix for `features` and the target vector.
    ///
    /// Fails if a label is unknown, names the target itself, or has missing cells.
    pub fn design(&self, features: &[String]) -> Result<(Matrix, Vec<f64>), DataError> {
        let mut idx = Vec::with_capacity(features.len());
        for f in features {
            let c = self
                .column_index(f)
                .ok_or_else(|| DataError::UnknownLabel(f.clone()))?;
            if c == self.target_index {
                return Err(DataError::InvalidArgument(format!(
                    "{f} is the target and cannot be a feature"
                )));
            }
            idx.push(c);
        }
        for (&c, f) in idx.iter().zip(features).chain(std::iter::once((&self.target_index, &self.column_labels[self.target_index]))) {
            let missing = self.column(c).filter(Option::is_none).count();
            if missing > 0 {
                return Err(DataError::IncompleteColumn {
                    label: f.clone(),
                    missing,
                });
            }
        }
        let mut data = Vec::with_capacity(self.n_rows * idx.len());
        let mut y = Vec::with_capacity(self.n_rows);
        for r in 0..self.n_rows {
            for &c in &idx {
                data.push(self.value(r, c).expect("checked complete"));
            }
            y.push(self.value(r, self.target_index).expect("checked complete"));
        }
        Ok((Matrix::from_row_major(self.n_rows, idx.len(), data), y))
    }

    /// Serializes to comma-separated text with a header row. Numbers use the
    /// shortest representation that parses back to the same `f64`.
    pub fn to_csv(&self) -> String {
        let mut out = self.column_labels.join(",");
        out.push('\n');
        for r in 0..self.n_rows {
            for c in 0..self.n_cols() {
                if c > 0 {
                    out.push(',');
                }
                if let Some(v) = self.value(r, c) {
                    let _ = write!(out, "{v}");
                }
            }
            out.push('\n');
        }
        out
    }
}

fn with_row(err: DataError, row: usize) -> DataError {
    match err {
        DataError::OutOfRange {
            label, value, min, max, ..
        } => DataError::OutOfRange {
            row,
            label,
            value,
            min,
            max,
        },
        other => other,
    }
}

fn check_cell(f: &FieldSpec, cell: Option<f64>, row: usize) -> Result<(), DataError> {
    let Some(v) = cell else {
        return if f.required {
            Err(DataError::MissingValue {
                row,
                label: f.label.clone(),
            })
        } else {
            Ok(())
        };
    };
    if !v.is_finite() {
        return Err(DataError::NotNumeric {
            row,
            label: f.label.clone(),
            value: v.to_string(),
        });
    }
    if !f.contains(v) {
        return Err(DataError::OutOfRange {
            row,
            label: f.label.clone(),
            value: v,
            min: f.scale_min,
            max: f.scale_max,
        });
    }
    if f.kind == FieldKind::OrdinalScale && v.fract() != 0.0 {
        return Err(DataError::NotInteger {
            row,
            label: f.label.clone(),
            value: v,
        });
    }
    Ok(())
}

/// Parses comma-separated cohort data against `schema`.
///
/// The first line is the header. Columns are matched by label, so file column
/// order is free; identity columns and columns unknown to the schema are
/// ignored. Every required schema field must appear in the header.
pub fn parse_csv(text: &str, schema: &SurveySchema) -> Result<Dataset, DataError> {
    if text.trim().is_empty() {
        return Err(DataError::EmptyFile);
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| DataError::Csv(e.to_string()))?.clone();
    if header.iter().all(str::is_empty) {
        return Err(DataError::EmptyFile);
    }
    let mut seen = HashSet::new();
    for h in header.iter() {
        if !seen.insert(h) {
            return Err(DataError::DuplicateColumn(h.to_string()));
        }
    }

    let mut positions = Vec::new();
    for f in schema.data_fields() {
        let pos = header.iter().position(|h| h == f.label);
        if pos.is_none() && f.required {
            return Err(DataError::MissingColumn(f.label.clone()));
        }
        positions.push((f, pos));
    }

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| DataError::Csv(e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != header.len() {
            return Err(DataError::RaggedRow {
                row,
                expected: header.len(),
                found: record.len(),
            });
        }
        let mut cells = Vec::with_capacity(positions.len());
        for (f, pos) in &positions {
            let raw = pos.map_or("", |p| &record[p]);
            let cell = if raw.is_empty() {
                None
            } else {
                match raw.parse::<f64>() {
                    Ok(v) if v.is_finite() => Some(v),
                    _ => {
                        return Err(DataError::NotNumeric {
                            row,
                            label: f.label.clone(),
                            value: raw.to_string(),
                        })
                    }
                }
            };
            check_cell(f, cell, row)?;
            cells.push(cell);
        }
        rows.push(cells);
    }
    if rows.is_empty() {
        return Err(DataError::EmptyFile);
    }
    Dataset::from_rows(schema.clone(), rows)
}

/// Disjoint train and test row indices drawn from one seeded shuffle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTestSplit {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub test_fraction: f64,
    pub seed: u64,
}

/// Number of test rows for `n` rows: `round(fraction * n)`, halves rounded
/// away from zero.
pub fn test_size(n: usize, test_fraction: f64) -> usize {
    (test_fraction * n as f64).round() as usize
}

/// Splits `dataset` rows. See [`split_indices`].
pub fn split(dataset: &Dataset, test_fraction: f64, seed: u64) -> Result<TrainTestSplit, DataError> {
    split_indices(dataset.n_rows(), test_fraction, seed)
}

/// Shuffles `0..n` with a ChaCha8 stream seeded by `seed` and takes the first
/// [`test_size`] indices as the test set.
///
/// Fails with [`DataError::DegenerateSplit`] rather than adjusting the size
/// when either side would be empty.
pub fn split_indices(n: usize, test_fraction: f64, seed: u64) -> Result<TrainTestSplit, DataError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DataError::InvalidFraction(test_fraction));
    }
    let test = test_size(n, test_fraction);
    if test == 0 || test >= n {
        return Err(DataError::DegenerateSplit { n, test });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let train_indices = order.split_off(test);
    Ok(TrainTestSplit {
        train_indices,
        test_indices: order,
        test_fraction,
        seed,
    })
}

/// Generates a cohort from a known linear model.
///
/// Each row draws its features uniformly on [1, 10], then a standard normal
/// noise term; `target = intercept + coefficients . x + noise_sd * z`, clipped
/// to [1, 10]. Columns follow [`SurveySchema::synthetic`].
pub fn generate_synthetic(
    n: usize,
    coefficients: &[f64],
    intercept: f64,
    noise_sd: f64,
    seed: u64,
) -> Result<Dataset, DataError> {
    if n == 0 {
        return Err(DataError::InvalidArgument("n must be at least 1".into()));
    }
    if coefficients.is_empty() {
        return Err(DataError::InvalidArgument("at least one coefficient is required".into()));
    }
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(DataError::InvalidArgument(format!(
            "noise_sd must be finite and non-negative, got {noise_sd}"
        )));
    }
    if !intercept.is_finite() || coefficients.iter().any(|c| !c.is_finite()) {
        return Err(DataError::InvalidArgument("coefficients must be finite".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let x: Vec<f64> = coefficients.iter().map(|_| rng.random_range(1.0..=10.0)).collect();
        let z: f64 = rng.sample(StandardNormal);
        let mean = intercept + x.iter().zip(coefficients).map(|(a, b)| a * b).sum::<f64>();
        let y = (mean + noise_sd * z).clamp(1.0, 10.0);
        rows.push(x.into_iter().chain(std::iter::once(y)).map(Some).collect());
    }
    Dataset::from_rows(SurveySchema::synthetic(coefficients.len()), rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> String {
        SurveySchema::balance_wheel()
            .data_fields()
            .filter(|f| f.required)
            .map(|f| f.label.clone())
            .collect::<Vec<_>>()
            .join(",")
    }

    #[test]
    fn one_row_of_fives() {
        let text = format!("{}\n{}\n", header(), vec!["5"; 14].join(","));
        let ds = parse_csv(&text, &SurveySchema::balance_wheel()).unwrap();
        assert_eq!(ds.n_rows(), 1);
        // 14 scales + the optional GPA column (absent, so empty)
        assert_eq!(ds.n_cols(), 15);
        for c in 0..14 {
            assert_eq!(ds.value(0, c), Some(5.0));
        }
        assert_eq!(ds.value(0, 14), None);
        assert_eq!(ds.target_label(), "Opportunities");
    }

    #[test]
    fn learning_rate_eleven_is_out_of_range() {
        let mut cells = vec!["5"; 14];
        cells[0] = "11";
        let text = format!("{}\n{}\n", header(), cells.join(","));
        let err = parse_csv(&text, &SurveySchema::balance_wheel()).unwrap_err();
        assert_eq!(
            err,
            DataError::OutOfRange {
                row: 1,
                label: "LearningRate".into(),
                value: 11.0,
                min: 1.0,
                max: 10.0
            }
        );
    }

    #[test]
    fn fractional_ordinal_is_rejected() {
        let mut cells = vec!["5"; 14];
        cells[3] = "6.5";
        let text = format!("{}\n{}\n", header(), cells.join(","));
        let err = parse_csv(&text, &SurveySchema::balance_wheel()).unwrap_err();
        assert!(matches!(err, DataError::NotInteger { row: 1, ref label, .. } if label == "FamilyTime"));
    }

    #[test]
    fn empty_inputs() {
        let schema = SurveySchema::balance_wheel();
        assert_eq!(parse_csv("", &schema), Err(DataError::EmptyFile));
        assert_eq!(parse_csv("  \n\n", &schema), Err(DataError::EmptyFile));
        // header only
        assert_eq!(parse_csv(&format!("{}\n", header()), &schema), Err(DataError::EmptyFile));
    }

    #[test]
    fn identity_and_unknown_columns_are_dropped() {
        let text = format!(
            "Timestamp,Name,{},PhoneNumber\n2023-01-01,Ann,{},+7\n",
            header(),
            vec!["7"; 14].join(",")
        );
        let ds = parse_csv(&text, &SurveySchema::balance_wheel()).unwrap();
        assert!(ds.column_index("Name").is_none());
        assert!(ds.column_index("PhoneNumber").is_none());
        assert!(ds.column_index("Timestamp").is_none());
    }

    #[test]
    fn required_empty_cell() {
        let mut cells = vec!["5"; 14];
        cells[12] = "";
        let text = format!("{}\n{}\n", header(), cells.join(","));
        let err = parse_csv(&text, &SurveySchema::balance_wheel()).unwrap_err();
        assert_eq!(
            err,
            DataError::MissingValue {
                row: 1,
                label: "Opportunities".into()
            }
        );
    }

    #[test]
    fn duplicate_header() {
        let text = format!("{},LearningRate\n", header());
        assert_eq!(
            parse_csv(&text, &SurveySchema::balance_wheel()),
            Err(DataError::DuplicateColumn("LearningRate".into()))
        );
    }

    #[test]
    fn schema_invariants() {
        let dup = vec![FieldSpec::scale("A", "x"), FieldSpec::scale("A", "x")];
        assert!(SurveySchema::new(dup, "A").is_err());
        let mut bad = FieldSpec::scale("B", "x");
        bad.scale_max = 1.0;
        assert!(SurveySchema::new(vec![FieldSpec::scale("A", "x"), bad], "A").is_err());
        let ok = vec![FieldSpec::scale("A", "x"), FieldSpec::scale("B", "x")];
        assert!(SurveySchema::new(ok.clone(), "C").is_err());
        assert!(SurveySchema::new(ok, "B").is_ok());
        let ident = vec![FieldSpec::identity("Name"), FieldSpec::scale("A", "x"), FieldSpec::scale("B", "x")];
        assert!(SurveySchema::new(ident, "Name").is_err());
    }

    #[test]
    fn split_sizes() {
        let s = split_indices(47, 0.2, 42).unwrap();
        assert_eq!(s.test_indices.len(), 9);
        assert_eq!(s.train_indices.len(), 38);
        assert_eq!(s, split_indices(47, 0.2, 42).unwrap());
        assert_ne!(s.test_indices, split_indices(47, 0.2, 43).unwrap().test_indices);

        let s = split_indices(2, 0.5, 7).unwrap();
        assert_eq!((s.train_indices.len(), s.test_indices.len()), (1, 1));
    }

    #[test]
    fn split_rounds_half_away_from_zero() {
        // 0.9 * 5 = 4.5: half-to-even would give 4, half-away gives 5 and
        // leaves no training rows.
        let exact = 0.9 * 5.0;
        assert_eq!(exact, 4.5);
        assert_eq!(test_size(5, 0.9), 5);
        assert_eq!(
            split_indices(5, 0.9, 1),
            Err(DataError::DegenerateSplit { n: 5, test: 5 })
        );
        // 0.5 * 5 = 2.5 -> 3
        assert_eq!(split_indices(5, 0.5, 1).unwrap().test_indices.len(), 3);
    }

    #[test]
    fn split_rejects_bad_fractions() {
        assert_eq!(split_indices(10, 0.0, 1), Err(DataError::InvalidFraction(0.0)));
        assert_eq!(split_indices(10, 1.0, 1), Err(DataError::InvalidFraction(1.0)));
        assert!(matches!(split_indices(10, 0.01, 1), Err(DataError::DegenerateSplit { test: 0, .. })));
    }

    #[test]
    fn synthetic_identity_mapping() {
        let ds = generate_synthetic(50, &[1.0], 0.0, 0.0, 3).unwrap();
        for r in 0..ds.n_rows() {
            assert_eq!(ds.value(r, 0), ds.value(r, 1));
        }
        let a = generate_synthetic(20, &[0.5, 0.2], 1.0, 1.0, 9).unwrap();
        let b = generate_synthetic(20, &[0.5, 0.2], 1.0, 1.0, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.column_labels(), &["X1", "X2", "Y"]);
    }

    #[test]
    fn synthetic_rejects_bad_arguments() {
        assert!(generate_synthetic(0, &[1.0], 0.0, 0.0, 1).is_err());
        assert!(generate_synthetic(5, &[], 0.0, 0.0, 1).is_err());
        assert!(generate_synthetic(5, &[1.0], 0.0, -1.0, 1).is_err());
    }

    #[test]
    fn design_rejects_incomplete_gpa() {
        let text = format!("{},GPA\n{},3.1\n{},\n", header(), vec!["5"; 14].join(","), vec!["6"; 14].join(","));
        let ds = parse_csv(&text, &SurveySchema::balance_wheel()).unwrap();
        assert_eq!(ds.candidate_features().len(), 13);
        assert!(!ds.candidate_features().contains(&"GPA".to_string()));
        let err = ds.design(&["GPA".to_string()]).unwrap_err();
        assert_eq!(
            err,
            DataError::IncompleteColumn {
                label: "GPA".into(),
                missing: 1
            }
        );
        let (x, y) = ds.design(&["LearningRate".to_string()]).unwrap();
        assert_eq!(x.as_slice(), &[5.0, 6.0]);
        assert_eq!(y, vec![5.0, 6.0]);
    }

    #[test]
    fn responses_build_a_dataset() {
        let schema = SurveySchema::balance_wheel();
        let mut r = SurveyResponse::default();
        for f in schema.data_fields().filter(|f| f.required) {
            r.scores.insert(f.label.clone(), 8);
        }
        let ds = Dataset::from_responses(schema.clone(), &[r.clone(), r.clone()]).unwrap();
        assert_eq!(ds.n_rows(), 2);
        r.scores.insert("ComfortZone".into(), 0);
        let err = Dataset::from_responses(schema, &[SurveyResponse { gpa: Some(3.0), ..r.clone() }, r]).unwrap_err();
        assert!(matches!(err, DataError::OutOfRange { row: 1, .. }));
    }
}
