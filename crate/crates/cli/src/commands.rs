use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use readiness::dataio::{generate_synthetic, parse_csv, Dataset, SurveySchema};
use readiness::evaluation::{
    evaluate_pipeline, render_classification_table, render_regression_table, PipelineReport, RegressionReport,
    SplitSummary,
};
use readiness::fuzzy::FuzzyPartition;
use readiness::regression::{load_model, save_model, FittedModel, Regressor, SvrDiagnostics};
use readiness::stats::{describe, pearson};
use readiness::DataError;
use serde::Serialize;

use crate::config::{resolve, resolve_data, resolve_partition, Overrides, RunConfig, SchemaKind};
use crate::error::CliError;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

/// Number of `X<k>` columns in a synthetic file's header.
fn synthetic_width(text: &str) -> Result<usize, DataError> {
    let header = text.lines().next().filter(|l| !l.trim().is_empty()).ok_or(DataError::EmptyFile)?;
    let k = header
        .split(',')
        .map(|h| h.trim().trim_matches('"'))
        .filter(|h| h.strip_prefix('X').is_some_and(|d| !d.is_empty() && d.chars().all(|c| c.is_ascii_digit())))
        .count();
    if k == 0 {
        return Err(DataError::InvalidSchema("synthetic data needs columns X1..Xk".into()));
    }
    Ok(k)
}

pub fn load_dataset(path: &Path, kind: SchemaKind, target: Option<&str>) -> Result<Dataset, CliError> {
    let text = read(path)?;
    let schema = match kind {
        SchemaKind::BalanceWheel => SurveySchema::balance_wheel(),
        SchemaKind::Synthetic => SurveySchema::synthetic(synthetic_width(&text)?),
    };
    let schema = match target {
        Some(t) => schema.with_target(t)?,
        None => schema,
    };
    Ok(parse_csv(&text, &schema)?)
}

fn correlation_text(data: &Dataset, sorted: bool) -> Result<String, CliError> {
    let corr = pearson(data);
    if !sorted {
        return Ok(corr.to_csv());
    }
    let mut out = format!("label,r_with_{}\n", data.target_label());
    for (label, r) in corr.sorted_against(data.target_label())? {
        match r {
            Some(r) => writeln!(out, "{label},{r:.4}").unwrap(),
            None => writeln!(out, "{label},NA").unwrap(),
        }
    }
    Ok(out)
}

pub fn stats(cfg: &RunConfig, o: &Overrides, sorted: bool, corr_out: Option<&Path>) -> Result<String, CliError> {
    let (path, schema, target) = resolve_data(cfg, o)?;
    let data = load_dataset(&path, schema, target.as_deref())?;
    let mut out = describe(&data).to_csv();
    let corr = correlation_text(&data, sorted)?;
    match corr_out {
        Some(p) => write(p, &corr)?,
        None => {
            out.push('\n');
            out.push_str(&corr);
        }
    }
    Ok(out)
}

pub fn corr(cfg: &RunConfig, o: &Overrides, sorted: bool) -> Result<String, CliError> {
    let (path, schema, target) = resolve_data(cfg, o)?;
    let data = load_dataset(&path, schema, target.as_deref())?;
    correlation_text(&data, sorted)
}

#[derive(Serialize)]
struct TrainReport<'a> {
    target: &'a str,
    features: &'a [String],
    feature_correlations: &'a Option<Vec<f64>>,
    split: &'a SplitSummary,
    regression: &'a [RegressionReport],
    svr_diagnostics: &'a Option<SvrDiagnostics>,
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn run(cfg: &RunConfig, o: &Overrides) -> Result<(readiness::PipelineOutcome, PathBuf), CliError> {
    let r = resolve(cfg, o)?;
    let data = load_dataset(&r.data, r.schema, r.target.as_deref())?;
    let outcome = evaluate_pipeline(&data, &r.pipeline)?;
    if let Some(d) = outcome.report.svr_diagnostics.as_ref().filter(|d| !d.converged) {
        eprintln!(
            "warning: SVR stopped at the iteration cap ({}) with KKT violation {:.3e}",
            d.iterations, d.kkt_violation
        );
    }
    Ok((outcome, r.out_dir))
}

fn header(report: &PipelineReport) -> String {
    let mut out = String::new();
    writeln!(out, "Target: {}", report.target).unwrap();
    write!(out, "Features:").unwrap();
    match &report.feature_correlations {
        Some(rs) => {
            for (l, r) in report.features.iter().zip(rs) {
                write!(out, " {l} (r = {r:.4})").unwrap();
            }
        }
        None => write!(out, " {}", report.features.join(", ")).unwrap(),
    }
    out.push('\n');
    writeln!(
        out,
        "Split: {} train / {} test (seed {})\n",
        report.split.n_train, report.split.n_test, report.split.seed
    )
    .unwrap();
    out
}

pub fn train(cfg: &RunConfig, o: &Overrides) -> Result<String, CliError> {
    let (outcome, dir) = run(cfg, o)?;
    let rep = &outcome.report;
    for m in &outcome.models {
        write(&dir.join(format!("model-{}.json", m.kind().as_str())), &save_model(m))?;
    }
    let report = TrainReport {
        target: &rep.target,
        features: &rep.features,
        feature_correlations: &rep.feature_correlations,
        split: &rep.split,
        regression: &rep.regression,
        svr_diagnostics: &rep.svr_diagnostics,
    };
    write(&dir.join("train-report.json"), &json(&report))?;
    let mut out = header(rep);
    out.push_str(&render_regression_table(&rep.regression));
    if rep.regression.len() > 1 {
        writeln!(out, "\nLowest RMSE: {}", rep.winner.display_name()).unwrap();
    }
    Ok(out)
}

pub fn evaluate(cfg: &RunConfig, o: &Overrides) -> Result<String, CliError> {
    let (outcome, dir) = run(cfg, o)?;
    write(&dir.join("report.json"), &outcome.report.to_json())?;
    write(&dir.join("model.json"), &outcome.winning_document)?;
    let rep = &outcome.report;
    let mut out = header(rep);
    out.push_str(&render_regression_table(&rep.regression));
    writeln!(out, "\nSelected model: {}\n", rep.winner.display_name()).unwrap();
    out.push_str(&render_classification_table(&rep.classification, rep.winner));
    Ok(out)
}

/// Feature vectors for a model, from a CSV of responses or an inline list.
fn responses(model: &FittedModel, response: Option<&Path>, scores: Option<&str>) -> Result<Vec<Vec<f64>>, CliError> {
    let labels = model.feature_labels();
    let (header, rows): (Vec<String>, Vec<Vec<String>>) = match (response, scores) {
        (Some(_), Some(_)) => return Err(CliError::usage("--response and --scores are mutually exclusive")),
        (None, None) => return Err(CliError::usage("pass --response <csv> or --scores label=value,...")),
        (None, Some(s)) => {
            let mut h = Vec::new();
            let mut v = Vec::new();
            for pair in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                let (k, val) = pair
                    .split_once('=')
                    .ok_or_else(|| CliError::usage(format!("--scores entry {pair:?} is not label=value")))?;
                h.push(k.trim().to_string());
                v.push(val.trim().to_string());
            }
            (h, vec![v])
        }
        (Some(path), None) => {
            let text = read(path)?;
            let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
            let h = reader
                .headers()
                .map_err(|e| CliError::data(format!("Csv: {e}")))?
                .iter()
                .map(String::from)
                .collect();
            let mut rows = Vec::new();
            for rec in reader.records() {
                let rec = rec.map_err(|e| CliError::data(format!("Csv: {e}")))?;
                rows.push(rec.iter().map(String::from).collect());
            }
            if rows.is_empty() {
                return Err(CliError::data("EmptyFile: no responses"));
            }
            (h, rows)
        }
    };
    let cols: Vec<usize> = labels
        .iter()
        .map(|l| {
            header
                .iter()
                .position(|h| h == l)
                .ok_or_else(|| CliError::data(format!("MissingFeature: the model needs {l}")))
        })
        .collect::<Result<_, _>>()?;
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            cols.iter()
                .zip(labels)
                .map(|(&c, l)| {
                    let cell = row.get(c).map_or("", String::as_str);
                    cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                        CliError::data(format!("NotNumeric: row {}, column {l}: {cell:?} is not a number", i + 1))
                    })
                })
                .collect()
        })
        .collect()
}

fn assessment_lines(out: &mut String, partition: &FuzzyPartition, raw: f64) -> Result<(), CliError> {
    let a = partition.fuzzify(raw)?;
    writeln!(out, "  raw prediction: {raw}").unwrap();
    writeln!(out, "  score: {}", a.input_score).unwrap();
    let m: Vec<String> = a.memberships.iter().map(|(t, d)| format!("{t} {d:.4}")).collect();
    writeln!(out, "  memberships: {}", m.join(", ")).unwrap();
    writeln!(out, "  {}: {} ({:.4})", partition.variable_name(), a.chosen_term, a.chosen_degree).unwrap();
    Ok(())
}

pub fn predict(
    cfg: &RunConfig,
    model_path: &Path,
    response: Option<&Path>,
    scores: Option<&str>,
    partition: Option<&str>,
) -> Result<String, CliError> {
    let partition = resolve_partition(&cfg.fuzzy, partition)?;
    let model = load_model(&read(model_path)?)?;
    let rows = responses(&model, response, scores)?;
    let mut out = String::new();
    for (i, x) in rows.iter().enumerate() {
        let raw = model.predict(x)?;
        writeln!(out, "response {}", i + 1).unwrap();
        assessment_lines(&mut out, &partition, raw)?;
    }
    Ok(out)
}

pub fn fuzzify(cfg: &RunConfig, scores: &[f64], partition: Option<&str>, alpha: Option<f64>) -> Result<String, CliError> {
    let partition = resolve_partition(&cfg.fuzzy, partition)?;
    let mut out = String::new();
    if let Some(alpha) = alpha {
        writeln!(out, "alpha-cuts at {alpha}").unwrap();
        for t in partition.labels() {
            writeln!(out, "  {t}: {}", partition.alpha_cut(&t, alpha)?).unwrap();
        }
    }
    for &s in scores {
        writeln!(out, "score {s}").unwrap();
        assessment_lines(&mut out, &partition, s)?;
    }
    Ok(out)
}

pub struct SynthArgs<'a> {
    pub n: usize,
    pub coefficients: &'a [f64],
    pub intercept: f64,
    pub noise_sd: f64,
    pub seed: u64,
    pub out: Option<&'a Path>,
}

pub fn synth(a: &SynthArgs) -> Result<String, CliError> {
    let data = generate_synthetic(a.n, a.coefficients, a.intercept, a.noise_sd, a.seed)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let text = data.to_csv();
    match a.out {
        Some(p) => {
            write(p, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}
