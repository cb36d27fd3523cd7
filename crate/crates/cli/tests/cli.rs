use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cohort() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/cohort47.csv")
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn readiness(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_readiness"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let o = readiness(dir, args);
    assert_eq!(o.status.code(), Some(0), "{args:?}\n{}", stderr(&o));
    stdout(&o)
}

fn fails_with(dir: &Path, args: &[&str], code: i32, needle: &str) {
    let o = readiness(dir, args);
    let err = stderr(&o);
    assert_eq!(o.status.code(), Some(code), "{args:?}\n{err}");
    assert!(err.contains(needle), "{args:?}: {err:?} lacks {needle:?}");
}

/// Compares with `tests/golden/<name>`; `BLESS=1` rewrites the file instead.
fn golden(name: &str, actual: &str) {
    let path = golden_dir().join(name);
    if std::env::var_os("BLESS").is_some() {
        fs::create_dir_all(golden_dir()).unwrap();
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {}; run with BLESS=1", path.display()));
    assert_eq!(actual, expected, "output differs from {}", path.display());
}

fn tmp() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

const FOUR: &str = "CommunityRate,ComfortZone,SalaryExp,CommunicationRate";

#[test]
fn stats_golden() {
    let d = tmp();
    let data = cohort();
    let out = ok(d.path(), &["stats", "--data", data.to_str().unwrap()]);
    golden("stats.txt", &out);
    let sorted = ok(d.path(), &["corr", "--data", data.to_str().unwrap(), "--sorted"]);
    golden("corr-sorted.txt", &sorted);
    assert!(sorted.starts_with("label,r_with_Opportunities\nComfortZone,"));
}

#[test]
fn evaluate_golden_and_files() {
    let d = tmp();
    let data = cohort();
    let out = ok(d.path(), &["evaluate", "--data", data.to_str().unwrap()]);
    golden("evaluate.txt", &out);
    assert!(out.contains("Selected model: Linear Regression"));
    let report = fs::read_to_string(d.path().join("out/report.json")).unwrap();
    let report: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(report["features"].as_array().unwrap().len(), 4);
    assert_eq!(report["winner"], "linear");
    let model = fs::read_to_string(d.path().join("out/model.json")).unwrap();
    golden("model-linear.json", &model);
}

#[test]
fn train_writes_each_model() {
    let d = tmp();
    let data = cohort();
    let out = ok(d.path(), &["train", "--data", data.to_str().unwrap(), "--features", FOUR, "--out-dir", "m"]);
    golden("train.txt", &out);
    for kind in ["linear", "svr", "forest"] {
        assert!(d.path().join(format!("m/model-{kind}.json")).is_file(), "{kind}");
    }
    assert!(d.path().join("m/train-report.json").is_file());
    let one = ok(d.path(), &["train", "--data", data.to_str().unwrap(), "--model", "svr", "--out-dir", "s"]);
    assert!(!one.contains("Lowest RMSE"));
    assert!(!d.path().join("s/model-linear.json").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let data = cohort();
    let run = || {
        let d = tmp();
        let out = ok(d.path(), &["evaluate", "--data", data.to_str().unwrap(), "--seed", "7"]);
        let report = fs::read(d.path().join("out/report.json")).unwrap();
        let model = fs::read(d.path().join("out/model.json")).unwrap();
        (out, report, model)
    };
    assert_eq!(run(), run());
}

#[test]
fn predict_against_hand_built_model() {
    let d = tmp();
    let doc = r#"{"format_version":1,"model_kind":"linear","feature_labels":["CommunityRate","ComfortZone"],"payload":{"intercept":0.0,"coefficients":[1.0,0.0]}}"#;
    fs::write(d.path().join("m.json"), doc).unwrap();
    let out = ok(d.path(), &["predict", "--model", "m.json", "--scores", "CommunityRate=9,ComfortZone=3"]);
    golden("predict-scores.txt", &out);
    assert!(out.contains("Career Readiness: High (0.7778)"));
    let low = ok(d.path(), &["predict", "--model", "m.json", "--scores", "CommunityRate=0.4,ComfortZone=3"]);
    assert!(low.contains("score: 1\n"));
    assert!(low.contains("Career Readiness: Low (1.0000)"));
    fs::write(d.path().join("r.csv"), "ComfortZone,CommunityRate\n2,5.5\n8,1\n").unwrap();
    let csv = ok(d.path(), &["predict", "--model", "m.json", "--response", "r.csv"]);
    assert!(csv.contains("response 1\n  raw prediction: 5.5\n"));
    assert!(csv.contains("Career Readiness: Medium (1.0000)"));
    assert!(csv.contains("response 2\n  raw prediction: 1\n"));
}

#[test]
fn predict_with_a_trained_model() {
    let d = tmp();
    let data = cohort();
    ok(d.path(), &["evaluate", "--data", data.to_str().unwrap()]);
    let out = ok(d.path(), &["predict", "--model", "out/model.json", "--response", data.to_str().unwrap()]);
    assert_eq!(out.matches("response ").count(), 47);
    golden("predict-cohort.txt", &out);
}

#[test]
fn fuzzify_golden() {
    let d = tmp();
    let out = ok(d.path(), &["fuzzify", "9", "0.4", "3.25", "5.5", "12", "--alpha", "0.5"]);
    golden("fuzzify.txt", &out);
    assert!(out.contains("  Medium: [3.25, 7.75]"));
}

#[test]
fn partition_override() {
    let d = tmp();
    let spec = "Low:1,1,4;Medium:1,4,10;High:4,10,10";
    let out = ok(d.path(), &["fuzzify", "7", "--partition", spec]);
    assert!(out.contains("memberships: Low 0.0000, Medium 0.5000, High 0.5000"), "{out}");
    let data = cohort();
    let default = ok(d.path(), &["evaluate", "--data", data.to_str().unwrap(), "--out-dir", "a"]);
    let custom = ok(d.path(), &["evaluate", "--data", data.to_str().unwrap(), "--out-dir", "b", "--partition", spec]);
    let table = |s: &str| s.split("Fuzzy classification").nth(1).unwrap().to_string();
    assert_ne!(table(&default), table(&custom));
    let regression = |s: &str| s.split("Fuzzy classification").next().unwrap().to_string();
    assert_eq!(regression(&default), regression(&custom));
}

#[test]
fn synth_shape_and_noise_free_recovery() {
    let d = tmp();
    let text = ok(d.path(), &["synth", "--n", "470", "--coefficients", "0.3,0.25,0.2,0.15"]);
    assert_eq!(text.lines().count(), 471);
    assert_eq!(text.lines().next(), Some("X1,X2,X3,X4,Y"));
    assert_eq!(text, ok(d.path(), &["synth", "--n", "470", "--coefficients", "0.3,0.25,0.2,0.15"]));

    ok(d.path(), &["synth", "--n", "120", "--coefficients", "0.5,0.3,0.2", "--noise-sd", "0", "--seed", "3", "--out", "s.csv"]);
    ok(d.path(), &["evaluate", "--data", "s.csv", "--schema", "synthetic", "--features", "X1,X2,X3"]);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("out/report.json")).unwrap()).unwrap();
    let linear = report["regression"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["model_kind"] == "linear")
        .unwrap();
    assert!(linear["mae"].as_f64().unwrap() < 1e-9, "{linear}");
    assert_eq!(report["winner"], "linear");
}

#[test]
fn config_file_and_flag_precedence() {
    let d = tmp();
    fs::copy(cohort(), d.path().join("cohort.csv")).unwrap();
    fs::create_dir(d.path().join("conf")).unwrap();
    fs::write(
        d.path().join("conf/run.toml"),
        "[data]\npath = \"../cohort.csv\"\n\n[features]\nlabels = [\"ComfortZone\", \"SalaryExp\"]\n\n[split]\nseed = 5\n\n[forest]\nn_trees = 20\n\n[output]\ndir = \"../runs\"\n",
    )
    .unwrap();
    let from_file = ok(d.path(), &["evaluate", "--config", "conf/run.toml"]);
    assert!(from_file.contains("Features: ComfortZone, SalaryExp\n"), "{from_file}");
    assert!(from_file.contains("(seed 5)"));
    assert!(d.path().join("runs/report.json").is_file());

    let flagged = ok(d.path(), &["evaluate", "--config", "conf/run.toml", "--seed", "9", "--threshold", "0.3", "--out-dir", "f"]);
    assert!(flagged.contains("(seed 9)"));
    assert!(flagged.contains("ComfortZone (r = "));
    assert!(flagged.contains("CommunicationRate (r = "));
    assert!(d.path().join("f/model.json").is_file());
}

#[test]
fn exit_codes() {
    let d = tmp();
    let p = d.path();
    let data = cohort();
    let data = data.to_str().unwrap();

    // usage and configuration
    fails_with(p, &["evaluate"], 1, "no data file");
    fails_with(p, &["evaluate", "--data", data, "--bogus"], 1, "--bogus");
    fails_with(p, &["frobnicate"], 1, "frobnicate");
    fails_with(p, &["evaluate", "--data", data, "--features", "A", "--threshold", "0.3"], 1, "cannot be used with");
    fails_with(p, &["evaluate", "--data", data, "--partition", "Low:5,1,6;High:1,10,10"], 1, "InvalidTriangle");
    fails_with(p, &["evaluate", "--data", data, "--positive-class", "Top"], 1, "Top");
    fails_with(p, &["evaluate", "--data", data, "--test-fraction", "1.5"], 1, "test fraction");
    fails_with(p, &["fuzzify", "5", "--alpha", "0"], 1, "AlphaOutOfRange");
    fails_with(p, &["evaluate", "--config", "missing.toml"], 1, "missing.toml");
    fs::write(p.join("bad.toml"), "[data]\nfile = \"x.csv\"\n").unwrap();
    fails_with(p, &["evaluate", "--config", "bad.toml"], 1, "unknown field");

    // data and validation
    fails_with(p, &["stats", "--data", "nope.csv"], 2, "nope.csv");
    fs::write(p.join("empty.csv"), "").unwrap();
    fails_with(p, &["stats", "--data", "empty.csv"], 2, "EmptyFile");
    let text = fs::read_to_string(&data).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let drop = header.iter().position(|h| *h == "Opportunities").unwrap();
    let without: String = text
        .lines()
        .map(|l| {
            let mut cells: Vec<&str> = l.split(',').collect();
            cells.remove(drop);
            cells.join(",") + "\n"
        })
        .collect();
    fs::write(p.join("noopp.csv"), without).unwrap();
    fails_with(p, &["stats", "--data", "noopp.csv"], 2, "MissingColumn: Opportunities");
    fails_with(p, &["evaluate", "--data", data, "--threshold", "0.9"], 2, "NoFeaturesSelected");
    fails_with(p, &["evaluate", "--data", data, "--features", "Nope"], 2, "Nope");
    fs::write(p.join("m.json"), r#"{"format_version":7,"model_kind":"linear","feature_labels":["A"],"payload":{"intercept":0.0,"coefficients":[1.0]}}"#).unwrap();
    fails_with(p, &["predict", "--model", "m.json", "--scores", "A=1"], 2, "UnknownVersion");
    fs::write(p.join("m.json"), r#"{"format_version":1,"model_kind":"linear","feature_labels":["A","B"],"payload":{"intercept":0.0,"coefficients":[1.0,2.0]}}"#).unwrap();
    fails_with(p, &["predict", "--model", "m.json", "--scores", "A=1"], 2, "MissingFeature: the model needs B");
    fails_with(p, &["predict", "--model", "m.json", "--scores", "A=1,B=x"], 2, "NotNumeric");

    // numerical
    let mut rk = String::from("X1,X2,Y\n");
    for i in 1..=20 {
        let v = 1 + i % 9;
        rk.push_str(&format!("{v},{v},{}\n", 1 + (i * 7) % 9));
    }
    fs::write(p.join("rk.csv"), rk).unwrap();
    fails_with(p, &["evaluate", "--data", "rk.csv", "--schema", "synthetic", "--features", "X1,X2"], 3, "RankDeficient");
}

#[test]
fn help_and_version_succeed() {
    let d = tmp();
    let help = ok(d.path(), &["--help"]);
    for sub in ["stats", "corr", "train", "evaluate", "predict", "fuzzify", "synth"] {
        assert!(help.contains(sub), "{sub}");
    }
    assert!(ok(d.path(), &["--version"]).starts_with("readiness "));
}

#[test]
fn svr_iteration_cap_warns_but_succeeds() {
    let d = tmp();
    fs::write(d.path().join("run.toml"), "[svr]\nmax_iterations = 1\n").unwrap();
    let data = cohort();
    let o = readiness(d.path(), &["evaluate", "--config", "run.toml", "--data", data.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("warning: SVR stopped at the iteration cap (1)"), "{}", stderr(&o));
}
