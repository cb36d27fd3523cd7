//! Run configuration: a TOML file, overridden field by field by flags.
//!
//! ```toml
//! [data]
//! path = "cohort.csv"          # relative to this file
//! schema = "balance-wheel"     # or "synthetic" (X1..Xk, Y)
//! target = "Opportunities"
//!
//! [features]                   # at most one of the two
//! labels = ["CommunityRate", "ComfortZone"]
//! threshold = 0.3
//!
//! [split]
//! test_fraction = 0.2
//! seed = 42
//!
//! [linear]
//! ridge_lambda = 0.0
//!
//! [svr]
//! c = 1.0
//! epsilon = 0.1
//! kernel = "rbf"               # or "linear"
//! gamma = "scale"              # or a number
//! tolerance = 0.001
//! max_iterations = 100000
//!
//! [forest]
//! n_trees = 100
//! max_depth = 8                # omit for unbounded
//! min_samples_split = 2
//! bootstrap = true
//! max_features = 2             # omit to consider every feature
//!
//! [fuzzy]
//! terms = "Low:1,1,5.5; Medium:1,5.5,10; High:5.5,10,10"
//! domain = [1.0, 10.0]
//! ruspini = true
//! positive_class = "High"
//!
//! [output]
//! dir = "out"
//! ```

use std::path::{Path, PathBuf};

use readiness::evaluation::{FeatureChoice, PipelineConfig};
use readiness::fuzzy::{FuzzyPartition, CAREER_READINESS};
use readiness::regression::{Gamma, KernelSpec, ModelKind, ModelParams};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub features: FeaturesSection,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub linear: LinearSection,
    #[serde(default)]
    pub svr: SvrSection,
    #[serde(default)]
    pub forest: ForestSection,
    #[serde(default)]
    pub fuzzy: FuzzySection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub path: Option<PathBuf>,
    pub schema: Option<SchemaKind>,
    pub target: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeaturesSection {
    pub labels: Option<Vec<String>>,
    pub threshold: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSection {
    pub test_fraction: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSection {
    pub ridge_lambda: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Rbf,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GammaSetting {
    Value(f64),
    Word(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvrSection {
    pub c: Option<f64>,
    pub epsilon: Option<f64>,
    pub kernel: Option<KernelKind>,
    pub gamma: Option<GammaSetting>,
    pub tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestSection {
    pub n_trees: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_split: Option<usize>,
    pub bootstrap: Option<bool>,
    pub max_features: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzySection {
    pub terms: Option<String>,
    pub domain: Option<[f64; 2]>,
    pub ruspini: Option<bool>,
    pub positive_class: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SchemaKind {
    BalanceWheel,
    Synthetic,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(p) = &cfg.data.path {
            cfg.data.path = Some(base.join(p));
        }
        if let Some(p) = &cfg.output.dir {
            cfg.output.dir = Some(base.join(p));
        }
        Ok(cfg)
    }

    pub fn load_optional(path: Option<&Path>) -> Result<Self, CliError> {
        path.map_or_else(|| Ok(RunConfig::default()), RunConfig::load)
    }
}

/// Flags that override configuration values. `None` leaves the config value.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub data: Option<PathBuf>,
    pub schema: Option<SchemaKind>,
    pub target: Option<String>,
    pub features: Option<Vec<String>>,
    pub threshold: Option<f64>,
    pub test_fraction: Option<f64>,
    pub seed: Option<u64>,
    pub partition: Option<String>,
    pub positive_class: Option<String>,
    pub out_dir: Option<PathBuf>,
    pub models: Option<Vec<ModelKind>>,
}

/// Everything a pipeline command needs, after merging.
#[derive(Debug)]
pub struct Resolved {
    pub data: PathBuf,
    pub schema: SchemaKind,
    pub target: Option<String>,
    pub pipeline: PipelineConfig,
    pub out_dir: PathBuf,
}

pub fn resolve_data(cfg: &RunConfig, o: &Overrides) -> Result<(PathBuf, SchemaKind, Option<String>), CliError> {
    let data = o
        .data
        .clone()
        .or_else(|| cfg.data.path.clone())
        .ok_or_else(|| CliError::usage("no data file: pass --data or set [data] path"))?;
    let schema = o.schema.or(cfg.data.schema).unwrap_or(SchemaKind::BalanceWheel);
    let target = o.target.clone().or_else(|| cfg.data.target.clone());
    Ok((data, schema, target))
}

pub fn resolve_partition(cfg: &FuzzySection, spec: Option<&str>) -> Result<FuzzyPartition, CliError> {
    let spec = spec.or(cfg.terms.as_deref());
    let Some(spec) = spec else {
        if cfg.domain.is_some() {
            return Err(CliError::usage("[fuzzy] domain given without terms"));
        }
        return Ok(FuzzyPartition::default_partition());
    };
    let terms = FuzzyPartition::parse_terms(spec)?;
    let [lo, hi] = cfg.domain.unwrap_or([1.0, 10.0]);
    Ok(FuzzyPartition::new(
        CAREER_READINESS,
        terms,
        (lo, hi),
        cfg.ruspini.unwrap_or(true),
    )?)
}

fn model_params(cfg: &RunConfig) -> Result<ModelParams, CliError> {
    let mut p = ModelParams::default();
    if let Some(v) = cfg.linear.ridge_lambda {
        p.linear.ridge_lambda = v;
    }
    let s = &cfg.svr;
    if let Some(v) = s.c {
        p.svr.c = v;
    }
    if let Some(v) = s.epsilon {
        p.svr.epsilon = v;
    }
    if let Some(v) = s.tolerance {
        p.svr.tolerance = v;
    }
    if let Some(v) = s.max_iterations {
        p.svr.max_iterations = v;
    }
    let gamma = match &s.gamma {
        None => Gamma::Scale,
        Some(GammaSetting::Word(w)) if w == "scale" => Gamma::Scale,
        Some(GammaSetting::Word(w)) => {
            return Err(CliError::usage(format!("[svr] gamma must be \"scale\" or a number, got {w:?}")))
        }
        Some(GammaSetting::Value(g)) => Gamma::Value(*g),
    };
    p.svr.kernel = match s.kernel.unwrap_or(KernelKind::Rbf) {
        KernelKind::Rbf => KernelSpec::Rbf(gamma),
        KernelKind::Linear if s.gamma.is_some() => {
            return Err(CliError::usage("[svr] gamma only applies to the rbf kernel"))
        }
        KernelKind::Linear => KernelSpec::Linear,
    };
    let f = &cfg.forest;
    if let Some(v) = f.n_trees {
        p.forest.n_trees = v;
    }
    if f.max_depth.is_some() {
        p.forest.max_depth = f.max_depth;
    }
    if let Some(v) = f.min_samples_split {
        p.forest.min_samples_split = v;
    }
    if let Some(v) = f.bootstrap {
        p.forest.bootstrap = v;
    }
    if f.max_features.is_some() {
        p.forest.max_features = f.max_features;
    }
    p.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(p)
}

pub fn resolve(cfg: &RunConfig, o: &Overrides) -> Result<Resolved, CliError> {
    let (data, schema, target) = resolve_data(cfg, o)?;
    let features = match (&o.features, o.threshold) {
        (Some(_), Some(_)) => return Err(CliError::usage("--features and --threshold are mutually exclusive")),
        (Some(l), None) => FeatureChoice::Explicit(l.clone()),
        (None, Some(t)) => FeatureChoice::Threshold(t),
        (None, None) => match (&cfg.features.labels, cfg.features.threshold) {
            (Some(_), Some(_)) => {
                return Err(CliError::usage("[features] takes either labels or threshold, not both"))
            }
            (Some(l), None) => FeatureChoice::Explicit(l.clone()),
            (None, Some(t)) => FeatureChoice::Threshold(t),
            (None, None) => FeatureChoice::default(),
        },
    };
    if let FeatureChoice::Threshold(t) = features {
        if !(0.0..1.0).contains(&t) {
            return Err(CliError::usage(format!("threshold must lie in [0, 1), got {t}")));
        }
    }
    let defaults = PipelineConfig::default();
    let test_fraction = o.test_fraction.or(cfg.split.test_fraction).unwrap_or(defaults.test_fraction);
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(CliError::usage(format!("test fraction must lie strictly between 0 and 1, got {test_fraction}")));
    }
    let pipeline = PipelineConfig {
        features,
        test_fraction,
        seed: o.seed.or(cfg.split.seed).unwrap_or(defaults.seed),
        params: model_params(cfg)?,
        partition: resolve_partition(&cfg.fuzzy, o.partition.as_deref())?,
        positive_class: o
            .positive_class
            .clone()
            .or_else(|| cfg.fuzzy.positive_class.clone())
            .unwrap_or(defaults.positive_class),
        models: o.models.clone().unwrap_or(defaults.models),
    };
    if pipeline.partition.term_index(&pipeline.positive_class).is_none() {
        return Err(CliError::usage(format!(
            "positive class {:?} is not a term of the partition ({})",
            pipeline.positive_class,
            pipeline.partition.labels().join(", ")
        )));
    }
    let out_dir = o
        .out_dir
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok(Resolved {
        data,
        schema,
        target,
        pipeline,
        out_dir,
    })
}
