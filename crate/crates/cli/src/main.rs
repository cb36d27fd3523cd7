//! `readiness`: command-line front end for the career-readiness pipeline.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use readiness::ModelKind;

use config::{Overrides, RunConfig, SchemaKind};
use error::CliError;

#[derive(Parser)]
#[command(name = "readiness", version, about = "Career-readiness assessment from Balance-Wheel survey data")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct DataArgs {
    /// Survey CSV file.
    #[arg(long, value_name = "PATH")]
    data: Option<PathBuf>,
    /// Column layout of the CSV file.
    #[arg(long, value_enum)]
    schema: Option<SchemaKind>,
    /// Target column [default: Opportunities, or Y for synthetic data].
    #[arg(long)]
    target: Option<String>,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Comma-separated feature columns.
    #[arg(long, value_delimiter = ',', conflicts_with = "threshold")]
    features: Option<Vec<String>>,
    /// Select features whose |r| with the target exceeds this [default: 0.3].
    #[arg(long)]
    threshold: Option<f64>,
    /// Share of rows held out for testing [default: 0.2].
    #[arg(long)]
    test_fraction: Option<f64>,
    /// Seed for the split and the forest [default: 42].
    #[arg(long)]
    seed: Option<u64>,
    /// Fuzzy terms as `Label:a,b,c;Label:a,b,c;...`, least ready first.
    #[arg(long, value_name = "SPEC")]
    partition: Option<String>,
    /// Term reported on its own in the classification table [default: High].
    #[arg(long)]
    positive_class: Option<String>,
    /// Directory for model documents and reports [default: out].
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelChoice {
    Linear,
    Svr,
    Forest,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Descriptive statistics per column, then the correlation matrix.
    Stats {
        #[command(flatten)]
        data: DataArgs,
        /// Print correlations with the target in descending order instead of the matrix.
        #[arg(long)]
        sorted: bool,
        /// Write the correlation output to this file instead of stdout.
        #[arg(long, value_name = "PATH")]
        corr_out: Option<PathBuf>,
    },
    /// Pearson correlation matrix.
    Corr {
        #[command(flatten)]
        data: DataArgs,
        /// Print correlations with the target in descending order.
        #[arg(long)]
        sorted: bool,
    },
    /// Fit models on the training split and write their documents.
    Train {
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Model kind to train.
        #[arg(long, value_enum, default_value = "all")]
        model: ModelChoice,
    },
    /// Fit all models, pick the best and grade its predictions.
    Evaluate {
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Score responses with a saved model.
    Predict {
        /// Model document written by `train` or `evaluate`.
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
        /// CSV of responses with a column per model feature.
        #[arg(long, value_name = "PATH")]
        response: Option<PathBuf>,
        /// Inline response, `Label=value,...`.
        #[arg(long, value_name = "PAIRS")]
        scores: Option<String>,
        #[arg(long, value_name = "SPEC")]
        partition: Option<String>,
    },
    /// Grade raw scores against the fuzzy partition.
    Fuzzify {
        #[arg(required = true, allow_negative_numbers = true)]
        scores: Vec<f64>,
        #[arg(long, value_name = "SPEC")]
        partition: Option<String>,
        /// Also print every term's alpha-cut at this level.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Generate a synthetic cohort from a known linear model.
    Synth {
        #[arg(long)]
        n: usize,
        /// Comma-separated slopes, one per feature.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        coefficients: Vec<f64>,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        intercept: f64,
        #[arg(long, default_value_t = 1.0)]
        noise_sd: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output file [default: stdout].
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

fn data_overrides(d: DataArgs) -> Overrides {
    Overrides {
        data: d.data,
        schema: d.schema,
        target: d.target,
        ..Overrides::default()
    }
}

fn pipeline_overrides(p: PipelineArgs, models: Option<Vec<ModelKind>>) -> Overrides {
    Overrides {
        features: p.features,
        threshold: p.threshold,
        test_fraction: p.test_fraction,
        seed: p.seed,
        partition: p.partition,
        positive_class: p.positive_class,
        out_dir: p.out_dir,
        models,
        ..data_overrides(p.data)
    }
}

fn run(cli: Cli) -> Result<String, CliError> {
    let cfg = RunConfig::load_optional(cli.config.as_deref())?;
    match cli.command {
        Command::Stats { data, sorted, corr_out } => {
            commands::stats(&cfg, &data_overrides(data), sorted, corr_out.as_deref())
        }
        Command::Corr { data, sorted } => commands::corr(&cfg, &data_overrides(data), sorted),
        Command::Train { pipeline, model } => {
            let models = match model {
                ModelChoice::Linear => vec![ModelKind::Linear],
                ModelChoice::Svr => vec![ModelKind::Svr],
                ModelChoice::Forest => vec![ModelKind::Forest],
                ModelChoice::All => ModelKind::ALL.to_vec(),
            };
            commands::train(&cfg, &pipeline_overrides(pipeline, Some(models)))
        }
        Command::Evaluate { pipeline } => commands::evaluate(&cfg, &pipeline_overrides(pipeline, None)),
        Command::Predict {
            model,
            response,
            scores,
            partition,
        } => commands::predict(&cfg, &model, response.as_deref(), scores.as_deref(), partition.as_deref()),
        Command::Fuzzify {
            scores,
            partition,
            alpha,
        } => commands::fuzzify(&cfg, &scores, partition.as_deref(), alpha),
        Command::Synth {
            n,
            coefficients,
            intercept,
            noise_sd,
            seed,
            out,
        } => commands::synth(&commands::SynthArgs {
            n,
            coefficients: &coefficients,
            intercept,
            noise_sd,
            seed,
            out: out.as_deref(),
        }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(error::USAGE as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
