//! Career-readiness assessment from Balance-Wheel survey data.
//!
//! The crate loads survey responses ([`dataio`]), summarizes them and picks
//! predictors by correlation ([`stats`]), fits and persists three regressors
//! ([`regression`]), maps predicted scores onto linguistic readiness terms
//! ([`fuzzy`]) and scores the whole chain ([`evaluation`]).
//!
//! ```
//! use readiness::dataio::generate_synthetic;
//! use readiness::evaluation::{evaluate_pipeline, FeatureChoice, PipelineConfig};
//!
//! let data = generate_synthetic(60, &[0.4, 0.3, 0.2], 1.0, 0.3, 7).unwrap();
//! let config = PipelineConfig {
//!     features: FeatureChoice::Explicit(vec!["X1".into(), "X2".into(), "X3".into()]),
//!     ..PipelineConfig::default()
//! };
//! let outcome = evaluate_pipeline(&data, &config).unwrap();
//! assert_eq!(outcome.report.regression.len(), 3);
//! ```

pub mod dataio;
pub mod evaluation;
pub mod fuzzy;
pub mod linalg;
pub mod regression;
pub mod stats;

pub use dataio::{Dataset, DataError, SurveySchema};
pub use evaluation::{evaluate_pipeline, EvalError, PipelineConfig, PipelineOutcome, PipelineReport};
pub use fuzzy::{FuzzyError, FuzzyPartition};
pub use linalg::Matrix;
pub use regression::{FittedModel, ModelError, ModelKind, ModelParams, Regressor};
pub use stats::StatsError;

/// Any failure raised by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl Error {
    /// True for failures of the numerical routines rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Model(ModelError::RankDeficient { .. } | ModelError::NotConverged { .. } | ModelError::NonFinite(_))
                | Error::Eval(EvalError::NonFinite)
        )
    }
}

// Runs the guide's snippets as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/survey-data.md")]
    mod survey_data {}
    #[doc = include_str!("../../../book/src/statistics.md")]
    mod statistics {}
    #[doc = include_str!("../../../book/src/regression.md")]
    mod regression {}
    #[doc = include_str!("../../../book/src/fuzzy.md")]
    mod fuzzy {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
}
