use std::fmt;

use readiness::{Error, EvalError, FuzzyError, ModelError};

/// Process exit codes.
pub const USAGE: i32 = 1;
pub const DATA: i32 = 2;
pub const NUMERICAL: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: USAGE,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            code: DATA,
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError::data(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_numerical() {
            NUMERICAL
        } else {
            match &e {
                Error::Model(ModelError::InvalidParams(_)) | Error::Fuzzy(_) => USAGE,
                Error::Eval(EvalError::UnknownTerm(_)) => USAGE,
                _ => DATA,
            }
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<FuzzyError> for CliError {
    fn from(e: FuzzyError) -> Self {
        CliError::usage(format!("partition: {e}"))
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        Error::from(e).into()
    }
}

impl From<readiness::DataError> for CliError {
    fn from(e: readiness::DataError) -> Self {
        Error::from(e).into()
    }
}

impl From<readiness::StatsError> for CliError {
    fn from(e: readiness::StatsError) -> Self {
        Error::from(e).into()
    }
}
