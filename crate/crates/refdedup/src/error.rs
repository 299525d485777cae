//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("title {0:?} is empty after normalization")]
    EmptyAfterNormalize(String),

    #[error("catalog is invalid: {0}")]
    InvalidCatalog(String),

    #[error("request log is invalid: {0}")]
    InvalidLog(String),

    #[error("request log is empty")]
    EmptyLog,

    #[error("n-best size must be at least 1")]
    ZeroNbest,

    #[error("cooccurrence stats are inconsistent: {0}")]
    InconsistentStats(String),

    #[error("need {needed} negative candidates but only {available} are available")]
    NotEnoughNegatives { needed: usize, available: usize },

    #[error("training set needs at least {min} pairs, got {got}")]
    TooFewPairs { min: usize, got: usize },

    #[error("training set must contain both labels")]
    SingleLabelTrainingSet,

    #[error("non-finite feature value in pair ({a}, {b})")]
    NonFiniteFeature { a: u32, b: u32 },

    #[error("threshold {0} is outside [0, 1]")]
    InvalidThreshold(f64),

    #[error("cannot tune a threshold without positive labels")]
    NoPositiveLabels,

    #[error("boost strength must be non-negative, got {0}")]
    NegativeBoost(f64),

    #[error("manifest key {key:?}: {message}")]
    Config { key: String, message: String },

    #[error("missing input file {path}: run the `{stage}` stage first")]
    MissingInput { path: String, stage: &'static str },

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
