use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("input must be sorted ascending")]
    Unsorted,

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("need at least {required} values, got {available}")]
    InsufficientData { required: usize, available: usize },

    #[error("suspected block size {t} is not below sample size {n}")]
    BlockTooLarge { t: usize, n: usize },

    #[error("suspected count {t} exceeds the honest-majority cap {cap}")]
    ExceedsMajority { t: usize, cap: usize },

    #[error("report has {actual} sensors but the attack profile expects {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("no critical value for {kind} at n={n}, t={t}, alpha={alpha}")]
    MissingCriticalValue {
        kind: &'static str,
        n: usize,
        t: usize,
        alpha: f64,
    },

    #[error("critical value table check failed: {0}")]
    TableInvariant(String),

    #[error("fusion needs at least one retained sensor")]
    EmptyFusion,

    #[error("config: {0}")]
    Config(String),

    #[error("cache file {path}: {message}")]
    Cache { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
