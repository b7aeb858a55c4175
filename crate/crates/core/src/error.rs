use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the engine computations and the optimizer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}` = {value}: {reason}")]
    Validation { field: &'static str, value: f64, reason: &'static str },

    #[error("meter truncation needs more than {cap} levels (reached n_max = {n_max}, tail mass {tail:.3e})")]
    TruncationCap { n_max: usize, cap: usize, tail: f64 },

    #[error("conditional probability undefined at meter outcome {n}: outcome probability {probability:.3e}")]
    UndefinedConditional { n: usize, probability: f64 },

    #[error("meter index {n} beyond truncation n_max = {n_max}")]
    IndexOutOfRange { n: usize, n_max: usize },

    #[error("power is undefined at zero measurement time")]
    ZeroTime,

    #[error("passive temperature is infinite at equal conditional populations")]
    InfiniteTemperature,

    #[error("truncated tail mass {tail:.3e} exceeds the reporting limit {limit:.1e}")]
    TailTooLarge { tail: f64, limit: f64 },

    #[error("outside the domain of `{what}`: {reason}")]
    Domain { what: &'static str, reason: String },

    #[error(
        "oracle truncation leak: top meter levels hold {occupation:.3e} (limit {limit:.1e}) at dim_meter = {dim_meter}"
    )]
    TruncationLeak { occupation: f64, limit: f64, dim_meter: usize },

    #[error("objective vectors of different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid optimizer configuration: {0}")]
    Config(String),

    #[error("evaluation budget of {cap} exceeded")]
    Budget { cap: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: malformed front file: {reason}")]
    FrontFormat { path: PathBuf, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
