use thiserror::Error;

use crate::dyadic::Dyadic;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("malformed interval [{lo}, {hi}]: lo > hi")]
    MalformedInterval { lo: Dyadic, hi: Dyadic },

    #[error("partition search exceeded depth {max_depth} on [{lo}, {hi}]")]
    MaxDepthExceeded {
        lo: Dyadic,
        hi: Dyadic,
        max_depth: u32,
    },

    #[error("gauge is not positive at t = {t}: got {value}")]
    NonPositiveGauge { t: Dyadic, value: String },

    #[error("value space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("functional incompatible with space: {0}")]
    IncompatibleFunctional(String),

    #[error("exact integration unsupported for evaluator-class integrand")]
    UnsupportedExactIntegration,

    #[error("regions overlap in a set of positive measure (items {0} and {1})")]
    Overlap(usize, usize),

    #[error("tag search exhausted at index {index} after {attempts} attempts")]
    SearchExhausted {
        index: usize,
        attempts: usize,
        trace: Vec<String>,
    },

    #[error("gauge scale 1/{k} exceeds the working grid resolution")]
    ResolutionExceeded { k: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
