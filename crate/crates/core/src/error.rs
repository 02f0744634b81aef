use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("weight vector is empty")]
    EmptyWeights,

    #[error("weight #{index} is zero")]
    ZeroWeight { index: usize },

    #[error("weight #{index} is not finite")]
    NonFiniteWeight { index: usize },

    #[error("{what}: {n} terms exceeds the enumeration cap of {cap}")]
    CapExceeded { what: &'static str, n: usize, cap: usize },

    #[error("exact mirror is absent; build the vector from rational or surd inputs")]
    ExactMirrorAbsent,

    #[error("cannot compare exactly: {0}")]
    InexactComparison(String),

    #[error("cannot eliminate {m} of {n} weights (need 1 <= m < n with sigma_m > 0)")]
    InvalidElimination { m: usize, n: usize },

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("could not parse `{input}`: {reason}")]
    Parse { input: String, reason: String },

    #[error("non-finite intermediate value in {0}")]
    NonFinite(&'static str),

    #[error("subdivision too coarse: error bound {achieved:e} exceeds requested {requested:e}")]
    TooCoarse { achieved: f64, requested: f64 },

    #[error("adaptive integrator error estimate {estimate:e} is not below the discount {discount}")]
    AdaptiveUnreliable { estimate: f64, discount: f64 },

    #[error("table file {path}: {reason}")]
    TableFormat { path: PathBuf, reason: String },

    #[error("table checksum mismatch (stored {stored:#018x}, computed {computed:#018x})")]
    Checksum { stored: u64, computed: u64 },

    #[error("unsupported table format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("table header does not match the requested grid: {0}")]
    GridMismatch(String),

    #[error("premise violated: {0}")]
    Premise(String),

    #[error("table resolution too coarse for this campaign: {0}")]
    ResolutionTooCoarse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(input: &str, reason: impl Into<String>) -> Self {
        Error::Parse {
            input: input.to_string(),
            reason: reason.into(),
        }
    }

    /// Errors caused by bad input or configuration rather than by a computation.
    pub fn is_usage(&self) -> bool {
        !matches!(
            self,
            Error::NonFinite(_)
                | Error::TooCoarse { .. }
                | Error::AdaptiveUnreliable { .. }
                | Error::InexactComparison(_)
                | Error::Premise(_)
        )
    }
}
