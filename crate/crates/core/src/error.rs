use thiserror::Error;

/// Errors raised anywhere in the positioning pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A configuration value violates its invariant. `key` names the offending field.
    #[error("invalid configuration `{key}`: {reason}")]
    Config { key: String, reason: String },

    /// A function was called outside its mathematical domain.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// The waveguide is operated below cut-off, so no wave propagates.
    #[error("evanescent mode: real wavenumber {k_r} does not exceed cut-off wavenumber {k_c}")]
    Evanescent { k_r: f64, k_c: f64 },

    /// The lateration system has fewer than two distinct PA coordinates.
    #[error("rank-deficient lateration system: {measurements} measurement(s), {distinct} distinct PA position(s); need at least 2 distinct")]
    RankDeficient {
        measurements: usize,
        distinct: usize,
    },

    /// The weighted design matrix is numerically singular.
    #[error("ill-conditioned weighted system (condition number {condition:e} exceeds {limit:e})")]
    IllConditioned { condition: f64, limit: f64 },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
