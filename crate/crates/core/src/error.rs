use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("deformation parameter must be a finite positive real, got {0}")]
    InvalidQ(f64),

    #[error("double factorial is undefined for n = {0} (need n >= -1)")]
    DoubleFactorialDomain(i64),

    #[error("invalid harmonic label (l = {l}, m = {m}): {reason}")]
    InvalidLabel { l: i64, m: i64, reason: &'static str },

    #[error("series Jackson measure requires 0 < q < 1, got q = {0}")]
    SeriesNeedsQBelowOne(f64),

    #[error("series depth must be positive")]
    ZeroSeriesDepth,

    #[error("truncation lmax = {lmax} is below the minimum {min} required here")]
    TruncationTooSmall { lmax: usize, min: usize },

    #[error("operators were built at different truncations ({0} vs {1})")]
    TruncationMismatch(usize, usize),

    #[error("invalid radial grid: {0}")]
    InvalidGrid(&'static str),

    #[error("energy window [{lo}, {hi}] does not bracket the eigenvalue with {nodes} nodes")]
    NotBracketed { lo: f64, hi: f64, nodes: usize },

    #[error("bisection did not converge after {0} iterations")]
    NotConverged(usize),

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
