//! Shared numerical plumbing: adaptive Gauss-Kronrod quadrature on finite
//! and semi-infinite intervals, a series-convergence classifier, and
//! sampling diagnostics (empirical characteristic function, one-sample
//! Kolmogorov-Smirnov distance, Wilson intervals).
//!
//! All operations are pure functions of their inputs and safe to call
//! concurrently.

mod quad;
mod series;
mod stats;

pub use quad::{integrate, integrate_with, QuadOptions, QuadratureResult};
pub use series::{classify_series, classify_series_with, SeriesVerdict, TailBound, Verdict};
pub use stats::{empirical_cf, ks_distance, wilson_interval};

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum NumericsError {
    /// The adaptive scheme exhausted its interval budget before meeting the
    /// requested tolerance. Carries the best estimate obtained so far.
    #[error("quadrature failed: best estimate {value} ± {error_estimate} after {evaluations} evaluations")]
    QuadratureFailed {
        value: f64,
        error_estimate: f64,
        evaluations: usize,
    },
    #[error("integrand returned a non-finite value near {point}")]
    NonFiniteIntegrand { point: f64 },
    #[error("series term {index} is negative or non-finite: {value}")]
    BadTerm { index: usize, value: f64 },
    #[error("empty sample set")]
    EmptySamples,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
