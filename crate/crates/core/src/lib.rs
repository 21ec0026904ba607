//! Variance-adaptive confidence bands for the empirical distribution function.
//!
//! The crate is organised around six pieces:
//!
//! * [`ecdf`]: sorted samples, the empirical CDF and exact (weighted)
//!   supremum statistics computed at order statistics.
//! * [`bands`]: closed-form band envelopes (classical DKW, variance-weighted,
//!   min-form, shifted and full-range) and the inversion from a failure
//!   probability to a band parameter.
//! * [`binom`]: exact log-space binomial tails and the comparison bounds
//!   (Bennett, Gaussian tail, Petrov-type lower bound) used as ground truth
//!   for fixed-`t` statements.
//! * [`rademacher`]: exact enumeration and Monte Carlo for normalized
//!   Rademacher prefix-sum maxima.
//! * [`experiments`]: the seeded, parallel Monte Carlo engine (coverage,
//!   constant calibration, growth curves).
//! * [`stats`]: small numerical helpers (Wilson intervals, compensated sums).
//!
//! Everything is a pure function of its inputs. Monte Carlo results depend
//! only on the master seed, never on the number of worker threads.

pub mod bands;
pub mod binom;
pub mod ecdf;
mod error;
pub mod experiments;
pub mod model;
pub mod rademacher;
pub mod rng;
pub mod stats;

pub use bands::{BandKind, BandSpec, ConstantSet, ConstantSource};
pub use ecdf::{DeviationResult, RangeMode, Side, SortedSample, WeightMode};
pub use error::{Error, Result};
pub use model::DistributionModel;

/// Absolute tolerance applied to comparisons of F-values.
pub const U_TOL: f64 = 1e-12;

/// `ln(ln(x))` with natural logarithms. Positive only for `x > e`.
pub fn loglog(x: f64) -> f64 {
    x.ln().ln()
}
