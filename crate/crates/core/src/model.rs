//! Continuous distribution models used to map samples into uniform space.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, Error, Result};
use crate::stats::{normal_quantile, normal_upper_tail};

/// A continuous distribution function `F` with its quantile function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionModel {
    Uniform01,
    Exponential { rate: f64 },
    Normal { mean: f64, sd: f64 },
}

impl DistributionModel {
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(invalid_input(format!("exponential rate must be positive, got {rate}")));
        }
        Ok(Self::Exponential { rate })
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        if !mean.is_finite() || !(sd.is_finite() && sd > 0.0) {
            return Err(invalid_input(format!("normal({mean}, {sd}) needs finite mean and sd > 0")));
        }
        Ok(Self::Normal { mean, sd })
    }

    pub fn in_support(&self, x: f64) -> bool {
        match *self {
            Self::Uniform01 => (0.0..=1.0).contains(&x),
            Self::Exponential { .. } => x.is_finite() && x >= 0.0,
            Self::Normal { .. } => x.is_finite(),
        }
    }

    /// `F(x)`. Values outside the support are clamped to 0 or 1.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Uniform01 => x.clamp(0.0, 1.0),
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Self::Normal { mean, sd } => normal_upper_tail(-(x - mean) / sd),
        }
    }

    /// `F^{-1}(u)` for `u` in `(0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            Self::Uniform01 => u,
            Self::Exponential { rate } => -(-u).ln_1p() / rate,
            Self::Normal { mean, sd } => mean + sd * normal_quantile(u),
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, Self::Uniform01)
    }
}

impl fmt::Display for DistributionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Uniform01 => write!(f, "uniform"),
            Self::Exponential { rate } => write!(f, "exponential:{rate}"),
            Self::Normal { mean, sd } => write!(f, "normal:{mean},{sd}"),
        }
    }
}

/// Parses `uniform`, `exponential[:rate]` and `normal[:mean,sd]`.
impl FromStr for DistributionModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a)),
            None => (s.trim(), None),
        };
        let nums = |a: &str| -> Result<Vec<f64>> {
            a.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| invalid_input(format!("bad model parameter {t:?}")))
                })
                .collect()
        };
        match (name, args) {
            ("uniform" | "uniform01", None) => Ok(Self::Uniform01),
            ("exponential", None) => Self::exponential(1.0),
            ("exponential", Some(a)) => match nums(a)?.as_slice() {
                [rate] => Self::exponential(*rate),
                _ => Err(invalid_input("exponential takes one parameter")),
            },
            ("normal", None) => Self::normal(0.0, 1.0),
            ("normal", Some(a)) => match nums(a)?.as_slice() {
                [mean, sd] => Self::normal(*mean, *sd),
                _ => Err(invalid_input("normal takes two parameters: mean,sd")),
            },
            _ => Err(invalid_input(format!("unknown model {s:?}"))),
        }
    }
}
