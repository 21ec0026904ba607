//! Empirical distribution functions and exact supremum statistics.
//!
//! Every statistic here is a supremum over `t` of some function of
//! `F_m(t) - F(t)`. Because `F` is continuous, mapping the sample through
//! `F` turns the problem into one about uniform order statistics, and the
//! supremum is attained (or approached) at an order statistic, from one of
//! its two sides, or at an end of the admissible range. The kernels with a
//! `_u` suffix work directly on sorted values in uniform space; the
//! [`SortedSample`] methods map through a [`DistributionModel`] first and
//! then call the same kernels, which is what makes the results exactly
//! distribution-free.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DistributionModel;
use crate::U_TOL;

/// Which one-sided value of the step function is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `F_m(t)`, counting observations `<= t`.
    At,
    /// `F_m(t-)`, counting observations `< t`.
    LeftLimit,
}

/// Normalisation applied to `|F_m - F|` at F-value `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// `sqrt(u (1 - u))`
    Variance,
    /// `sqrt(min(u, 1 - u))`
    Minform,
    /// `sqrt(u)`
    Zm,
}

impl WeightMode {
    #[inline]
    pub fn weight(self, u: f64) -> f64 {
        match self {
            Self::Variance => (u * (1.0 - u)).sqrt(),
            Self::Minform => u.min(1.0 - u).sqrt(),
            Self::Zm => u.sqrt(),
        }
    }
}

/// The set of F-values over which a weighted supremum is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeMode {
    /// `u (1 - u) >= delta`, i.e. `u` in `[u-, u+]`.
    Sigma2GeDelta,
    /// `u` in `[2 delta, 1/2]`.
    FInTwoDeltaHalf,
}

impl RangeMode {
    /// Closed interval `[lo, hi]` of admissible F-values.
    pub fn bounds(self, delta: f64) -> Result<(f64, f64)> {
        if !delta.is_finite() || delta <= 0.0 {
            return Err(Error::InvalidDelta { delta, reason: "delta must be positive" });
        }
        match self {
            Self::Sigma2GeDelta => {
                if delta > 0.25 + U_TOL {
                    return Err(Error::InvalidDelta {
                        delta,
                        reason: "u(1-u) never exceeds 1/4",
                    });
                }
                Ok(variance_range(delta.min(0.25)))
            }
            Self::FInTwoDeltaHalf => {
                if delta >= 0.25 {
                    return Err(Error::InvalidDelta { delta, reason: "[2 delta, 1/2] is empty" });
                }
                Ok((2.0 * delta, 0.5))
            }
        }
    }
}

/// `[u-, u+]` with `u± = (1 ± sqrt(1 - 4 delta)) / 2`, for `0 < delta <= 1/4`.
pub fn variance_range(delta: f64) -> (f64, f64) {
    let root = (1.0 - 4.0 * delta).max(0.0).sqrt();
    // 2 delta / (1 + root) avoids cancellation in (1 - root) / 2 for small delta.
    (2.0 * delta / (1.0 + root), 0.5 * (1.0 + root))
}

/// A supremum statistic with the F-value and side where it is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationResult {
    pub value: f64,
    pub arg_u: f64,
    pub side: Side,
}

impl DeviationResult {
    const ZERO: Self = Self { value: 0.0, arg_u: 0.0, side: Side::At };

    #[inline]
    fn offer(&mut self, value: f64, u: f64, side: Side) {
        if value > self.value {
            *self = Self { value, arg_u: u, side };
        }
    }
}

/// Result of checking `3/4 F <= F_m <= 5/4 F` (and its mirror image above 1/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsomorphicCheck {
    pub violated: bool,
    /// The ratio `F_m / F` (or `(1 - F_m) / (1 - F)` above 1/2) furthest from 1.
    pub worst_ratio: f64,
    pub arg_u: f64,
}

/// Ascending real observations. Duplicates are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSample {
    values: Vec<f64>,
}

impl SortedSample {
    pub fn new(mut raw: Vec<f64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(bad) = raw.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidValue(format!("non-finite observation {bad}")));
        }
        raw.sort_unstable_by(f64::total_cmp);
        Ok(Self { values: raw })
    }

    pub fn from_slice(raw: &[f64]) -> Result<Self> {
        Self::new(raw.to_vec())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ecdf(&self, t: f64, side: Side) -> f64 {
        ecdf_u(&self.values, t, side)
    }

    /// Maps every observation through `F`.
    pub fn pit_transform(&self, model: &DistributionModel) -> Result<SortedSample> {
        if let Some(bad) = self.values.iter().find(|&&x| !model.in_support(x)) {
            return Err(Error::InvalidValue(format!("{bad} is outside the support of {model}")));
        }
        Ok(Self { values: self.to_uniform(model) })
    }

    /// `F` applied to every observation, re-sorted in case rounding in `F`
    /// swapped two close neighbours.
    fn to_uniform(&self, model: &DistributionModel) -> Vec<f64> {
        let mut us: Vec<f64> = self.values.iter().map(|&x| model.cdf(x)).collect();
        us.sort_unstable_by(f64::total_cmp);
        us
    }

    /// `sup_t |F_m(t) - F(t)|`.
    pub fn sup_deviation(&self, model: &DistributionModel) -> DeviationResult {
        sup_deviation_u(&self.to_uniform(model))
    }

    /// `sup |F_m(t) - F(t)| / w(F(t))` over the F-values selected by `range`.
    pub fn weighted_sup(
        &self,
        model: &DistributionModel,
        delta: f64,
        weight: WeightMode,
        range: RangeMode,
    ) -> Result<DeviationResult> {
        let (lo, hi) = range.bounds(delta)?;
        Ok(weighted_sup_u(&self.to_uniform(model), lo, hi, weight))
    }

    pub fn isomorphic_violation(&self, model: &DistributionModel, delta: f64) -> Result<IsomorphicCheck> {
        let (lo, hi) = RangeMode::Sigma2GeDelta.bounds(delta)?;
        Ok(isomorphic_violation_u(&self.to_uniform(model), lo, hi))
    }
}

/// `F_m(t)` or `F_m(t-)` for sorted values.
#[inline]
pub fn ecdf_u(sorted: &[f64], t: f64, side: Side) -> f64 {
    let count = match side {
        Side::At => sorted.partition_point(|&v| v <= t),
        Side::LeftLimit => sorted.partition_point(|&v| v < t),
    };
    count as f64 / sorted.len() as f64
}

/// Distinct values with the number of observations strictly below and at-or-below.
struct Steps<'a> {
    values: &'a [f64],
    pos: usize,
}

impl Iterator for Steps<'_> {
    /// `(value, count below, count at or below)`
    type Item = (f64, usize, usize);

    #[inline]
    fn next(&mut self) -> Option<Self::Item> {
        let v = *self.values.get(self.pos)?;
        let below = self.pos;
        let mut end = self.pos + 1;
        while end < self.values.len() && self.values[end] == v {
            end += 1;
        }
        self.pos = end;
        Some((v, below, end))
    }
}

fn steps_from(values: &[f64], pos: usize) -> Steps<'_> {
    Steps { values, pos }
}

/// Kolmogorov-Smirnov distance to the uniform CDF for sorted values in `[0, 1]`.
pub fn sup_deviation_u(us: &[f64]) -> DeviationResult {
    let m = us.len() as f64;
    let mut best = DeviationResult::ZERO;
    for (u, below, upto) in steps_from(us, 0) {
        best.offer((u - below as f64 / m).abs(), u, Side::LeftLimit);
        best.offer((upto as f64 / m - u).abs(), u, Side::At);
    }
    best
}

/// Weighted supremum over `u` in `[lo, hi]` for sorted uniform-space values.
///
/// On each constancy interval of `F_m` with level `a`, `(u - a) / w(u)` is
/// increasing in `u` for all three weights, so only interval ends matter.
pub fn weighted_sup_u(us: &[f64], lo: f64, hi: f64, weight: WeightMode) -> DeviationResult {
    let m = us.len() as f64;
    let mut best = DeviationResult::ZERO;
    let eval = |level: f64, u: f64| (level - u).abs() / weight.weight(u);

    best.offer(eval(ecdf_u(us, lo, Side::At), lo), lo, Side::At);
    if hi > lo {
        best.offer(eval(ecdf_u(us, hi, Side::At), hi), hi, Side::At);
    }
    let start = us.partition_point(|&v| v < lo);
    for (u, below, upto) in steps_from(us, start) {
        if u > hi {
            break;
        }
        if u > lo {
            best.offer(eval(below as f64 / m, u), u, Side::LeftLimit);
        }
        best.offer(eval(upto as f64 / m, u), u, Side::At);
    }
    best
}

/// Squared weighted supremum over `[lo_j, hi_j]` for several nested ranges
/// at once, returned in input order.
///
/// `ranges` must be nested: sorted so that each range contains the next.
/// Between two order statistics the supremum is attained at an end, so each
/// index contributes the larger of its two adjacent levels; with ties the
/// intermediate levels lie between the true ones and do not change the
/// maximum. The result agrees with the square of [`weighted_sup_u`] up to
/// rounding.
pub fn nested_weighted_sq_sups_u(us: &[f64], ranges: &[(f64, f64)], weight: WeightMode) -> Vec<f64> {
    debug_assert!(ranges.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 >= w[1].1));
    let inv_m = 1.0 / us.len() as f64;
    let w2 = |u: f64| match weight {
        WeightMode::Variance => u * (1.0 - u),
        WeightMode::Minform => u.min(1.0 - u),
        WeightMode::Zm => u,
    };
    let seg_max = |from: usize, to: usize| {
        let mut best = 0.0f64;
        for (i, &u) in us[from..to].iter().enumerate() {
            let k = (from + i) as f64;
            let d = (u - k * inv_m).max((k + 1.0) * inv_m - u);
            best = best.max(d * d / w2(u));
        }
        best
    };
    let end_q = |u: f64| {
        let d = ecdf_u(us, u, Side::At) - u;
        d * d / w2(u)
    };
    let bounds: Vec<(usize, usize)> = ranges
        .iter()
        .map(|&(lo, hi)| (us.partition_point(|&v| v < lo), us.partition_point(|&v| v <= hi)))
        .collect();
    let mut out = vec![0.0; ranges.len()];
    let mut acc = 0.0f64;
    let mut inner: Option<(usize, usize)> = None;
    for j in (0..ranges.len()).rev() {
        let (a, b) = bounds[j];
        acc = match inner {
            None => acc.max(seg_max(a, b.max(a))),
            Some((ia, ib)) => acc.max(seg_max(a, ia.max(a))).max(seg_max(ib.min(b), b)),
        };
        inner = Some((a, b.max(a)));
        let (lo, hi) = ranges[j];
        out[j] = acc.max(end_q(lo)).max(end_q(hi));
    }
    out
}

/// Checks `3/4 u <= F_m <= 5/4 u` for `u <= 1/2` and the mirrored relation
/// `3/4 (1-u) <= 1 - F_m <= 5/4 (1-u)` above 1/2, over `u` in `[lo, hi]`.
///
/// `F_m / u` is decreasing on each constancy interval, so interval ends suffice.
pub fn isomorphic_violation_u(us: &[f64], lo: f64, hi: f64) -> IsomorphicCheck {
    let m = us.len() as f64;
    let mut worst = IsomorphicCheck { violated: false, worst_ratio: 1.0, arg_u: lo };
    let mut visit = |level: f64, u: f64| {
        let ratio = if u <= 0.5 { level / u } else { (1.0 - level) / (1.0 - u) };
        if ratio < 0.75 - U_TOL || ratio > 1.25 + U_TOL {
            worst.violated = true;
        }
        if (ratio - 1.0).abs() > (worst.worst_ratio - 1.0).abs() {
            worst.worst_ratio = ratio;
            worst.arg_u = u;
        }
    };
    visit(ecdf_u(us, lo, Side::At), lo);
    visit(ecdf_u(us, hi, Side::At), hi);
    let start = us.partition_point(|&v| v < lo);
    for (u, below, upto) in steps_from(us, start) {
        if u > hi {
            break;
        }
        if u > lo {
            visit(below as f64 / m, u);
        }
        visit(upto as f64 / m, u);
    }
    worst
}
