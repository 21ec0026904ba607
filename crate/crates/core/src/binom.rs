//! Exact binomial tails and closed-form comparison bounds.
//!
//! For a fixed `t`, `m F_m(t)` is `Binomial(m, F(t))`, so every fixed-`t`
//! statement reduces to a binomial tail. Tails are accumulated in log space
//! because the regime checks routinely need probabilities far below the
//! smallest positive `f64`.

use serde::{Deserialize, Serialize};

use crate::bands::{classify_regime, regime_width, Regime};
use crate::error::{invalid_input, out_of_range, Result};
use crate::stats::{normal_pdf, normal_upper_tail, CompensatedSum};
use crate::U_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailSide {
    TwoSided,
    Upper,
    Lower,
}

/// `P(side-deviation of Bin(m, p)/m from p >= epsilon)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailQuery {
    pub m: u64,
    pub p: f64,
    pub epsilon: f64,
    pub side: TailSide,
}

impl TailQuery {
    pub fn new(m: u64, p: f64, epsilon: f64, side: TailSide) -> Self {
        Self { m, p, epsilon, side }
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(invalid_input("m must be at least 1"));
        }
        check_p(self.p)?;
        if !(self.epsilon >= 0.0) || self.epsilon.is_infinite() {
            return Err(invalid_input(format!("epsilon must be finite and nonnegative, got {}", self.epsilon)));
        }
        Ok(())
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(invalid_input(format!("p = {p} outside (0, 1)")))
    }
}

/// Outcome of comparing an exact probability with a bound `2 exp(-c1 delta m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeCheckResult {
    pub exact_prob: f64,
    pub log_exact_prob: f64,
    pub bound_value: f64,
    pub log_bound: f64,
    pub threshold: f64,
    pub regime: Regime,
    pub satisfied: bool,
}

/// Constants probed by the fixed-`t` checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConstants {
    pub c1: f64,
    pub c2: f64,
}

/// `ln P(Bin(m, p) = k)` via the log-gamma function.
pub fn binom_log_pmf(m: u64, p: f64, k: u64) -> Result<f64> {
    check_p(p)?;
    if k > m {
        return Err(invalid_input(format!("k = {k} exceeds m = {m}")));
    }
    Ok(log_pmf_unchecked(m, p, k))
}

#[inline]
fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

#[inline]
fn log_pmf_unchecked(m: u64, p: f64, k: u64) -> f64 {
    let (mf, kf) = (m as f64, k as f64);
    let log_choose = ln_gamma(mf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(mf - kf + 1.0);
    let mut lp = log_choose;
    if k > 0 {
        lp += kf * p.ln();
    }
    if k < m {
        lp += (mf - kf) * (-p).ln_1p();
    }
    lp
}

/// Largest `m` for which tails are also summed in linear space.
const LINEAR_MAX_M: u64 = 60;

/// A probability held either directly or as its logarithm.
#[derive(Debug, Clone, Copy)]
enum Mass {
    Linear(f64),
    Log(f64),
}

impl Mass {
    const ZERO: Self = Self::Linear(0.0);

    fn ln(self) -> f64 {
        match self {
            Self::Linear(x) => x.ln(),
            Self::Log(l) => l,
        }
    }

    fn value(self) -> f64 {
        match self {
            Self::Linear(x) => x,
            Self::Log(l) => l.exp(),
        }
    }

    fn plus(self, other: Self) -> Self {
        match (self, other) {
            (Self::Linear(a), Self::Linear(b)) => Self::Linear(a + b),
            (a, b) => Self::Log(log_add(a.ln(), b.ln())),
        }
    }
}

fn choose_u64(m: u64, k: u64) -> u64 {
    let k = k.min(m - k);
    // Each partial product is itself a binomial coefficient, so the division is exact.
    (0..k).fold(1u64, |acc, i| acc * (m - i) / (i + 1))
}

/// `sum_{k in lo..=hi} P(Bin(m, p) = k)`, summed from the end furthest from
/// the mode towards it.
///
/// Small `m` is summed in linear space from exact binomial coefficients,
/// which keeps the relative error near a few ulps; everything else, and any
/// range whose terms approach the subnormal range, is summed in log space.
fn range_mass(m: u64, p: f64, lo: u64, hi: u64) -> Mass {
    if lo > hi {
        return Mass::ZERO;
    }
    let mode = ((m as f64 + 1.0) * p).floor().min(m as f64) as u64;
    let peak = mode.clamp(lo, hi);
    let order = (lo..peak).chain((peak + 1..=hi).rev()).chain(std::iter::once(peak));
    let anchor = log_pmf_unchecked(m, p, peak);
    let smallest = log_pmf_unchecked(m, p, lo).min(log_pmf_unchecked(m, p, hi));
    if m <= LINEAR_MAX_M && smallest > -600.0 {
        let q = 1.0 - p;
        let sum: CompensatedSum = order
            .map(|k| choose_u64(m, k) as f64 * p.powi(k as i32) * q.powi((m - k) as i32))
            .collect();
        return Mass::Linear(sum.value());
    }
    let sum: CompensatedSum = order.map(|k| (log_pmf_unchecked(m, p, k) - anchor).exp()).collect();
    Mass::Log(anchor + sum.value().ln())
}

/// `ln sum_{k in lo..=hi} P(Bin(m, p) = k)`.
fn log_range_sum(m: u64, p: f64, lo: u64, hi: u64) -> f64 {
    range_mass(m, p, lo, hi).ln()
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Index ranges of the upper and lower deviation events.
fn tail_cutoffs(q: &TailQuery) -> (Option<u64>, Option<u64>) {
    let mf = q.m as f64;
    // Rounding slack relative to the magnitude of m (p +- epsilon).
    let slack = mf * (q.p + q.epsilon) * U_TOL;
    let up = (mf * (q.p + q.epsilon) - slack).ceil().max(0.0);
    let up = (up <= mf).then_some(up as u64);
    let down = (mf * (q.p - q.epsilon) + slack).floor();
    let down = (down >= 0.0).then_some(down.min(mf) as u64);
    (up, down)
}

fn deviation_mass(q: &TailQuery) -> Result<Mass> {
    q.validate()?;
    let (up, down) = tail_cutoffs(q);
    let upper = || up.map_or(Mass::ZERO, |k| range_mass(q.m, q.p, k, q.m));
    let lower = || down.map_or(Mass::ZERO, |k| range_mass(q.m, q.p, 0, k));
    Ok(match q.side {
        TailSide::Upper => upper(),
        TailSide::Lower => lower(),
        TailSide::TwoSided => match (up, down) {
            // The two events overlap or touch: every outcome deviates.
            (Some(u), Some(d)) if d + 1 >= u => Mass::Linear(1.0),
            _ => upper().plus(lower()),
        },
    })
}

/// `ln` of [`deviation_prob`], finite far below the smallest positive `f64`.
pub fn deviation_log_prob(q: &TailQuery) -> Result<f64> {
    Ok(deviation_mass(q)?.ln().min(0.0))
}

/// Exact deviation probability of `Bin(m, p)/m` from `p`.
pub fn deviation_prob(q: &TailQuery) -> Result<f64> {
    Ok(deviation_mass(q)?.value().min(1.0))
}

fn check_result(log_exact: f64, log_bound: f64, threshold: f64, regime: Regime, want_at_least: bool) -> RegimeCheckResult {
    let log_exact = log_exact.min(0.0);
    RegimeCheckResult {
        exact_prob: log_exact.exp(),
        log_exact_prob: log_exact,
        bound_value: log_bound.exp().min(1.0),
        log_bound,
        threshold,
        regime,
        satisfied: if want_at_least { log_exact >= log_bound } else { log_exact <= log_bound },
    }
}

/// `ln(2 exp(-c1 delta m))`.
fn log_failure_bound(c1: f64, delta: f64, m: u64) -> f64 {
    std::f64::consts::LN_2 - c1 * delta * m as f64
}

/// Checks `P(|F_m(t) - F(t)| >= c2 sigma sqrt(delta)) >= 2 exp(-c1 delta m)`
/// at `F(t) = p`, where `sigma^2 = p (1 - p) >= delta`.
pub fn fixed_t_lower_check(
    m: u64,
    p: f64,
    delta: f64,
    consts: ProbeConstants,
    min_delta_m: f64,
) -> Result<RegimeCheckResult> {
    check_p(p)?;
    if !(delta > 0.0) || m == 0 {
        return Err(invalid_input("need delta > 0 and m >= 1"));
    }
    let s = p * (1.0 - p);
    if s < delta - U_TOL {
        return Err(out_of_range(format!("sigma^2 = {s} below delta = {delta}")));
    }
    if delta * (m as f64) < min_delta_m {
        return Err(out_of_range(format!("delta m = {} below {min_delta_m}", delta * m as f64)));
    }
    let threshold = consts.c2 * (s * delta).sqrt();
    let log_exact = deviation_log_prob(&TailQuery::new(m, p, threshold, TailSide::TwoSided))?;
    Ok(check_result(log_exact, log_failure_bound(consts.c1, delta, m), threshold, Regime::Core, true))
}

/// Direction of a small-variance regime check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoCancelDirection {
    /// The deviation exceeds the envelope with probability at most the bound.
    UpperThm51,
    /// The deviation reaches the envelope with probability at least the bound.
    LowerProp52,
}

/// Exact check of the small-variance envelope at `F(t) = p`, `p (1 - p) <= delta / 10`.
pub fn no_cancel_check(
    m: u64,
    p: f64,
    delta: f64,
    consts: ProbeConstants,
    direction: NoCancelDirection,
) -> Result<RegimeCheckResult> {
    check_p(p)?;
    if !(delta > 0.0 && delta <= 0.25) || m == 0 {
        return Err(invalid_input("need 0 < delta <= 1/4 and m >= 1"));
    }
    let s = p * (1.0 - p);
    if s > delta / 10.0 + U_TOL {
        return Err(out_of_range(format!("sigma^2 = {s} above delta / 10")));
    }
    let dm = delta * m as f64;
    if dm < 10.0 {
        return Err(crate::Error::DeltaMTooSmall(dm));
    }
    let regime = classify_regime(s, delta, m);
    let threshold = consts.c2 * regime_width(s, delta, regime);
    let query = TailQuery::new(m, p, threshold, TailSide::TwoSided);
    let log_exact = match (direction, regime) {
        (NoCancelDirection::LowerProp52, Regime::Tiny) => {
            // No observation at or below t: |F_m - F| = p, probability (1 - p)^m.
            let (up, _) = tail_cutoffs(&query);
            let none_below = if p >= threshold * (1.0 - U_TOL) { m as f64 * (-p).ln_1p() } else { f64::NEG_INFINITY };
            let upper = up.map_or(f64::NEG_INFINITY, |k| log_range_sum(m, p, k.max(1), m));
            log_add(none_below, upper)
        }
        _ => deviation_log_prob(&query)?,
    };
    let log_bound = log_failure_bound(consts.c1, delta, m);
    Ok(check_result(log_exact, log_bound, threshold, regime, direction == NoCancelDirection::LowerProp52))
}

/// `h(x) = (1 + x) ln(1 + x) - x`.
pub fn bennett_h(x: f64) -> f64 {
    (1.0 + x) * x.ln_1p() - x
}

/// `ln` of the two-sided Bennett bound `2 exp(-m v h(eps / v))`, `v = p (1 - p)`.
pub fn bennett_log_bound(m: u64, p: f64, eps: f64) -> Result<f64> {
    check_p(p)?;
    if !(eps > 0.0) || eps.is_infinite() {
        return Err(invalid_input(format!("eps must be positive, got {eps}")));
    }
    let v = p * (1.0 - p);
    Ok(std::f64::consts::LN_2 - m as f64 * v * bennett_h(eps / v))
}

/// Two-sided Bennett bound on `P(|Bin(m, p)/m - p| >= eps)`. Not clipped to 1.
pub fn bennett_bound(m: u64, p: f64, eps: f64) -> Result<f64> {
    Ok(bennett_log_bound(m, p, eps)?.exp())
}

/// `max(0, phi(lambda) / lambda * (1 - c / lambda^2))`, a lower bound on the
/// Gaussian tail for suitable `c`.
pub fn gaussian_tail_lower(lambda: f64, c: f64) -> Result<f64> {
    if !(lambda > 0.0) || lambda.is_infinite() {
        return Err(invalid_input(format!("lambda must be positive, got {lambda}")));
    }
    Ok((normal_pdf(lambda) / lambda * (1.0 - c / (lambda * lambda))).max(0.0))
}

/// Constants of the Petrov-type comparison between Rademacher sums and the
/// Gaussian tail: validity cap `lambda <= cap n^{1/6}` and the two correction
/// constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PetrovConstants {
    pub cap: f64,
    pub c1: f64,
    pub c2: f64,
}

/// `P(g >= lambda) exp(c1 lambda^3 / sqrt n) (1 + c2 (lambda + 1) / sqrt n)`.
pub fn petrov_lower(n: u64, lambda: f64, consts: PetrovConstants) -> Result<f64> {
    if n == 0 {
        return Err(invalid_input("n must be at least 1"));
    }
    let nf = n as f64;
    if !(lambda >= 0.0) || lambda > consts.cap * nf.powf(1.0 / 6.0) {
        return Err(out_of_range(format!("lambda = {lambda} outside [0, {} n^(1/6)]", consts.cap)));
    }
    let root = nf.sqrt();
    Ok(normal_upper_tail(lambda)
        * (consts.c1 * lambda.powi(3) / root).exp()
        * (1.0 + consts.c2 * (lambda + 1.0) / root))
}

/// `P(n^{-1/2} sum eps_i >= lambda) = P(Bin(n, 1/2) >= (n + lambda sqrt n) / 2)`.
pub fn rademacher_tail(n: u64, lambda: f64) -> Result<f64> {
    let eps = lambda / (2.0 * (n as f64).sqrt());
    deviation_prob(&TailQuery::new(n, 0.5, eps.max(0.0), TailSide::Upper))
}
