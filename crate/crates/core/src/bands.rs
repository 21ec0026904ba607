//! Closed-form band envelopes and the inversion from failure probability to
//! band parameter.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ecdf::{Side, SortedSample, WeightMode};
use crate::error::{invalid_input, out_of_range, Error, Result};
use crate::model::DistributionModel;
use crate::{loglog, U_TOL};

/// Smallest sample size for which the `c0 ln ln m / m` floor is enforced.
pub const FLOOR_MIN_M: u64 = 16;

const CALIBRATED_JSON: &str = include_str!("../data/calibrated_constants.json");

/// Where a [`ConstantSet`] came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstantSource {
    Default,
    Calibrated { seed: u64, grid_id: String },
}

/// The absolute constants of the band statements.
///
/// `c0` scales the `ln ln m / m` floor on delta, `c1` is the exponent
/// constant in the failure probability `2 exp(-c1 delta m)`, and `c2`
/// multiplies the full-range envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantSet {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub source: ConstantSource,
}

impl Default for ConstantSet {
    fn default() -> Self {
        Self { c0: 4.0, c1: 1.0, c2: 1.0, source: ConstantSource::Default }
    }
}

impl ConstantSet {
    pub fn new(c0: f64, c1: f64, c2: f64) -> Result<Self> {
        let c = Self { c0, c1, c2, source: ConstantSource::Default };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c0", self.c0), ("c1", self.c1), ("c2", self.c2)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid_input(format!("constant {name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    /// Parses and validates a JSON constant set.
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| invalid_input(format!("constants: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("constant set serializes")
    }

    /// The calibrated constants shipped with the crate.
    pub fn calibrated() -> Self {
        Self::from_json(CALIBRATED_JSON).expect("bundled calibrated constants are valid")
    }

    /// `c0 ln ln m / m`, or 0 when the floor is not enforced (`m < 16`).
    pub fn delta_floor(&self, m: u64) -> f64 {
        if m < FLOOR_MIN_M {
            0.0
        } else {
            self.c0 * loglog(m as f64) / m as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandKind {
    /// Uniform half-width `sqrt(delta)`.
    Classical,
    /// `sigma(t) sqrt(delta)` where `sigma^2(t) >= delta`.
    Variance,
    /// `sqrt(delta min(F, 1 - F))`.
    Minform,
    /// `delta + sigma(t) sqrt(delta)`, valid for every `t`.
    Shifted,
    /// Regime-wise envelope covering the small-variance tails.
    FullRange,
}

impl BandKind {
    pub const ALL: [BandKind; 5] =
        [Self::Classical, Self::Variance, Self::Minform, Self::Shifted, Self::FullRange];

    pub fn name(self) -> &'static str {
        match self {
            Self::Classical => "classical",
            Self::Variance => "variance",
            Self::Minform => "minform",
            Self::Shifted => "shifted",
            Self::FullRange => "full_range",
        }
    }

    fn uses_floor(self) -> bool {
        matches!(self, Self::Variance | Self::Minform | Self::FullRange)
    }
}

impl fmt::Display for BandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BandKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s || (s == "full-range" && *k == Self::FullRange))
            .ok_or_else(|| invalid_input(format!("unknown band kind {s:?}")))
    }
}

/// Full description of a band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSpec {
    pub kind: BandKind,
    pub m: u64,
    pub delta: f64,
    pub consts: ConstantSet,
    /// Reject deltas under `c0 ln ln m / m` for the variance-type kinds.
    pub enforce_floor: bool,
}

impl BandSpec {
    pub fn new(kind: BandKind, m: u64, delta: f64, consts: ConstantSet) -> Result<Self> {
        let spec = Self { kind, m, delta, consts, enforce_floor: true };
        spec.validate()?;
        Ok(spec)
    }

    pub fn without_floor(mut self) -> Self {
        self.enforce_floor = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.consts.validate()?;
        if self.m == 0 {
            return Err(invalid_input("m must be at least 1"));
        }
        check_delta(self.delta)?;
        if self.enforce_floor && self.kind.uses_floor() {
            let floor = self.consts.delta_floor(self.m);
            if self.delta < floor - U_TOL {
                return Err(Error::InvalidDelta { delta: self.delta, reason: "below c0 ln ln m / m" });
            }
        }
        if self.kind == BandKind::FullRange {
            let dm = self.delta * self.m as f64;
            if dm < 10.0 {
                return Err(Error::DeltaMTooSmall(dm));
            }
        }
        Ok(())
    }

    /// Half-width of the band at F-value `u` in `[0, 1]`.
    ///
    /// The variance and min-form kinds fall back to the shifted width where
    /// their own statement does not apply.
    pub fn width_at(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(out_of_range(format!("u = {u} outside [0, 1]")));
        }
        let delta = self.delta;
        Ok(match self.kind {
            BandKind::Classical => delta.sqrt(),
            BandKind::Variance => {
                variance_width(u, delta, WeightMode::Variance).or_else(|_| shifted_width(u, delta))?
            }
            BandKind::Minform => {
                variance_width(u, delta, WeightMode::Minform).or_else(|_| shifted_width(u, delta))?
            }
            BandKind::Shifted => shifted_width(u, delta)?,
            BandKind::FullRange => full_range_width_for_variance(u * (1.0 - u), delta, self.m, &self.consts)?.width,
        })
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidDelta { delta, reason: "delta must be positive" });
    }
    if delta > 0.25 + U_TOL {
        return Err(Error::InvalidDelta { delta, reason: "delta must not exceed 1/4" });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalBand {
    pub halfwidth: f64,
    pub failure_bound: f64,
}

/// Massart-form DKW band: half-width `sqrt(delta)`, failure `2 exp(-2 delta m)`.
pub fn classical_band(delta: f64, m: u64) -> Result<ClassicalBand> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidDelta { delta, reason: "delta must be positive" });
    }
    if m == 0 {
        return Err(invalid_input("m must be at least 1"));
    }
    Ok(ClassicalBand {
        halfwidth: delta.sqrt(),
        failure_bound: (2.0 * (-2.0 * delta * m as f64).exp()).min(1.0),
    })
}

/// `sqrt(u (1-u)) sqrt(delta)` or `sqrt(delta min(u, 1-u))`.
pub fn variance_width(u: f64, delta: f64, mode: WeightMode) -> Result<f64> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidDelta { delta, reason: "delta must be positive" });
    }
    let scale = match mode {
        WeightMode::Variance => u * (1.0 - u),
        WeightMode::Minform => u.min(1.0 - u),
        WeightMode::Zm => return Err(invalid_input("the zm weight has no band width")),
    };
    if !(0.0..=1.0).contains(&u) || scale < delta - U_TOL {
        return Err(out_of_range(format!("u = {u} is outside the {mode:?} range for delta = {delta}")));
    }
    Ok((scale * delta).sqrt())
}

/// `delta + sqrt(u (1-u)) sqrt(delta)`, defined for every `u` in `[0, 1]`.
pub fn shifted_width(u: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if !(0.0..=1.0).contains(&u) {
        return Err(out_of_range(format!("u = {u} outside [0, 1]")));
    }
    Ok(delta + (u * (1.0 - u) * delta).sqrt())
}

/// Variance regimes of the full-range envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `s >= delta`
    Core,
    /// `delta / 10 < s < delta`
    Gap,
    /// `exp(-delta m) / (10 m) < s <= delta / 10`
    Log,
    /// `s <= exp(-delta m) / (10 m)`
    Tiny,
}

/// Regime of variance `s` for the given `delta` and `m`.
///
/// The tiny threshold is compared in log space because `exp(-delta m)`
/// underflows for realistic `delta m`.
pub fn classify_regime(s: f64, delta: f64, m: u64) -> Regime {
    if s >= delta {
        Regime::Core
    } else if s > delta / 10.0 {
        Regime::Gap
    } else if s > 0.0 && s.ln() > -delta * m as f64 - (10.0 * m as f64).ln() {
        Regime::Log
    } else {
        Regime::Tiny
    }
}

/// The regime's width formula before the `c2` multiplier.
pub fn regime_width(s: f64, delta: f64, regime: Regime) -> f64 {
    match regime {
        Regime::Core => (s * delta).sqrt(),
        Regime::Gap => delta + (s * delta).sqrt(),
        Regime::Log => delta / (delta / s).ln(),
        Regime::Tiny => s,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullRangeWidth {
    pub width: f64,
    pub regime: Regime,
}

/// Full-range envelope at F-value `u`.
pub fn full_range_width(u: f64, delta: f64, m: u64, consts: &ConstantSet) -> Result<FullRangeWidth> {
    if !(u > 0.0 && u < 1.0) {
        return Err(out_of_range(format!("u = {u} outside (0, 1)")));
    }
    full_range_width_for_variance(u * (1.0 - u), delta, m, consts)
}

/// Full-range envelope expressed through the variance `s = u (1 - u)`.
pub fn full_range_width_for_variance(s: f64, delta: f64, m: u64, consts: &ConstantSet) -> Result<FullRangeWidth> {
    check_delta(delta)?;
    if m == 0 {
        return Err(invalid_input("m must be at least 1"));
    }
    if !(0.0..=0.25 + U_TOL).contains(&s) {
        return Err(out_of_range(format!("variance {s} outside [0, 1/4]")));
    }
    let dm = delta * m as f64;
    if dm < 10.0 {
        return Err(Error::DeltaMTooSmall(dm));
    }
    let regime = classify_regime(s, delta, m);
    Ok(FullRangeWidth { width: consts.c2 * regime_width(s, delta, regime), regime })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaChoice {
    pub delta: f64,
    /// True when the `c0 ln ln m / m` floor, not the failure probability, set delta.
    pub floor_active: bool,
}

/// Smallest delta with `2 exp(-c1 delta m) <= failure_prob` that respects the floor.
pub fn delta_for_confidence(m: u64, failure_prob: f64, consts: &ConstantSet) -> Result<DeltaChoice> {
    consts.validate()?;
    if m == 0 {
        return Err(invalid_input("m must be at least 1"));
    }
    if !(failure_prob > 0.0 && failure_prob < 1.0) {
        return Err(invalid_input(format!("failure probability {failure_prob} outside (0, 1)")));
    }
    let from_prob = (2.0 / failure_prob).ln() / (consts.c1 * m as f64);
    let floor = consts.delta_floor(m);
    let choice = if floor > from_prob {
        DeltaChoice { delta: floor, floor_active: true }
    } else {
        DeltaChoice { delta: from_prob, floor_active: false }
    };
    if choice.delta > 0.25 {
        return Err(Error::DeltaInfeasible(choice.delta));
    }
    Ok(choice)
}

/// One row of a data band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandRow {
    pub t: f64,
    pub side: Side,
    pub f_m: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Band around `F_m`, one row per distinct observation and side.
///
/// When no model is given, widths that depend on `F(t)` use `F_m(t)` in its
/// place (for the full-range kind clamped to `[1/(2m), 1 - 1/(2m)]`, since
/// its width vanishes at 0 and 1). Lower and upper limits are then made
/// monotone, which keeps every interval around `F_m`.
pub fn data_band(sample: &SortedSample, spec: &BandSpec, model: Option<&DistributionModel>) -> Result<Vec<BandRow>> {
    spec.validate()?;
    if spec.m != sample.len() as u64 {
        return Err(invalid_input(format!("band spec m = {} but sample has {} values", spec.m, sample.len())));
    }
    let values = sample.values();
    let m = values.len() as f64;
    let mut rows = Vec::with_capacity(2 * values.len());
    let mut i = 0;
    while i < values.len() {
        let t = values[i];
        let mut j = i + 1;
        while j < values.len() && values[j] == t {
            j += 1;
        }
        for (side, count) in [(Side::LeftLimit, i), (Side::At, j)] {
            let f_m = count as f64 / m;
            let u = match model {
                Some(model) => model.cdf(t),
                None if spec.kind == BandKind::FullRange => f_m.clamp(0.5 / m, 1.0 - 0.5 / m),
                None => f_m,
            };
            let width = spec.width_at(u)?;
            rows.push(BandRow {
                t,
                side,
                f_m,
                lo: (f_m - width).clamp(0.0, 1.0),
                hi: (f_m + width).clamp(0.0, 1.0),
            });
        }
        i = j;
    }
    let mut run = 0.0f64;
    for row in rows.iter_mut() {
        run = run.max(row.lo);
        row.lo = run;
    }
    let mut run = 1.0f64;
    for row in rows.iter_mut().rev() {
        run = run.min(row.hi);
        row.hi = run;
    }
    Ok(rows)
}

/// One row of a plot-ready width table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub u: f64,
    pub width: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regime: Option<Regime>,
}

/// Band half-widths on the grid `u = i / points`, `i = 0..=points`.
pub fn envelope(spec: &BandSpec, points: usize) -> Result<Vec<EnvelopeRow>> {
    spec.validate()?;
    if points == 0 {
        return Err(invalid_input("envelope needs at least one grid interval"));
    }
    (0..=points)
        .map(|i| {
            let u = i as f64 / points as f64;
            let regime = (spec.kind == BandKind::FullRange).then(|| classify_regime(u * (1.0 - u), spec.delta, spec.m));
            Ok(EnvelopeRow { u, width: spec.width_at(u)?, regime })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    /// `u` in `(0, 1/2]` with `u (1 - u) = s`.
    fn u_for_variance(s: f64) -> f64 {
        2.0 * s / (1.0 + (1.0 - 4.0 * s).sqrt())
    }

    #[test]
    fn classical_examples() {
        let b = classical_band(0.01, 500).unwrap();
        assert!(close(b.halfwidth, 0.1, 1e-15));
        assert!(close(b.failure_bound, 9.07999e-5, 1e-5));
        assert_eq!(classical_band(0.01, 1).unwrap().failure_bound, 1.0);
        let b = classical_band(0.25, 100).unwrap();
        assert_eq!(b.halfwidth, 0.5);
        assert!(close(b.failure_bound, 2.0 * (-50.0f64).exp(), 1e-15));
        assert!(matches!(classical_band(0.0, 10), Err(Error::InvalidDelta { .. })));
        assert!(matches!(classical_band(-1.0, 10), Err(Error::InvalidDelta { .. })));
    }

    #[test]
    fn classical_failure_decreases_until_clipped() {
        let mut prev = 2.0;
        for m in 1..200 {
            let f = classical_band(0.05, m).unwrap().failure_bound;
            assert!(f < prev || f == 1.0);
            prev = f;
        }
        let mut prev = 2.0;
        for i in 1..100 {
            let f = classical_band(i as f64 / 100.0, 50).unwrap().failure_bound;
            assert!(f < prev || f == 1.0);
            prev = f;
        }
    }

    #[test]
    fn variance_width_examples() {
        assert!(close(variance_width(0.5, 0.04, WeightMode::Variance).unwrap(), 0.1, 1e-15));
        assert!(close(variance_width(0.5, 0.04, WeightMode::Minform).unwrap(), 0.141421, 1e-6));
        assert!(matches!(variance_width(0.001, 0.04, WeightMode::Variance), Err(Error::OutOfRange(_))));
        assert!(matches!(variance_width(0.03, 0.04, WeightMode::Minform), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn shifted_width_examples() {
        assert!(close(shifted_width(0.5, 0.04).unwrap(), 0.14, 1e-15));
        assert_eq!(shifted_width(0.0, 0.04).unwrap(), 0.04);
        assert_eq!(shifted_width(1.0, 0.01).unwrap(), 0.01);
        assert!(matches!(shifted_width(0.5, 0.3), Err(Error::InvalidDelta { .. })));
    }

    #[test]
    fn full_range_examples() {
        let c = ConstantSet::new(4.0, 1.0, 1.0).unwrap();
        let w = full_range_width(u_for_variance(1e-6), 0.01, 10_000, &c).unwrap();
        assert_eq!(w.regime, Regime::Log);
        assert!(close(w.width, 1.08574e-3, 1e-5), "{}", w.width);
        let w = full_range_width(0.5, 0.04, 1000, &c).unwrap();
        assert_eq!(w.regime, Regime::Core);
        assert!(close(w.width, 0.1, 1e-15));
        let w = full_range_width(1e-300, 0.05, 1000, &c).unwrap();
        assert_eq!(w.regime, Regime::Tiny);
        assert!(close(w.width, 1e-300, 1e-12));
        let w = full_range_width(u_for_variance(0.005), 0.01, 10_000, &c).unwrap();
        assert_eq!(w.regime, Regime::Gap);
        assert!(matches!(full_range_width(0.5, 0.01, 100, &c), Err(Error::DeltaMTooSmall(_))));
        assert!(matches!(full_range_width(0.5, 0.5, 100, &c), Err(Error::InvalidDelta { .. })));
    }

    #[test]
    fn log_regime_never_below_trivial_bound() {
        let c = ConstantSet::new(4.0, 1.0, 1.0).unwrap();
        let delta = 0.01;
        for k in 0..400 {
            let s = delta / 10.0 * 10f64.powf(-k as f64 / 10.0);
            let w = full_range_width_for_variance(s, delta, 10_000, &c).unwrap();
            if w.regime == Regime::Log {
                assert!(w.width >= s, "s = {s}");
            }
        }
    }

    #[test]
    fn widths_are_symmetric_and_monotone_in_delta() {
        let c = ConstantSet::new(4.0, 1.0, 1.0).unwrap();
        let deltas = [0.01, 0.02, 0.05, 0.1, 0.2, 0.25];
        for kind in BandKind::ALL {
            for i in 0..=200 {
                let u = i as f64 / 200.0;
                let mut prev = 0.0;
                for &delta in &deltas {
                    let spec = BandSpec::new(kind, 1000, delta, c.clone()).unwrap().without_floor();
                    let w = spec.width_at(u).unwrap();
                    let w_mirror = spec.width_at(1.0 - u).unwrap();
                    assert!(close(w, w_mirror, 1e-9), "{kind} u={u} {w} {w_mirror}");
                    if kind != BandKind::FullRange && kind != BandKind::Variance && kind != BandKind::Minform {
                        assert!(w >= prev, "{kind} not monotone at u={u}");
                    }
                    prev = w;
                }
            }
        }
        // Within their own validity range the variance forms are monotone too.
        for i in 1..200 {
            let u = i as f64 / 200.0;
            for mode in [WeightMode::Variance, WeightMode::Minform] {
                let mut prev = 0.0;
                for &delta in &deltas {
                    if let Ok(w) = variance_width(u, delta, mode) {
                        assert!(w >= prev);
                        prev = w;
                    }
                }
            }
        }
    }

    #[test]
    fn delta_for_confidence_examples() {
        let c = ConstantSet::new(4.0, 1.0, 1.0).unwrap();
        let d = delta_for_confidence(1000, 0.01, &c).unwrap();
        assert!(d.floor_active);
        assert!(close(d.delta, 0.0077306, 1e-5));

        let d = delta_for_confidence(1000, 2.0 * (-8.0f64).exp(), &c).unwrap();
        assert!(!d.floor_active);
        assert!(close(d.delta, 0.008, 1e-12));

        match delta_for_confidence(10, 1e-6, &c) {
            Err(Error::DeltaInfeasible(d)) => assert!(close(d, 1.45087, 1e-5)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(delta_for_confidence(1000, 1.5, &c), Err(Error::InvalidInput(_))));
        assert!(matches!(delta_for_confidence(0, 0.1, &c), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn band_spec_enforces_floor() {
        let c = ConstantSet::default();
        assert!(matches!(
            BandSpec::new(BandKind::Variance, 1000, 0.005, c.clone()),
            Err(Error::InvalidDelta { .. })
        ));
        assert!(BandSpec::new(BandKind::Classical, 1000, 0.005, c.clone()).is_ok());
        assert!(BandSpec::new(BandKind::Variance, 1000, 0.008, c.clone()).is_ok());
        assert!(BandSpec::new(BandKind::Variance, 10, 0.01, c).is_ok());
    }

    #[test]
    fn constants_must_be_positive() {
        assert!(matches!(ConstantSet::new(0.0, 1.0, 1.0), Err(Error::InvalidInput(_))));
        assert!(matches!(ConstantSet::new(1.0, -1.0, 1.0), Err(Error::InvalidInput(_))));
        assert!(matches!(ConstantSet::new(1.0, 1.0, f64::NAN), Err(Error::InvalidInput(_))));
        assert!(ConstantSet::from_json(r#"{"c0":1,"c1":0,"c2":1,"source":{"kind":"default"}}"#).is_err());
        let c = ConstantSet::calibrated();
        assert!(matches!(c.source, ConstantSource::Calibrated { .. }));
        assert_eq!(ConstantSet::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn data_band_examples() {
        let c = ConstantSet::default();
        let s = SortedSample::from_slice(&[0.5]).unwrap();
        let spec = BandSpec::new(BandKind::Classical, 1, 0.04, c.clone()).unwrap();
        let rows = data_band(&s, &spec, None).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!((rows[0].side, rows[0].lo), (Side::LeftLimit, 0.0));
        assert!(close(rows[0].hi, 0.2, 1e-15));
        assert_eq!((rows[1].side, rows[1].hi), (Side::At, 1.0));
        assert!(close(rows[1].lo, 0.8, 1e-15));

        let s = SortedSample::from_slice(&[0.25, 0.75]).unwrap();
        let spec = BandSpec::new(BandKind::Shifted, 2, 0.04, c.clone()).unwrap();
        let rows = data_band(&s, &spec, None).unwrap();
        let at = rows.iter().find(|r| r.t == 0.25 && r.side == Side::At).unwrap();
        assert_eq!(at.f_m, 0.5);
        assert!(close(at.lo, 0.36, 1e-14) && close(at.hi, 0.64, 1e-14));

        let bad = ConstantSet { c0: -1.0, ..c };
        let spec = BandSpec { kind: BandKind::Shifted, m: 2, delta: 0.04, consts: bad, enforce_floor: true };
        assert!(matches!(data_band(&s, &spec, None), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn data_band_rows_contain_ecdf_and_are_monotone() {
        let values: Vec<f64> = (0..97).map(|i| ((i * 37) % 97) as f64 / 97.0 + 0.001).collect();
        let s = SortedSample::from_slice(&values).unwrap();
        let c = ConstantSet::default();
        for kind in BandKind::ALL {
            let spec = BandSpec::new(kind, 97, 0.15, c.clone()).unwrap();
            for model in [None, Some(&DistributionModel::Uniform01)] {
                let rows = data_band(&s, &spec, model).unwrap();
                for w in rows.windows(2) {
                    assert!(w[0].lo <= w[1].lo && w[0].hi <= w[1].hi, "{kind}");
                }
                for r in &rows {
                    assert!(0.0 <= r.lo && r.lo <= r.f_m && r.f_m <= r.hi && r.hi <= 1.0, "{kind}: {r:?}");
                }
            }
        }
    }

    #[test]
    fn envelope_has_requested_grid() {
        let spec = BandSpec::new(BandKind::FullRange, 10_000, 0.01, ConstantSet::default()).unwrap();
        let rows = envelope(&spec, 100).unwrap();
        assert_eq!(rows.len(), 101);
        assert_eq!(rows[50].regime, Some(Regime::Core));
        assert_eq!(rows[0].regime, Some(Regime::Tiny));
        assert_eq!(rows[0].width, 0.0);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in BandKind::ALL {
            assert_eq!(k.name().parse::<BandKind>().unwrap(), k);
        }
        assert!("fancy".parse::<BandKind>().is_err());
    }
}
