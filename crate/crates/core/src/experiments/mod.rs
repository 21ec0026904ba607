//! Seeded, parallel Monte Carlo experiments.
//!
//! Trial `i` of an experiment with master seed `s` draws from
//! [`trial_rng(s, i)`](crate::rng::trial_rng). Trials run in fixed-size
//! chunks whose results are reduced in trial order, so every report depends
//! on the seed alone and not on the number of worker threads.

mod calibrate;
mod curves;
mod regimes;

use serde::{Deserialize, Serialize};

use crate::bands::{BandKind, BandSpec, ConstantSet};
use crate::ecdf::{nested_weighted_sq_sups_u, sup_deviation_u, RangeMode, WeightMode};
use crate::error::{invalid_input, Result};
use crate::model::DistributionModel;
use crate::rng::{mix, run_chunked, sorted_uniforms, trial_rng};
use crate::stats::{wilson_interval, Z95};

pub use calibrate::{calibrate_constants, CalibrationCell, CalibrationResult, TargetRule, C0_SWEEP, C1_SWEEP};
pub use curves::{expectation_check, lil_curve, zm_curve, CurvePoint, DeltaRule, ExpectationReport};
pub use regimes::{
    bennett_grid, fixed_t_sweep, no_cancel_sweep, BennettCell, BennettReport, ProbeCell, ProbeRow, ProbeSweep,
    PROBE_C1_SWEEP, PROBE_C2_SWEEP,
};

/// Outcome of a coverage experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub band_kind: BandKind,
    pub m: u64,
    pub delta: f64,
    pub model: DistributionModel,
    pub trials: u64,
    pub violations: u64,
    pub rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub master_seed: u64,
}

impl CoverageReport {
    fn new(band_kind: BandKind, m: u64, delta: f64, model: DistributionModel, trials: u64, violations: u64, seed: u64) -> Self {
        let (wilson_lo, wilson_hi) = wilson_interval(violations, trials, Z95);
        Self {
            band_kind,
            m,
            delta,
            model,
            trials,
            violations,
            rate: violations as f64 / trials as f64,
            wilson_lo,
            wilson_hi,
            master_seed: seed,
        }
    }

    /// Upper half-width `wilson_hi - rate`.
    pub fn wilson_half_width(&self) -> f64 {
        self.wilson_hi - self.rate
    }
}

/// Fills `buf` with a sorted uniform-space sample for `model`.
///
/// Non-uniform models go through the quantile function and back through the
/// distribution function, exercising the same path a user sample takes.
pub(crate) fn draw_sample(rng: &mut crate::rng::TrialRng, model: &DistributionModel, buf: &mut [f64]) {
    sorted_uniforms(rng, buf);
    if !model.is_uniform() {
        for u in buf.iter_mut() {
            *u = model.cdf(model.quantile(*u));
        }
        buf.sort_unstable_by(f64::total_cmp);
    }
}

/// Strict exceedance test of one band kind for several deltas on one sample.
///
/// `deltas` must be ascending. Returns one flag per delta.
pub(crate) struct Exceedance {
    kind: BandKind,
    deltas: Vec<f64>,
    ranges: Vec<(f64, f64)>,
}

impl Exceedance {
    pub(crate) fn new(kind: BandKind, m: u64, deltas: &[f64]) -> Result<Self> {
        if deltas.is_empty() {
            return Err(invalid_input("at least one delta is required"));
        }
        if !deltas.windows(2).all(|w| w[0] <= w[1]) {
            return Err(invalid_input("deltas must be ascending"));
        }
        let mut ranges = Vec::with_capacity(deltas.len());
        for &delta in deltas {
            let spec = BandSpec { kind, m, delta, consts: ConstantSet::default(), enforce_floor: false };
            spec.validate()?;
            match kind {
                BandKind::Classical | BandKind::Shifted => ranges.push((0.0, 1.0)),
                BandKind::Variance | BandKind::Minform => ranges.push(RangeMode::Sigma2GeDelta.bounds(delta)?),
                BandKind::FullRange => {
                    return Err(invalid_input("coverage of the full-range envelope is not simulated"));
                }
            }
        }
        Ok(Self { kind, deltas: deltas.to_vec(), ranges })
    }

    pub(crate) fn flags(&self, us: &[f64], out: &mut [bool]) {
        match self.kind {
            BandKind::Classical => {
                let d = sup_deviation_u(us).value;
                for (f, &delta) in out.iter_mut().zip(&self.deltas) {
                    *f = d > delta.sqrt();
                }
            }
            BandKind::Variance | BandKind::Minform => {
                let weight = if self.kind == BandKind::Variance { WeightMode::Variance } else { WeightMode::Minform };
                let sq = nested_weighted_sq_sups_u(us, &self.ranges, weight);
                for ((f, &q), &delta) in out.iter_mut().zip(&sq).zip(&self.deltas) {
                    *f = q > delta;
                }
            }
            BandKind::Shifted => {
                for (f, &delta) in out.iter_mut().zip(&self.deltas) {
                    *f = shifted_excess(us, delta) > delta;
                }
            }
            BandKind::FullRange => unreachable!("rejected in Exceedance::new"),
        }
    }
}

/// `sup_u |F_m(u) - u| - sqrt(delta u (1 - u))`.
///
/// The function is convex between order statistics, so the two adjacent
/// levels at each order statistic and the ends `u = 0, 1` suffice.
fn shifted_excess(us: &[f64], delta: f64) -> f64 {
    let inv_m = 1.0 / us.len() as f64;
    let root = delta.sqrt();
    let mut best = 0.0f64;
    for (i, &u) in us.iter().enumerate() {
        let k = i as f64;
        let d = (u - k * inv_m).max((k + 1.0) * inv_m - u);
        best = best.max(d - root * (u * (1.0 - u)).sqrt());
    }
    best
}

/// Violation counts of one band kind at several ascending deltas, from the
/// same simulated samples.
pub fn coverage_experiment_multi(
    kind: BandKind,
    m: u64,
    deltas: &[f64],
    model: &DistributionModel,
    trials: u64,
    master_seed: u64,
) -> Result<Vec<CoverageReport>> {
    if trials == 0 {
        return Err(invalid_input("trials must be at least 1"));
    }
    if m == 0 {
        return Err(invalid_input("m must be at least 1"));
    }
    let test = Exceedance::new(kind, m, deltas)?;
    let counts = run_chunked(trials, |range| {
        let mut buf = vec![0.0; m as usize];
        let mut flags = vec![false; deltas.len()];
        let mut counts = vec![0u64; deltas.len()];
        for t in range {
            draw_sample(&mut trial_rng(master_seed, t), model, &mut buf);
            test.flags(&buf, &mut flags);
            for (c, &f) in counts.iter_mut().zip(&flags) {
                *c += u64::from(f);
            }
        }
        counts
    })
    .into_iter()
    .fold(vec![0u64; deltas.len()], |mut acc, part| {
        acc.iter_mut().zip(part).for_each(|(a, p)| *a += p);
        acc
    });
    Ok(deltas
        .iter()
        .zip(counts)
        .map(|(&delta, v)| CoverageReport::new(kind, m, delta, *model, trials, v, master_seed))
        .collect())
}

/// Fraction of simulated samples on which the band fails somewhere.
///
/// Violation means the statistic strictly exceeds the band; equality counts
/// as covered.
pub fn coverage_experiment(
    kind: BandKind,
    m: u64,
    delta: f64,
    model: &DistributionModel,
    trials: u64,
    master_seed: u64,
) -> Result<CoverageReport> {
    Ok(coverage_experiment_multi(kind, m, &[delta], model, trials, master_seed)?.remove(0))
}

/// Master seed of the cell for sample size `m` in a multi-`m` experiment.
pub fn cell_seed(master_seed: u64, m: u64) -> u64 {
    mix(master_seed, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecdf::weighted_sup_u;
    use crate::Error;

    const UNIFORM: DistributionModel = DistributionModel::Uniform01;

    #[test]
    fn single_observation_always_violates_classical() {
        let r = coverage_experiment(BandKind::Classical, 1, 0.09, &UNIFORM, 500, 3).unwrap();
        assert_eq!(r.rate, 1.0);
        let e = DistributionModel::exponential(2.0).unwrap();
        assert_eq!(coverage_experiment(BandKind::Classical, 1, 0.09, &e, 50, 3).unwrap().rate, 1.0);
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(
            coverage_experiment(BandKind::Variance, 16, 0.3, &UNIFORM, 10, 0),
            Err(Error::InvalidDelta { .. })
        ));
        assert!(coverage_experiment(BandKind::Classical, 10, 0.1, &UNIFORM, 0, 0).is_err());
        assert!(coverage_experiment(BandKind::FullRange, 1000, 0.1, &UNIFORM, 10, 0).is_err());
    }

    #[test]
    fn report_invariants() {
        let r = coverage_experiment(BandKind::Variance, 200, 0.05, &UNIFORM, 3000, 9).unwrap();
        assert!(r.violations <= r.trials);
        assert_eq!(r.rate, r.violations as f64 / r.trials as f64);
        assert!(r.wilson_lo <= r.rate && r.rate <= r.wilson_hi);
    }

    #[test]
    fn nested_scan_matches_weighted_sup() {
        let deltas = [0.001, 0.01, 0.05, 0.2, 0.25];
        let ranges: Vec<_> = deltas.iter().map(|&d| RangeMode::Sigma2GeDelta.bounds(d).unwrap()).collect();
        let mut buf = vec![0.0; 300];
        for t in 0..300 {
            sorted_uniforms(&mut trial_rng(21, t), &mut buf);
            for weight in [WeightMode::Variance, WeightMode::Minform] {
                let sq = nested_weighted_sq_sups_u(&buf, &ranges, weight);
                for (q, &(lo, hi)) in sq.iter().zip(&ranges) {
                    let v = weighted_sup_u(&buf, lo, hi, weight).value;
                    assert!((q.sqrt() - v).abs() <= 1e-12 * v.max(1.0), "{t}: {} vs {v}", q.sqrt());
                }
            }
        }
    }

    #[test]
    fn shifted_excess_matches_dense_grid() {
        let mut buf = vec![0.0; 20];
        for t in 0..50 {
            sorted_uniforms(&mut trial_rng(4, t), &mut buf);
            let exact = shifted_excess(&buf, 0.04);
            let mut dense = 0.0f64;
            let n = 200_000;
            for i in 0..=n {
                let u = i as f64 / n as f64;
                let at = buf.partition_point(|&v| v <= u) as f64 / 20.0;
                let below = buf.partition_point(|&v| v < u) as f64 / 20.0;
                let w = 0.2 * (u * (1.0 - u)).sqrt();
                dense = dense.max((at - u).abs() - w).max((below - u).abs() - w);
            }
            assert!(exact >= dense - 1e-12 && exact - dense < 1e-4, "{exact} vs {dense}");
        }
    }

    #[test]
    fn multi_delta_matches_single_runs() {
        let deltas = [0.02, 0.05, 0.1];
        let multi = coverage_experiment_multi(BandKind::Variance, 100, &deltas, &UNIFORM, 2000, 5).unwrap();
        for (r, &d) in multi.iter().zip(&deltas) {
            let single = coverage_experiment(BandKind::Variance, 100, d, &UNIFORM, 2000, 5).unwrap();
            assert_eq!(r, &single);
        }
    }
}
