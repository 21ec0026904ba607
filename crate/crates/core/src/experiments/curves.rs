use serde::{Deserialize, Serialize};

use super::{cell_seed, draw_sample};
use crate::bands::ConstantSet;
use crate::ecdf::{weighted_sup_u, RangeMode, WeightMode};
use crate::error::{invalid_input, Result};
use crate::loglog;
use crate::model::DistributionModel;
use crate::rademacher::prefix_max_at;
use crate::rng::{run_chunked, trial_rng};
use crate::stats::mean_and_std_error;

/// One point of a Monte Carlo curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub estimate: f64,
    pub std_error: f64,
    /// `estimate / sqrt(ln ln x)` where the curve reports it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
}

/// How `delta` depends on `m` along a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "c", rename_all = "snake_case")]
pub enum DeltaRule {
    /// `delta = c / m`
    FixedOverM(f64),
    /// `delta = c ln ln m / m`
    LogLog(f64),
}

impl DeltaRule {
    pub fn delta(self, m: u64) -> f64 {
        let mf = m as f64;
        match self {
            Self::FixedOverM(c) => c / mf,
            Self::LogLog(c) => c * loglog(mf) / mf,
        }
    }
}

/// Per-trial values of `stat` on samples of size `m`, in trial order.
fn sample_values<F>(m: u64, trials: u64, seed: u64, stat: F) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let uniform = DistributionModel::Uniform01;
    run_chunked(trials, |range| {
        let mut buf = vec![0.0; m as usize];
        range
            .map(|t| {
                draw_sample(&mut trial_rng(seed, t), &uniform, &mut buf);
                stat(&buf)
            })
            .collect::<Vec<_>>()
    })
    .concat()
}

/// Monte Carlo mean of `sup_{u in [2 delta, 1/2]} |F_m - u| / sqrt(u delta)`
/// for each `m`, with `delta` from the rule.
pub fn zm_curve(m_grid: &[u64], rule: DeltaRule, trials: u64, seed: u64) -> Result<Vec<CurvePoint>> {
    if trials == 0 {
        return Err(invalid_input("trials must be at least 1"));
    }
    let mut points = Vec::with_capacity(m_grid.len());
    for &m in m_grid {
        if m == 0 {
            return Err(invalid_input("m must be at least 1"));
        }
        let delta = rule.delta(m);
        let (lo, hi) = RangeMode::FInTwoDeltaHalf.bounds(delta)?;
        let scale = 1.0 / delta.sqrt();
        let values = sample_values(m, trials, cell_seed(seed, m), |us| {
            weighted_sup_u(us, lo, hi, WeightMode::Zm).value * scale
        });
        let est = mean_and_std_error(&values);
        points.push(CurvePoint { x: m as f64, estimate: est.mean, std_error: est.std_error, ratio: None });
    }
    Ok(points)
}

/// Monte Carlo `E max_{l <= r} |S_l| / sqrt(l)` for each `r`, with the ratio
/// to `sqrt(ln ln r)`.
///
/// All grid points are read off the same simulated paths, so the estimates
/// are nondecreasing in `r`.
pub fn lil_curve(r_grid: &[u64], trials: u64, seed: u64) -> Result<Vec<CurvePoint>> {
    if trials == 0 {
        return Err(invalid_input("trials must be at least 1"));
    }
    if r_grid.is_empty() {
        return Err(invalid_input("r grid is empty"));
    }
    if let Some(&r) = r_grid.iter().find(|&&r| r < 16) {
        return Err(invalid_input(format!("r = {r} below 16")));
    }
    let mut cps = r_grid.to_vec();
    cps.sort_unstable();
    cps.dedup();
    let k = cps.len();
    let flat = run_chunked(trials, |range| {
        let mut out = vec![0.0; k];
        let mut vals = Vec::with_capacity((range.end - range.start) as usize * k);
        for t in range {
            prefix_max_at(&mut trial_rng(seed, t), &cps, &mut out);
            vals.extend_from_slice(&out);
        }
        vals
    })
    .concat();
    let per_cp: Vec<CurvePoint> = (0..k)
        .map(|j| {
            let column: Vec<f64> = flat.iter().skip(j).step_by(k).copied().collect();
            let est = mean_and_std_error(&column);
            let x = cps[j] as f64;
            CurvePoint { x, estimate: est.mean, std_error: est.std_error, ratio: Some(est.mean / loglog(x).sqrt()) }
        })
        .collect();
    Ok(r_grid
        .iter()
        .map(|r| per_cp[cps.binary_search(r).expect("grid point present")])
        .collect())
}

/// Mean of `sup_{u (1-u) >= delta} |F_m - u| / (sqrt(u (1-u)) sqrt(delta))`
/// against the bound `1 + 2 / c1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectationReport {
    pub m: u64,
    pub delta: f64,
    pub trials: u64,
    pub seed: u64,
    pub mean_ratio: f64,
    pub std_error: f64,
    pub bound: f64,
}

pub fn expectation_check(m: u64, delta: f64, trials: u64, seed: u64, consts: &ConstantSet) -> Result<ExpectationReport> {
    if trials == 0 || m == 0 {
        return Err(invalid_input("trials and m must be at least 1"));
    }
    consts.validate()?;
    if delta < 1.0 / m as f64 {
        return Err(invalid_input(format!("delta = {delta} below 1/m")));
    }
    let (lo, hi) = RangeMode::Sigma2GeDelta.bounds(delta)?;
    let scale = 1.0 / delta.sqrt();
    let values = sample_values(m, trials, seed, |us| weighted_sup_u(us, lo, hi, WeightMode::Variance).value * scale);
    let est = mean_and_std_error(&values);
    Ok(ExpectationReport {
        m,
        delta,
        trials,
        seed,
        mean_ratio: est.mean,
        std_error: est.std_error,
        bound: 1.0 + 2.0 / consts.c1,
    })
}
