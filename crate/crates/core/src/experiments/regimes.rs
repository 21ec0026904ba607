//! Exact sweeps of the fixed-`t` probe constants.
//!
//! Nothing here is random: every cell is an exact binomial tail, so a sweep
//! is a deterministic search over the probe grid.

use serde::{Deserialize, Serialize};

use crate::binom::{
    bennett_log_bound, deviation_log_prob, fixed_t_lower_check, no_cancel_check, NoCancelDirection,
    ProbeConstants, RegimeCheckResult, TailQuery, TailSide,
};
use crate::error::{invalid_input, Result};
use crate::U_TOL;

/// Exponent constants tried by the probe sweeps.
pub const PROBE_C1_SWEEP: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
/// Envelope multipliers tried by the small-variance sweeps.
pub const PROBE_C2_SWEEP: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeCell {
    pub m: u64,
    pub p: f64,
    pub delta: f64,
}

/// One probe pair evaluated on every cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub consts: ProbeConstants,
    pub satisfied: usize,
    pub cells: usize,
    pub results: Vec<RegimeCheckResult>,
}

impl ProbeRow {
    pub fn all_satisfied(&self) -> bool {
        self.satisfied == self.cells
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSweep {
    pub check: String,
    pub grid: Vec<ProbeCell>,
    pub rows: Vec<ProbeRow>,
    /// First pair, in sweep order (c2 then c1 ascending), satisfied on every cell.
    pub admissible: Option<ProbeConstants>,
}

fn sweep<F>(check: &str, grid: Vec<ProbeCell>, pairs: &[ProbeConstants], eval: F) -> Result<ProbeSweep>
where
    F: Fn(&ProbeCell, ProbeConstants) -> Result<RegimeCheckResult>,
{
    if grid.is_empty() {
        return Err(invalid_input("probe grid is empty"));
    }
    let mut rows = Vec::with_capacity(pairs.len());
    for &consts in pairs {
        let results = grid.iter().map(|cell| eval(cell, consts)).collect::<Result<Vec<_>>>()?;
        let satisfied = results.iter().filter(|r| r.satisfied).count();
        rows.push(ProbeRow { consts, satisfied, cells: results.len(), results });
    }
    let admissible = rows.iter().find(|r| r.all_satisfied()).map(|r| r.consts);
    Ok(ProbeSweep { check: check.to_string(), grid, rows, admissible })
}

/// Sweeps c1 for the fixed-`t` lower check at multiplier `c2`.
///
/// The grid is every `(m, delta = k / m, p)` with `delta <= 1/4` and
/// `p (1 - p) >= delta`.
pub fn fixed_t_sweep(m_grid: &[u64], delta_times_m: &[f64], ps: &[f64], c2: f64, min_delta_m: f64) -> Result<ProbeSweep> {
    let mut grid = Vec::new();
    for &m in m_grid {
        for &k in delta_times_m {
            let delta = k / m as f64;
            if !(delta > 0.0 && delta <= 0.25) {
                continue;
            }
            for &p in ps {
                if p * (1.0 - p) >= delta - U_TOL {
                    grid.push(ProbeCell { m, p, delta });
                }
            }
        }
    }
    let pairs: Vec<_> = PROBE_C1_SWEEP.iter().map(|&c1| ProbeConstants { c1, c2 }).collect();
    sweep("fixed_t_lower", grid, &pairs, |cell, consts| {
        fixed_t_lower_check(cell.m, cell.p, cell.delta, consts, min_delta_m)
    })
}

/// Sweeps (c2, c1) for one direction of the small-variance check at fixed `m`, `delta`.
pub fn no_cancel_sweep(m: u64, delta: f64, ps: &[f64], direction: NoCancelDirection) -> Result<ProbeSweep> {
    let grid = ps.iter().map(|&p| ProbeCell { m, p, delta }).collect();
    let pairs: Vec<_> = PROBE_C2_SWEEP
        .iter()
        .flat_map(|&c2| PROBE_C1_SWEEP.iter().map(move |&c1| ProbeConstants { c1, c2 }))
        .collect();
    let name = match direction {
        NoCancelDirection::UpperThm51 => "no_cancel_upper",
        NoCancelDirection::LowerProp52 => "no_cancel_lower",
    };
    sweep(name, grid, &pairs, |cell, consts| no_cancel_check(cell.m, cell.p, cell.delta, consts, direction))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BennettCell {
    pub m: u64,
    pub p: f64,
    pub eps: f64,
    pub log_exact: f64,
    pub log_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BennettReport {
    pub cells: Vec<BennettCell>,
    pub violations: usize,
}

/// Compares the exact two-sided tail with `min(1, bennett_bound)` in log space
/// on the product grid. Equality up to `1e-12` in the logarithm counts as
/// domination, which only matters where both sides are 1.
pub fn bennett_grid(m_grid: &[u64], ps: &[f64], epss: &[f64]) -> Result<BennettReport> {
    let mut cells = Vec::with_capacity(m_grid.len() * ps.len() * epss.len());
    for &m in m_grid {
        for &p in ps {
            for &eps in epss {
                let log_exact = deviation_log_prob(&TailQuery::new(m, p, eps, TailSide::TwoSided))?;
                let log_bound = bennett_log_bound(m, p, eps)?.min(0.0);
                cells.push(BennettCell { m, p, eps, log_exact, log_bound });
            }
        }
    }
    if cells.is_empty() {
        return Err(invalid_input("Bennett grid is empty"));
    }
    let violations = cells.iter().filter(|c| c.log_exact > c.log_bound + 1e-12).count();
    Ok(BennettReport { cells, violations })
}
