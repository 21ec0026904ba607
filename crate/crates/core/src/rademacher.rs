//! Normalized Rademacher prefix-sum maxima, by exact enumeration and by
//! Monte Carlo.
//!
//! Sign paths are read from 64-bit words, least significant bit first, with
//! a set bit meaning `+1`.

use rand::{Rng, RngCore};
use rand_distr::Binomial;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, out_of_range, Error, Result};
use crate::loglog;
use crate::rng::{run_chunked, trial_rng};
use crate::stats::{mean_and_std_error, wilson_interval, CompensatedSum, Z95};

/// Largest path length enumerated exactly.
pub const MAX_EXACT_LEN: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Mc,
}

/// An expectation or probability together with its Monte Carlo error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxStatResult {
    pub estimate: f64,
    /// Zero in exact mode.
    pub std_error: f64,
    pub mode: Mode,
    /// Number of simulated paths, or enumerated paths in exact mode.
    pub trials: u64,
    pub seed: u64,
}

impl MaxStatResult {
    fn exact(estimate: f64, paths: u64) -> Self {
        Self { estimate, std_error: 0.0, mode: Mode::Exact, trials: paths, seed: 0 }
    }
}

/// `max_{l <= r} |S_l| / sqrt(l)` for the given signs.
pub fn max_norm_prefix(signs: &[i8], r: usize) -> Result<f64> {
    if r == 0 || r > signs.len() {
        return Err(invalid_input(format!("r = {r} outside 1..={}", signs.len())));
    }
    let mut s = 0i64;
    let mut best = 0.0f64;
    for (i, &e) in signs[..r].iter().enumerate() {
        if e != 1 && e != -1 {
            return Err(invalid_input(format!("sign {e} at position {i} is not +-1")));
        }
        s += e as i64;
        best = best.max(s.unsigned_abs() as f64 / ((i + 1) as f64).sqrt());
    }
    Ok(best)
}

/// Draws one sign path and records the running maximum of `|S_l| / sqrt(l)`
/// at each of the increasing `checkpoints`.
///
/// Signs are consumed in words of up to 64 steps that never straddle a
/// checkpoint. A word whose steps cannot raise the running maximum is
/// applied with a single popcount.
pub fn prefix_max_at<R: RngCore + ?Sized>(rng: &mut R, checkpoints: &[u64], out: &mut [f64]) {
    debug_assert_eq!(checkpoints.len(), out.len());
    let (mut l, mut s, mut best) = (0u64, 0i64, 0.0f64);
    for (slot, &cp) in out.iter_mut().zip(checkpoints) {
        while l < cp {
            let k = (cp - l).min(64);
            let word = rng.next_u64();
            let bits = if k == 64 { word } else { word & ((1u64 << k) - 1) };
            let reach = (s.unsigned_abs() + k) as f64 / ((l + 1) as f64).sqrt();
            if reach <= best {
                s += 2 * bits.count_ones() as i64 - k as i64;
                l += k;
            } else {
                for j in 0..k {
                    s += if (bits >> j) & 1 == 1 { 1 } else { -1 };
                    l += 1;
                    best = best.max(s.unsigned_abs() as f64 / (l as f64).sqrt());
                }
            }
        }
        *slot = best;
    }
}

fn exact_expected_max(r: u32) -> f64 {
    let roots: Vec<f64> = (0..=r).map(|l| (l as f64).sqrt()).collect();
    let mut acc = CompensatedSum::new();
    // Depth-first over the path tree; a subtree whose reachable values cannot
    // beat the running maximum contributes that maximum once per leaf.
    fn walk(l: u32, s: i64, best: f64, r: u32, roots: &[f64], acc: &mut CompensatedSum) {
        if l == r {
            acc.add(best);
            return;
        }
        let rem = (r - l) as u64;
        if (s.unsigned_abs() + rem) as f64 / roots[l as usize + 1] <= best {
            acc.add(best * (1u64 << rem) as f64);
            return;
        }
        for step in [1i64, -1] {
            let s2 = s + step;
            let v = s2.unsigned_abs() as f64 / roots[l as usize + 1];
            walk(l + 1, s2, best.max(v), r, roots, acc);
        }
    }
    // The statistic is invariant under a global sign flip.
    walk(1, 1, 1.0, r, &roots, &mut acc);
    acc.value() / (1u64 << (r - 1)) as f64
}

/// `E max_{l <= r} |S_l| / sqrt(l)`.
pub fn expected_max(r: u32, mode: Mode, trials: u64, seed: u64) -> Result<MaxStatResult> {
    if r == 0 {
        return Err(invalid_input("r must be at least 1"));
    }
    match mode {
        Mode::Exact => {
            if r > MAX_EXACT_LEN {
                return Err(Error::ExactInfeasible(format!("r = {r} exceeds {MAX_EXACT_LEN}")));
            }
            Ok(MaxStatResult::exact(exact_expected_max(r), 1u64 << r))
        }
        Mode::Mc => {
            if trials == 0 {
                return Err(invalid_input("trials must be at least 1"));
            }
            let cps = [r as u64];
            let values: Vec<f64> = run_chunked(trials, |range| {
                let mut out = [0.0];
                range
                    .map(|t| {
                        prefix_max_at(&mut trial_rng(seed, t), &cps, &mut out);
                        out[0]
                    })
                    .collect::<Vec<_>>()
            })
            .concat();
            let est = mean_and_std_error(&values);
            Ok(MaxStatResult { estimate: est.mean, std_error: est.std_error, mode, trials, seed })
        }
    }
}

/// Exact `E max_{j <= n} |S_j|` and `2 E |S_n|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyCheck {
    pub lhs: f64,
    pub rhs: f64,
}

/// Largest `n` accepted by [`levy_symmetrization_check`].
pub const MAX_LEVY_N: u32 = 20;

pub fn levy_symmetrization_check(n: u32) -> Result<LevyCheck> {
    if n == 0 {
        return Err(invalid_input("n must be at least 1"));
    }
    if n > MAX_LEVY_N {
        return Err(Error::ExactInfeasible(format!("n = {n} exceeds {MAX_LEVY_N}")));
    }
    fn walk(l: u32, s: i64, best: u64, n: u32, total: &mut u64) {
        let rem = (n - l) as u64;
        if s.unsigned_abs() + rem <= best {
            *total += best << rem;
            return;
        }
        for step in [1i64, -1] {
            let s2 = s + step;
            walk(l + 1, s2, best.max(s2.unsigned_abs()), n, total);
        }
    }
    let mut total = 0u64;
    walk(1, 1, 1, n, &mut total);
    let paths = (1u64 << (n - 1)) as f64;
    let lhs = total as f64 / paths;
    // E|S_n| = 2^-n sum_k C(n, k) |2k - n|
    let mut choose = 1u64;
    let mut abs_sum = 0u64;
    for k in 0..=n as u64 {
        abs_sum += choose * (2 * k).abs_diff(n as u64);
        choose = choose * (n as u64 - k) / (k + 1);
    }
    let rhs = 2.0 * abs_sum as f64 / (2.0 * paths);
    Ok(LevyCheck { lhs, rhs })
}

/// Geometric block layout `m_l = xi^l` of the block event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockConfig {
    pub xi: u32,
    pub eta: u32,
    pub s0: u32,
}

impl Default for BlockConfig {
    fn default() -> Self {
        Self { xi: 2, eta: 8, s0: 4 }
    }
}

impl BlockConfig {
    /// Block sizes `m_l` for `l = s, ..., eta s`.
    pub fn sizes(&self, s: u32) -> Result<Vec<u64>> {
        if self.xi < 2 || self.eta < 1 || self.s0 < 2 {
            return Err(invalid_input(format!("need xi >= 2, eta >= 1, s0 >= 2; got {self:?}")));
        }
        if s < self.s0 {
            return Err(invalid_input(format!("s = {s} below s0 = {}", self.s0)));
        }
        let top = s
            .checked_mul(self.eta)
            .ok_or_else(|| out_of_range("eta s overflows"))?;
        (s..=top)
            .map(|l| {
                (self.xi as u64)
                    .checked_pow(l)
                    .filter(|&m| m <= 1u64 << 62)
                    .ok_or_else(|| out_of_range(format!("block size {}^{l} too large", self.xi)))
            })
            .collect()
    }
}

/// Smallest `|S_m|` meeting `|S_m| / sqrt(m ln ln m) >= 1/4`.
fn block_threshold(m: u64) -> u64 {
    let t = 0.25 * (m as f64 * loglog(m as f64)).sqrt();
    (t - 1e-9).ceil().max(0.0) as u64
}

/// Probability that some block `l` in `s..=eta s` has
/// `|S_{m_l}| / sqrt(m_l ln ln m_l) >= 1/4`.
pub fn block_event_prob(cfg: BlockConfig, s: u32, mode: Mode, trials: u64, seed: u64) -> Result<MaxStatResult> {
    let sizes = cfg.sizes(s)?;
    let thresholds: Vec<u64> = sizes.iter().map(|&m| block_threshold(m)).collect();
    let longest = *sizes.last().expect("at least one block");
    match mode {
        Mode::Exact => {
            if longest > MAX_EXACT_LEN as u64 {
                return Err(Error::ExactInfeasible(format!("path length {longest} exceeds {MAX_EXACT_LEN}")));
            }
            let masks: Vec<u64> = sizes.iter().map(|&m| (1u64 << m) - 1).collect();
            let paths = 1u64 << longest;
            let hits = (0..paths)
                .filter(|&x| {
                    masks.iter().zip(&sizes).zip(&thresholds).any(|((&mask, &m), &thr)| {
                        (2 * (x & mask).count_ones() as u64).abs_diff(m) >= thr
                    })
                })
                .count() as u64;
            Ok(MaxStatResult::exact(hits as f64 / paths as f64, paths))
        }
        Mode::Mc => {
            if trials == 0 {
                return Err(invalid_input("trials must be at least 1"));
            }
            let mut prev = 0u64;
            let increments: Vec<(u64, Binomial)> = sizes
                .iter()
                .map(|&m| {
                    let n = m - prev;
                    prev = m;
                    (n, Binomial::new(n, 0.5).expect("valid binomial"))
                })
                .collect();
            let hits: u64 = run_chunked(trials, |range| {
                range
                    .filter(|&t| {
                        let mut rng = trial_rng(seed, t);
                        let mut s_val = 0i64;
                        increments.iter().zip(&thresholds).any(|((n, dist), &thr)| {
                            let ups: u64 = rng.sample(dist);
                            s_val += 2 * ups as i64 - *n as i64;
                            s_val.unsigned_abs() >= thr
                        })
                    })
                    .count() as u64
            })
            .into_iter()
            .sum();
            let (lo, hi) = wilson_interval(hits, trials, Z95);
            Ok(MaxStatResult {
                estimate: hits as f64 / trials as f64,
                std_error: (hi - lo) / (2.0 * Z95),
                mode,
                trials,
                seed,
            })
        }
    }
}

/// One cell of the block event surface over `(xi, eta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockSurfaceRow {
    pub xi: u32,
    pub eta: u32,
    pub s: u32,
    pub result: MaxStatResult,
}

/// Evaluates the block event at `s = s0` for every `(xi, eta)` pair,
/// exactly where the longest path allows it and by simulation otherwise.
pub fn block_surface(xis: &[u32], etas: &[u32], s0: u32, trials: u64, seed: u64) -> Result<Vec<BlockSurfaceRow>> {
    let mut rows = Vec::with_capacity(xis.len() * etas.len());
    for &xi in xis {
        for &eta in etas {
            let cfg = BlockConfig { xi, eta, s0 };
            let longest = *cfg.sizes(s0)?.last().expect("at least one block");
            let mode = if longest <= MAX_EXACT_LEN as u64 { Mode::Exact } else { Mode::Mc };
            let result = block_event_prob(cfg, s0, mode, trials, seed)?;
            rows.push(BlockSurfaceRow { xi, eta, s: s0, result });
        }
    }
    Ok(rows)
}

/// `c3 (sum of the floor(lambda) largest |w_i| + sqrt(lambda) * l2 norm of the rest)`.
pub fn ms_bound(w: &[f64], lambda: f64, c3: f64) -> Result<f64> {
    let m = w.len() as f64;
    if !(lambda > 0.0 && lambda < m - 1.0) {
        return Err(out_of_range(format!("lambda = {lambda} outside (0, {})", m - 1.0)));
    }
    if w.iter().any(|x| !x.is_finite()) {
        return Err(invalid_input("weights must be finite"));
    }
    let mut a: Vec<f64> = w.iter().map(|x| x.abs()).collect();
    a.sort_unstable_by(|x, y| y.total_cmp(x));
    let head = lambda.floor() as usize;
    let head_sum: f64 = a[..head].iter().sum();
    let tail_sq: f64 = a[head..].iter().map(|x| x * x).sum();
    Ok(c3 * (head_sum + lambda.sqrt() * tail_sq.sqrt()))
}

/// Exact `P(|sum eps_i w_i| >= ms_bound(w, lambda, c3))` by Gray-code
/// enumeration of all sign patterns.
pub fn ms_tail_prob(w: &[f64], lambda: f64, c3: f64) -> Result<f64> {
    let bound = ms_bound(w, lambda, c3)?;
    let n = w.len() as u32;
    if n > MAX_EXACT_LEN {
        return Err(Error::ExactInfeasible(format!("{n} weights exceed {MAX_EXACT_LEN}")));
    }
    let scale: f64 = w.iter().map(|x| x.abs()).sum();
    let cut = bound - 1e-9 * scale.max(1.0);
    let mut signs = vec![1.0f64; w.len()];
    let mut sum: f64 = w.iter().sum();
    let mut hits = u64::from(sum.abs() >= cut);
    for i in 1..(1u64 << n) {
        let j = i.trailing_zeros() as usize;
        signs[j] = -signs[j];
        sum += 2.0 * signs[j] * w[j];
        hits += u64::from(sum.abs() >= cut);
    }
    Ok(hits as f64 / (1u64 << n) as f64)
}

/// Fitted lower envelope `kappa exp(-c lambda)` of the exact tail
/// probabilities of [`ms_tail_prob`] over a family of weight vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsCalibration {
    pub c3: f64,
    pub c: f64,
    pub kappa: f64,
    /// `(lambda, smallest probability over the family)`.
    pub min_probs: Vec<(f64, f64)>,
}

pub fn ms_calibrate(family: &[Vec<f64>], lambdas: &[f64], c3: f64, c: f64) -> Result<MsCalibration> {
    let mut min_probs = Vec::new();
    for &lambda in lambdas {
        let mut lowest = f64::INFINITY;
        for w in family {
            if lambda < w.len() as f64 - 1.0 {
                lowest = lowest.min(ms_tail_prob(w, lambda, c3)?);
            }
        }
        if lowest.is_finite() {
            min_probs.push((lambda, lowest));
        }
    }
    if min_probs.is_empty() {
        return Err(invalid_input("no weight vector admits any lambda"));
    }
    let kappa = min_probs
        .iter()
        .map(|&(lambda, p)| p * (c * lambda).exp())
        .fold(f64::INFINITY, f64::min);
    Ok(MsCalibration { c3, c, kappa, min_probs })
}
