//! Per-trial random streams.
//!
//! Trial `i` of an experiment with master seed `s` always draws from the
//! generator seeded with `mix(s, i)`, so any trial can be replayed alone and
//! the outcome of an experiment does not depend on how trials are scheduled.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use rand_distr::Exp1;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type TrialRng = Xoshiro256PlusPlus;

/// SplitMix64 finalizer.
#[inline]
pub fn avalanche(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Combines a master seed with a stream index.
#[inline]
pub fn mix(master_seed: u64, index: u64) -> u64 {
    avalanche(avalanche(master_seed).wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

pub fn trial_rng(master_seed: u64, trial: u64) -> TrialRng {
    TrialRng::seed_from_u64(mix(master_seed, trial))
}

/// Fills `out` with the order statistics of `out.len()` iid uniforms on `(0, 1)`.
///
/// Uses normalised partial sums of standard exponentials, which have exactly
/// the joint law of uniform order statistics and need no sort.
pub fn sorted_uniforms<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    let mut acc = 0.0f64;
    for slot in out.iter_mut() {
        let e: f64 = rng.sample(Exp1);
        acc += e;
        *slot = acc;
    }
    let e: f64 = rng.sample(Exp1);
    let total = acc + e;
    let inv = 1.0 / total;
    for slot in out.iter_mut() {
        *slot = (*slot * inv).min(1.0 - f64::EPSILON / 2.0);
    }
}

/// Trials per work unit of [`run_chunked`].
pub const CHUNK: u64 = 1024;

/// Runs `work` over consecutive trial ranges of length [`CHUNK`] in parallel
/// and returns the per-chunk results in trial order.
///
/// The chunk boundaries do not depend on the thread count, so any ordered
/// reduction of the result is reproducible.
pub fn run_chunked<A, F>(trials: u64, work: F) -> Vec<A>
where
    A: Send,
    F: Fn(Range<u64>) -> A + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| work(c * CHUNK..((c + 1) * CHUNK).min(trials)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mix_separates_streams() {
        assert_ne!(mix(0, 0), mix(0, 1));
        assert_ne!(mix(0, 1), mix(1, 0));
        assert_eq!(mix(7, 3), mix(7, 3));
    }

    #[test]
    fn chunks_cover_trials_in_order() {
        let parts = run_chunked(2500, |r| (r.start, r.end));
        assert_eq!(parts, vec![(0, 1024), (1024, 2048), (2048, 2500)]);
        assert!(run_chunked(0, |r| r.end - r.start).is_empty());
    }

    #[test]
    fn sorted_uniforms_are_sorted_and_in_unit_interval() {
        let mut rng = trial_rng(1, 2);
        let mut buf = vec![0.0; 1000];
        sorted_uniforms(&mut rng, &mut buf);
        assert!(buf.windows(2).all(|w| w[0] <= w[1]));
        assert!(buf.iter().all(|&u| u > 0.0 && u < 1.0));
    }

    #[test]
    fn sorted_uniform_marginals_match_beta_means() {
        // E U_(k) = k / (m + 1)
        let m = 9;
        let trials = 40_000;
        let mut sums = vec![0.0; m];
        let mut buf = vec![0.0; m];
        for t in 0..trials {
            sorted_uniforms(&mut trial_rng(5, t), &mut buf);
            for (s, u) in sums.iter_mut().zip(&buf) {
                *s += u;
            }
        }
        for (k, s) in sums.iter().enumerate() {
            let mean = s / trials as f64;
            let expect = (k + 1) as f64 / (m + 1) as f64;
            // sd of U_(k) <= 0.16, 5 standard errors
            assert!((mean - expect).abs() < 5.0 * 0.16 / (trials as f64).sqrt(), "{k}: {mean}");
        }
    }
}
