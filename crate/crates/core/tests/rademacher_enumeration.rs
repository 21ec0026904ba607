//! Prefix-sum maxima and block events against independent enumerations.

use dkw_core::rademacher::{
    block_event_prob, expected_max, levy_symmetrization_check, max_norm_prefix, ms_bound, ms_calibrate, ms_tail_prob,
    BlockConfig, Mode,
};
use dkw_core::{loglog, Error};

#[test]
fn exact_expected_max_is_nondecreasing_in_r() {
    let mut prev = 0.0;
    for r in 1..=20 {
        let v = expected_max(r, Mode::Exact, 0, 0).unwrap();
        assert_eq!(v.std_error, 0.0);
        assert!(v.estimate >= prev, "r = {r}");
        prev = v.estimate;
    }
}

#[test]
fn monte_carlo_agrees_with_enumeration() {
    for r in [1, 2, 5, 9, 16] {
        let exact = expected_max(r, Mode::Exact, 0, 0).unwrap().estimate;
        let mc = expected_max(r, Mode::Mc, 100_000, 42).unwrap();
        assert_eq!(mc.trials, 100_000);
        if r == 1 {
            assert_eq!(mc.estimate, 1.0);
            continue;
        }
        assert!((mc.estimate - exact).abs() <= 3.0 * mc.std_error, "r={r}: {} vs {exact}", mc.estimate);
    }
    assert!(expected_max(4, Mode::Mc, 0, 1).is_err());
}

#[test]
fn levy_inequality_holds_for_small_n() {
    for n in 1..=16 {
        let c = levy_symmetrization_check(n).unwrap();
        assert!(c.lhs <= c.rhs, "n = {n}: {} > {}", c.lhs, c.rhs);
    }
}

#[test]
fn levy_lhs_matches_brute_force() {
    for n in 1..=12u32 {
        let mut total = 0u64;
        for x in 0u64..1 << n {
            let mut s = 0i64;
            let mut best = 0u64;
            for j in 0..n {
                s += if (x >> j) & 1 == 1 { 1 } else { -1 };
                best = best.max(s.unsigned_abs());
            }
            total += best;
        }
        let c = levy_symmetrization_check(n).unwrap();
        assert_eq!(c.lhs, total as f64 / (1u64 << n) as f64);
    }
}

/// Probability of the block event by dynamic programming over the
/// distribution of `S` at the block ends, independent of path enumeration.
fn block_event_dp(xi: u64, eta: u32, s: u32) -> f64 {
    let sizes: Vec<u64> = (s..=eta * s).map(|l| xi.pow(l)).collect();
    let top = *sizes.last().unwrap() as i64;
    let offset = top;
    // mass[v + offset] = P(S = v and no block has fired yet)
    let mut mass = vec![0.0f64; (2 * top + 1) as usize];
    mass[offset as usize] = 1.0;
    let mut done = 0u64;
    let mut fired = 0.0;
    for &m in &sizes {
        for _ in done..m {
            let mut next = vec![0.0f64; mass.len()];
            for (i, &w) in mass.iter().enumerate() {
                if w > 0.0 {
                    next[i + 1] += 0.5 * w;
                    next[i - 1] += 0.5 * w;
                }
            }
            mass = next;
        }
        done = m;
        let thr = 0.25 * (m as f64 * loglog(m as f64)).sqrt();
        for (i, w) in mass.iter_mut().enumerate() {
            let v = (i as i64 - offset).unsigned_abs() as f64;
            if v >= thr {
                fired += *w;
                *w = 0.0;
            }
        }
    }
    fired
}

#[test]
fn block_event_enumeration_matches_dynamic_programming() {
    for (xi, eta, s) in [(2u32, 1u32, 2u32), (2, 2, 2), (2, 1, 3), (2, 1, 4), (3, 1, 2), (4, 1, 2)] {
        let cfg = BlockConfig { xi, eta, s0: 2 };
        let exact = block_event_prob(cfg, s, Mode::Exact, 0, 0).unwrap().estimate;
        let dp = block_event_dp(xi as u64, eta, s);
        assert!((exact - dp).abs() < 1e-12, "{xi} {eta} {s}: {exact} vs {dp}");
    }
}

#[test]
fn block_event_is_nondecreasing_in_eta() {
    let mut prev = 0.0;
    for eta in 1..=6 {
        let cfg = BlockConfig { xi: 2, eta, s0: 2 };
        let r = block_event_prob(cfg, 2, Mode::Mc, 200_000, 5).unwrap();
        // same seed, same increments for the shared prefix of blocks
        assert!(r.estimate >= prev, "eta = {eta}");
        prev = r.estimate;
    }
    let exact = block_event_prob(BlockConfig { xi: 2, eta: 2, s0: 2 }, 2, Mode::Exact, 0, 0).unwrap();
    let mc = block_event_prob(BlockConfig { xi: 2, eta: 2, s0: 2 }, 2, Mode::Mc, 200_000, 5).unwrap();
    assert!((mc.estimate - exact.estimate).abs() <= 4.0 * mc.std_error);
}

#[test]
fn block_sizes_must_fit() {
    let cfg = BlockConfig { xi: 1000, eta: 8, s0: 4 };
    assert!(matches!(block_event_prob(cfg, 4, Mode::Mc, 10, 0), Err(Error::OutOfRange(_))));
}

#[test]
fn ms_tail_prob_matches_direct_enumeration() {
    let w = [0.9, -0.3, 1.7, 0.05, 0.6, 1.1, -2.0, 0.4];
    for lambda in [0.5, 1.0, 2.5, 4.0] {
        let bound = ms_bound(&w, lambda, 0.5).unwrap();
        let mut hits = 0u32;
        for x in 0u32..1 << w.len() {
            let s: f64 = w.iter().enumerate().map(|(i, v)| if (x >> i) & 1 == 1 { *v } else { -v }).sum();
            if s.abs() >= bound - 1e-9 {
                hits += 1;
            }
        }
        let direct = hits as f64 / (1u32 << w.len()) as f64;
        assert_eq!(ms_tail_prob(&w, lambda, 0.5).unwrap(), direct, "lambda = {lambda}");
    }
}

#[test]
fn montgomery_smith_envelope_is_positive() {
    let mut family: Vec<Vec<f64>> = vec![vec![1.0; 20], vec![1.0; 6], (1..=20).map(|i| 1.0 / i as f64).collect()];
    family.push((1..=16).map(|i| (i as f64).sqrt()).collect());
    family.push((0..18).map(|i| 0.8f64.powi(i)).collect());
    family.push(vec![5.0, 1.0, 1.0, 1.0, 1.0, 0.5, 0.5, 0.25, 0.25, 0.1]);
    let cal = ms_calibrate(&family, &[1.0, 2.0, 4.0], 0.5, 1.0).unwrap();
    eprintln!("Montgomery-Smith envelope: kappa = {:.4}, c = {}, {:?}", cal.kappa, cal.c, cal.min_probs);
    assert!(cal.kappa > 0.0);
    assert!(cal.min_probs.iter().all(|&(_, p)| p > 0.0));
}

#[test]
fn max_norm_prefix_rejects_non_signs() {
    assert!(max_norm_prefix(&[1, 0, 1], 3).is_err());
}
