//! Exact supremum statistics against dense-grid and brute-force oracles.

use dkw_core::ecdf::{isomorphic_violation_u, sup_deviation_u, weighted_sup_u};
use dkw_core::{DistributionModel, RangeMode, SortedSample, WeightMode};
use proptest::prelude::*;

/// `sup` over a grid of `max(|F_m(u) - u|, |F_m(u-) - u|) / w(u)`, walking
/// the grid and the sample together. The left limit at the first grid point
/// lies outside the range and is skipped.
fn grid_sup(us: &[f64], grid: &[f64], weight: WeightMode) -> f64 {
    let m = us.len() as f64;
    let (mut below, mut upto) = (0usize, 0usize);
    let mut best = 0.0f64;
    for (i, &u) in grid.iter().enumerate() {
        while below < us.len() && us[below] < u {
            below += 1;
        }
        upto = upto.max(below);
        while upto < us.len() && us[upto] <= u {
            upto += 1;
        }
        let w = weight.weight(u);
        let left = if i == 0 { 0.0 } else { (below as f64 / m - u).abs() };
        let d = left.max((upto as f64 / m - u).abs());
        best = best.max(d / w);
    }
    best
}

fn lattice(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 }).collect()
}

fn uniform_sample(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.000_001f64..0.999_999, 1..=max_len).prop_map(|mut v| {
        v.sort_unstable_by(f64::total_cmp);
        v
    })
}

fn weights() -> impl Strategy<Value = WeightMode> {
    prop_oneof![Just(WeightMode::Variance), Just(WeightMode::Minform), Just(WeightMode::Zm)]
}

fn range_for(weight: WeightMode, delta: f64) -> (f64, f64) {
    match weight {
        WeightMode::Zm => RangeMode::FInTwoDeltaHalf.bounds(delta.min(0.24)).unwrap(),
        _ => RangeMode::Sigma2GeDelta.bounds(delta).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Samples placed on the grid make the grid oracle exact.
    #[test]
    fn weighted_sup_equals_grid_oracle_on_lattice_samples(
        idx in prop::collection::vec(prop_oneof![Just(0usize), Just(20_000usize), 0usize..=20_000], 1..=50),
        delta in 0.001f64..0.25,
        weight in weights(),
    ) {
        let (lo, hi) = range_for(weight, delta);
        let grid = lattice(lo, hi, 20_000);
        let mut us: Vec<f64> = idx.iter().map(|&i| grid[i]).collect();
        us.sort_unstable_by(f64::total_cmp);
        let exact = weighted_sup_u(&us, lo, hi, weight).value;
        let oracle = grid_sup(&us, &grid, weight);
        prop_assert!((exact - oracle).abs() <= 1e-12 * exact.max(1.0), "{} vs {}", exact, oracle);
    }

    /// Off the lattice the grid can only undershoot, by at most the slope times the spacing.
    #[test]
    fn weighted_sup_bounds_grid_oracle(us in uniform_sample(50), delta in 0.01f64..0.25, weight in weights()) {
        let (lo, hi) = range_for(weight, delta);
        let grid = lattice(lo, hi, 50_000);
        let exact = weighted_sup_u(&us, lo, hi, weight).value;
        let oracle = grid_sup(&us, &grid, weight);
        let h = (hi - lo) / 50_000.0;
        let wmin = weight.weight(lo).min(weight.weight(hi));
        prop_assert!(oracle <= exact + 1e-12);
        prop_assert!(exact - oracle <= 4.0 * h / (wmin * wmin * wmin), "{} vs {}", exact, oracle);
    }

    #[test]
    fn ks_statistic_matches_brute_force(us in uniform_sample(40)) {
        let m = us.len() as f64;
        let mut brute = 0.0f64;
        for &t in &us {
            let at = us.iter().filter(|&&v| v <= t).count() as f64 / m;
            let below = us.iter().filter(|&&v| v < t).count() as f64 / m;
            brute = brute.max((at - t).abs()).max((below - t).abs());
        }
        prop_assert_eq!(sup_deviation_u(&us).value, brute);
    }

    #[test]
    fn statistics_are_distribution_free(us in uniform_sample(60), delta in 0.01f64..0.25, rate in 0.1f64..5.0) {
        let models = [
            DistributionModel::exponential(rate).unwrap(),
            DistributionModel::normal(rate - 2.0, rate).unwrap(),
        ];
        for model in models {
            let raw: Vec<f64> = us.iter().map(|&u| model.quantile(u)).collect();
            let sample = SortedSample::new(raw).unwrap();
            let pit = sample.pit_transform(&model).unwrap();
            let uniform = DistributionModel::Uniform01;
            prop_assert_eq!(sample.sup_deviation(&model), pit.sup_deviation(&uniform));
            for (weight, range) in [
                (WeightMode::Variance, RangeMode::Sigma2GeDelta),
                (WeightMode::Minform, RangeMode::Sigma2GeDelta),
                (WeightMode::Zm, RangeMode::FInTwoDeltaHalf),
            ] {
                let d = if range == RangeMode::FInTwoDeltaHalf { delta.min(0.2) } else { delta };
                let a = sample.weighted_sup(&model, d, weight, range).unwrap();
                let b = pit.weighted_sup(&uniform, d, weight, range).unwrap();
                prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
                prop_assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn minform_sits_between_variance_and_variance_over_sqrt2(us in uniform_sample(80), delta in 0.001f64..0.25) {
        let (lo, hi) = RangeMode::Sigma2GeDelta.bounds(delta).unwrap();
        let v = weighted_sup_u(&us, lo, hi, WeightMode::Variance).value;
        let n = weighted_sup_u(&us, lo, hi, WeightMode::Minform).value;
        prop_assert!(n <= v * (1.0 + 1e-12));
        prop_assert!(n >= v / 2f64.sqrt() * (1.0 - 1e-12));
    }

    #[test]
    fn variance_statistic_grows_as_delta_shrinks(us in uniform_sample(80), d1 in 0.001f64..0.25, d2 in 0.001f64..0.25) {
        let (small, large) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let (lo_s, hi_s) = RangeMode::Sigma2GeDelta.bounds(small).unwrap();
        let (lo_l, hi_l) = RangeMode::Sigma2GeDelta.bounds(large).unwrap();
        prop_assert!(weighted_sup_u(&us, lo_s, hi_s, WeightMode::Variance).value
            >= weighted_sup_u(&us, lo_l, hi_l, WeightMode::Variance).value);
    }

    #[test]
    fn isomorphic_check_agrees_with_grid(
        idx in prop::collection::vec(prop_oneof![Just(0usize), Just(4_000usize), 0usize..=4_000], 1..=40),
        delta in 0.01f64..0.25,
    ) {
        let (lo, hi) = RangeMode::Sigma2GeDelta.bounds(delta).unwrap();
        let grid = lattice(lo, hi, 4_000);
        let mut us: Vec<f64> = idx.iter().map(|&i| grid[i]).collect();
        us.sort_unstable_by(f64::total_cmp);
        let m = us.len() as f64;
        let mut violated = false;
        for (i, &u) in grid.iter().enumerate() {
            let at = us.partition_point(|&v| v <= u) as f64 / m;
            let left = if i == 0 { at } else { us.partition_point(|&v| v < u) as f64 / m };
            for level in [left, at] {
                let r = if u <= 0.5 { level / u } else { (1.0 - level) / (1.0 - u) };
                violated |= !(0.75 - 1e-12..=1.25 + 1e-12).contains(&r);
            }
        }
        prop_assert_eq!(isomorphic_violation_u(&us, lo, hi).violated, violated);
    }
}
