#![no_main]

use dkw_core::DistributionModel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    if let Ok(model) = s.parse::<DistributionModel>() {
        let again: DistributionModel = model.to_string().parse().expect("display form parses");
        assert_eq!(again, model);
        let u = model.cdf(0.0);
        assert!((0.0..=1.0).contains(&u));
    }
});
