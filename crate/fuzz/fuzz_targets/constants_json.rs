#![no_main]

use dkw_core::ConstantSet;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    if let Ok(c) = ConstantSet::from_json(s) {
        assert!(c.validate().is_ok());
        assert_eq!(ConstantSet::from_json(&c.to_json()).unwrap(), c);
    }
});
