#![no_main]

use dkw_core::BandKind;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    if let Ok(kind) = s.parse::<BandKind>() {
        assert_eq!(kind.to_string().parse::<BandKind>().unwrap(), kind);
    }
});
