#![no_main]

use libfuzzer_sys::fuzz_target;
use trapfactor::cli::{parse_k_range, MAX_ABS_K};

fuzz_target!(|data: &str| {
    if let Ok((lo, hi)) = parse_k_range(data) {
        assert!(lo <= hi);
        assert!(lo.abs() <= MAX_ABS_K && hi.abs() <= MAX_ABS_K);
        assert_eq!(parse_k_range(&format!("{lo}..{hi}")), Ok((lo, hi)));
    }
});
