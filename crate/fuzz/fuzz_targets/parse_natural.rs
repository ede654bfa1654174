#![no_main]

use libfuzzer_sys::fuzz_target;
use trapfactor::cli::parse_natural;

fuzz_target!(|data: &str| {
    if let Ok(n) = parse_natural(data) {
        // Round trip up to leading zeros.
        let canonical = data.trim_start_matches('0');
        let canonical = if canonical.is_empty() { "0" } else { canonical };
        assert_eq!(n.to_string(), canonical);
    }
});
