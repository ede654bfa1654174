#![no_main]

use libfuzzer_sys::fuzz_target;
use trapfactor::cli::parse_residue_filter;

fuzz_target!(|data: &str| {
    if let Ok(f) = parse_residue_filter(data) {
        let text = format!("{}:{}", f.modulus, f.residue);
        assert_eq!(parse_residue_filter(&text), Ok(f.clone()));
        let _ = f.accepts(0);
    }
});
