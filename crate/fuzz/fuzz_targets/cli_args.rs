#![no_main]

use libfuzzer_sys::fuzz_target;
use trapfactor::cli::parse_args;

// Arguments are NUL-separated. Only parsing is exercised.
fuzz_target!(|data: &str| {
    let args = std::iter::once("trapfactor").chain(data.split('\0'));
    let _ = parse_args(args);
});
