#![no_main]

use libfuzzer_sys::fuzz_target;
use trapfactor::cli::parse_rational;
use trapfactor::Rational;

fuzz_target!(|data: &str| {
    if let Ok(q) = parse_rational(data) {
        assert!(q > Rational::from_integer(0.into()));
        let text = format!("{}/{}", q.numer(), q.denom());
        assert_eq!(parse_rational(&text), Ok(q));
    }
});
