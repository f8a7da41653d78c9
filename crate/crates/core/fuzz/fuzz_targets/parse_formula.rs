#![no_main]

use detpomdp::domains::parse_formula;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = parse_formula(text) {
        assert_eq!(parse_formula(&f.to_string()), Ok(f));
    }
});
