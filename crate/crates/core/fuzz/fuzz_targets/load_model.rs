#![no_main]

use detpomdp::model::{load_model, save_model};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = load_model(text) {
        let saved = save_model(&m);
        let again = load_model(&saved).expect("saved model reloads");
        assert_eq!(save_model(&again), saved);
    }
});
