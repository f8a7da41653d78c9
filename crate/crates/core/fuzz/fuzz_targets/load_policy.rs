#![no_main]

use detpomdp::model::load_model;
use detpomdp::policy::{load_policy, save_policy};
use libfuzzer_sys::fuzz_target;

const M3: &str = include_str!("../seeds/m3.json");

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let model = load_model(M3).expect("seed model loads");
    if let Ok(file) = load_policy(&model, text) {
        let saved = save_policy(&model, &file);
        let again = load_policy(&model, &saved).expect("saved policy reloads");
        assert_eq!(again.policy, file.policy);
    }
});
