#![no_main]

use libfuzzer_sys::fuzz_target;
use triplekit::formats::read_release_json;

fuzz_target!(|data: &str| {
    if let Ok(entries) = read_release_json(data) {
        for e in &entries {
            assert!(!e.realizations.is_empty());
        }
    }
});
