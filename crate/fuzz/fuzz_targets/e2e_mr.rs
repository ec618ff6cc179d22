#![no_main]

use libfuzzer_sys::fuzz_target;
use triplekit::adapters::{e2e_to_tripleset, E2eOutcome, MeaningRepresentation};

fuzz_target!(|data: &str| {
    if let Ok(mr) = MeaningRepresentation::parse(data) {
        if let E2eOutcome::Converted(ts) = e2e_to_tripleset(&mr) {
            assert!(!ts.is_empty());
            assert!(ts.len() < mr.slots.len());
        }
    }
});
