#![no_main]

use libfuzzer_sys::fuzz_target;
use triplekit::formats::{escape_field, split_mtriple};

fuzz_target!(|data: &str| {
    if let Some(t) = split_mtriple(data) {
        let text = format!(
            "{} | {} | {}",
            escape_field(&t.subject),
            escape_field(&t.predicate),
            escape_field(&t.object)
        );
        assert_eq!(split_mtriple(&text), Some(t));
    }
});
