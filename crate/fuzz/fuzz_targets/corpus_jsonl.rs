#![no_main]

use libfuzzer_sys::fuzz_target;
use triplekit::formats::{read_corpus_jsonl, write_corpus_jsonl};

fuzz_target!(|data: &str| {
    if let Ok(entries) = read_corpus_jsonl(data) {
        let again = read_corpus_jsonl(&write_corpus_jsonl(&entries)).expect("written JSONL parses");
        assert_eq!(again, entries);
    }
});
