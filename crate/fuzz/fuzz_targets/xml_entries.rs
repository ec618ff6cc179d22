#![no_main]

use libfuzzer_sys::fuzz_target;
use triplekit::formats::{read_xml, write_xml};

fuzz_target!(|data: &str| {
    if let Ok(entries) = read_xml(data) {
        let written = write_xml(&entries);
        let again = read_xml(&written).expect("written XML parses");
        assert_eq!(again, entries);
    }
});
