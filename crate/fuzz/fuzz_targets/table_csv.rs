#![no_main]

use libfuzzer_sys::fuzz_target;
use triplekit::table::TableMeta;
use triplekit::{Table, TableSource};

fuzz_target!(|data: &[u8]| {
    for delimiter in [b',', b'\t'] {
        let meta = TableMeta {
            id: "fuzz".into(),
            title: String::new(),
            source: TableSource::Other,
        };
        if let Ok(table) = Table::from_delimited(data, delimiter, meta) {
            assert!(table.column_count() > 0);
            assert!(table.rows().iter().all(|r| r.len() == table.column_count()));
        }
    }
});
