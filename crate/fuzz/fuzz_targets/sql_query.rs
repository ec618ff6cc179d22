#![no_main]

use libfuzzer_sys::fuzz_target;
use triplekit::adapters::{filter_sql, has_aggregate, SqlFilter, SqlQuery};

fuzz_target!(|data: &str| {
    let flagged = has_aggregate(data);
    if let Ok(q) = SqlQuery::parse(data) {
        assert_eq!(filter_sql(&q) == SqlFilter::Reject, flagged);
    }
});
