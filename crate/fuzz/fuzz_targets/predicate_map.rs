#![no_main]

use libfuzzer_sys::fuzz_target;
use triplekit::unify::PredicateMap;

fuzz_target!(|data: &[u8]| {
    if let Ok(map) = PredicateMap::from_tsv(data) {
        for (_, target) in map.iter() {
            assert_eq!(map.get(target).map_or(target, |t| t), target);
        }
    }
});
