#![no_main]

//! Input: a table JSON object on the first line, an annotation on the second.

use libfuzzer_sys::fuzz_target;
use triplekit::rng::stream;
use triplekit::sampler::{sample_component, SamplerConfig};
use triplekit::{build_tree, complete_subtree, validate_tree, OntologyAnnotation, Table};

fuzz_target!(|data: &str| {
    let Some((table, annotation)) = data.split_once('\n') else {
        return;
    };
    let (Ok(table), Ok(annotation)) = (
        serde_json::from_str::<Table>(table),
        serde_json::from_str::<OntologyAnnotation>(annotation),
    ) else {
        return;
    };
    if let Ok(tree) = build_tree(&table, &annotation) {
        assert!(validate_tree(&tree, &table).is_valid());
        let all = tree.nodes().collect();
        assert_eq!(complete_subtree(&tree, &all), all);
        let c = sample_component(&tree, &SamplerConfig::with_seed(0), &mut stream(0)).unwrap();
        assert!(!c.nodes.is_empty());
    }
});
