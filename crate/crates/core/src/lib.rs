//! Corpus construction toolkit for data-to-text generation.
//!
//! Flat tables plus per-column parent annotations become ontology trees.
//! Connected components sampled from those trees are turned into
//! subject/predicate/object triplesets, merged with triplesets converted from
//! external sources (E2E meaning representations, WebNLG XML, WikiSQL rows),
//! canonicalized, split without similarity leakage and summarized.

pub mod adapters;
pub mod corpus_ops;
pub mod formats;
pub mod ontology;
pub mod rng;
pub mod sampler;
pub mod splitkit;
pub mod table;
pub mod tripler;
pub mod unify;

pub use ontology::{
    build_tree, ontology_stats, validate_tree, BuildError, Finding, NodeRef, OntologyAnnotation,
    OntologyStats, OntologyTree, ParentRef, TitleShape, ValidationReport,
};
pub use table::{Table, TableError, TableSource};
pub use tripler::{
    assemble_entry, complete_subtree, extract_triples, instantiate, Annotator, CorpusEntry,
    EntryError, Highlight, Provenance, Realization, Triple, TripleSet, ValueAssignment,
    MAX_TRIPLES,
};
