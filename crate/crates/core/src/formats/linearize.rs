use crate::ontology::TITLE_LABEL;
use crate::tripler::TripleSet;

/// Marker form of the title predicate in model inputs.
const LINEAR_TITLE: &str = "[title]";

/// Renders `<H> subject <R> predicate <T> object` per triple, single-space
/// separated, in stored order. The tree's `[TITLE]` predicate is written as
/// `[title]`; everything else is verbatim.
pub fn linearize(ts: &TripleSet) -> String {
    let mut out = String::new();
    for t in &ts.triples {
        if !out.is_empty() {
            out.push(' ');
        }
        let predicate = if t.predicate == TITLE_LABEL {
            LINEAR_TITLE
        } else {
            t.predicate.as_str()
        };
        out.push_str("<H> ");
        out.push_str(&t.subject);
        out.push_str(" <R> ");
        out.push_str(predicate);
        out.push_str(" <T> ");
        out.push_str(&t.object);
    }
    out
}
