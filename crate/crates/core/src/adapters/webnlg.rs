use crate::formats::{read_xml, FormatError};
use crate::tripler::{CorpusEntry, Provenance};

/// Reads a WebNLG document. Entries keep their category, eid, triples and
/// every lex; triplesets without an explicit source are tagged as WebNLG.
pub fn webnlg_ingest(document: &str) -> Result<Vec<CorpusEntry>, FormatError> {
    let mut entries = read_xml(document)?;
    for e in &mut entries {
        if e.tripleset.provenance == Provenance::Unspecified {
            e.tripleset.provenance = Provenance::Webnlg;
        }
    }
    Ok(entries)
}
