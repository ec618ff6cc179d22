//! The distributed JSON corpus layout: one array whose elements carry a
//! `tripleset` of `[subject, predicate, object]` arrays and `annotations`
//! of `{source, text}` objects.

use serde::Deserialize;

use super::FormatError;
use crate::tripler::{Annotator, CorpusEntry, Provenance, Realization, Triple, TripleSet};

#[derive(Deserialize)]
struct ReleaseEntry {
    tripleset: Vec<(String, String, String)>,
    #[serde(default)]
    annotations: Vec<ReleaseAnnotation>,
}

#[derive(Deserialize)]
struct ReleaseAnnotation {
    #[serde(default)]
    source: String,
    text: String,
}

/// Maps an annotation source tag such as `WikiSQL_decl_sents` or
/// `WikiTableQuestions_mturk` to a provenance and annotator.
pub fn classify_source(source: &str) -> (Provenance, Annotator) {
    let lower = source.to_ascii_lowercase();
    let provenance = if lower.starts_with("wikisql_decl") {
        Provenance::WikisqlDeclarative
    } else if lower.starts_with("wikisql") {
        Provenance::Wikisql
    } else if lower.starts_with("wikitablequestions") {
        Provenance::Wikitablequestions
    } else if lower.starts_with("webnlg") {
        Provenance::Webnlg
    } else if lower.starts_with("e2e") {
        Provenance::E2e
    } else {
        Provenance::Unspecified
    };
    let annotator = if lower.contains("mturk") {
        Annotator::Mturk
    } else if lower.contains("decl") {
        Annotator::AutoDeclarative
    } else if lower.contains("lily") {
        Annotator::Internal
    } else {
        Annotator::ExternalDataset
    };
    (provenance, annotator)
}

/// Reads the distributed JSON array. Entries get sequential eids; the
/// provenance comes from the first annotation's source tag.
pub fn read_release_json(text: &str) -> Result<Vec<CorpusEntry>, FormatError> {
    let raw: Vec<ReleaseEntry> = serde_json::from_str(text).map_err(|e| FormatError::Json {
        line: e.line(),
        message: e.to_string(),
    })?;
    let mut entries = Vec::with_capacity(raw.len());
    for (index, e) in raw.into_iter().enumerate() {
        let provenance = e
            .annotations
            .first()
            .map_or(Provenance::Unspecified, |a| classify_source(&a.source).0);
        let entry = CorpusEntry {
            eid: format!("Id{}", index + 1),
            category: "MISC".to_owned(),
            tripleset: TripleSet::new(
                e.tripleset
                    .into_iter()
                    .map(|(s, p, o)| Triple::new(s, p, o))
                    .collect(),
                provenance,
            ),
            realizations: e
                .annotations
                .into_iter()
                .map(|a| {
                    let annotator = classify_source(&a.source).1;
                    Realization::new(a.text, annotator, a.source)
                })
                .collect(),
            table_id: None,
            has_empty_value: false,
        };
        entry.check().map_err(|err| FormatError::InvalidEntry {
            index,
            message: err.to_string(),
        })?;
        entries.push(entry);
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_array_layout() {
        let doc = r#"[
          {"tripleset": [["Peru Earthquake", "scale of disaster", "250k homeless"],
                         ["Peru Earthquake", "year", "2007"]],
           "subtree_was_extended": false,
           "annotations": [{"source": "WikiTableQuestions_mturk", "text": "In 2007 an earthquake in Peru left 250k homeless."}]},
          {"tripleset": [["A", "b", "c"]], "annotations": [{"source": "e2e", "text": "A b c."}]}
        ]"#;
        let entries = read_release_json(doc).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(
            entries[0].tripleset.provenance,
            Provenance::Wikitablequestions
        );
        assert_eq!(entries[0].realizations[0].annotator, Annotator::Mturk);
        assert_eq!(entries[1].eid, "Id2");
        let bare = r#"[{"tripleset": [["A", "b", "c"]], "annotations": []}]"#;
        assert!(matches!(
            read_release_json(bare),
            Err(FormatError::InvalidEntry { index: 0, .. })
        ));
        assert_eq!(entries[1].tripleset.provenance, Provenance::E2e);
        assert!(read_release_json("{").is_err());
    }
}
