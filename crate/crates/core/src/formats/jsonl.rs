use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::FormatError;
use crate::tripler::CorpusEntry;

/// Version tag carried by every corpus line.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct VersionedRef<'a> {
    schema_version: u32,
    #[serde(flatten)]
    entry: &'a CorpusEntry,
}

#[derive(Deserialize)]
struct Versioned {
    schema_version: u32,
    #[serde(flatten)]
    entry: CorpusEntry,
}

/// One JSON value per line; blank lines are skipped.
pub fn read_jsonl<T: DeserializeOwned>(text: &str) -> Result<Vec<T>, FormatError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| FormatError::Json {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn write_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("records serialize to JSON"));
        out.push('\n');
    }
    out
}

pub fn write_corpus_jsonl(entries: &[CorpusEntry]) -> String {
    let wrapped: Vec<VersionedRef<'_>> = entries
        .iter()
        .map(|entry| VersionedRef {
            schema_version: SCHEMA_VERSION,
            entry,
        })
        .collect();
    write_jsonl(&wrapped)
}

pub fn read_corpus_jsonl(text: &str) -> Result<Vec<CorpusEntry>, FormatError> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let json = |e: String| FormatError::Json {
            line: i + 1,
            message: e,
        };
        let v: Versioned = serde_json::from_str(line).map_err(|e| json(e.to_string()))?;
        if v.schema_version != SCHEMA_VERSION {
            return Err(FormatError::UnsupportedSchema {
                line: i + 1,
                version: v.schema_version,
            });
        }
        v.entry.check().map_err(|e| json(e.to_string()))?;
        entries.push(v.entry);
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tripler::{Annotator, Provenance, Realization, Triple, TripleSet};

    fn entry() -> CorpusEntry {
        CorpusEntry {
            eid: "Id1".into(),
            category: "MISC".into(),
            tripleset: TripleSet::new(vec![Triple::new("a", "b", "c")], Provenance::E2e),
            realizations: vec![Realization::new(
                "A b c.",
                Annotator::ExternalDataset,
                "E2E",
            )],
            table_id: Some("t".into()),
            has_empty_value: true,
        }
    }

    #[test]
    fn corpus_lines_carry_schema_version() {
        let text = write_corpus_jsonl(&[entry()]);
        assert!(text.starts_with("{\"schema_version\":1,"));
        assert_eq!(read_corpus_jsonl(&text).unwrap(), vec![entry()]);
    }

    #[test]
    fn rejects_unknown_version_and_invalid_entries() {
        let text =
            write_corpus_jsonl(&[entry()]).replace("\"schema_version\":1", "\"schema_version\":9");
        assert!(matches!(
            read_corpus_jsonl(&text),
            Err(FormatError::UnsupportedSchema {
                line: 1,
                version: 9
            })
        ));
        let mut bad = entry();
        bad.realizations.clear();
        let text = write_corpus_jsonl(&[bad]);
        assert!(matches!(
            read_corpus_jsonl(&text),
            Err(FormatError::Json { line: 1, .. })
        ));
    }
}
