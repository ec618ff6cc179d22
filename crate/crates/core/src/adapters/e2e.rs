//! Dialogue-act meaning representations such as
//! `name[Alimentum], area[city centre], familyFriendly[no]`.

use std::io::Read;

use serde::Deserialize;
use thiserror::Error;

use crate::tripler::{Annotator, CorpusEntry, Provenance, Realization, Triple, TripleSet};

const NAME_SLOT: &str = "name";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MrParseError {
    #[error("byte {offset}: expected '[' after slot name")]
    MissingOpen { offset: usize },
    #[error("byte {offset}: unbalanced brackets")]
    Unbalanced { offset: usize },
    #[error("byte {offset}: empty slot name")]
    EmptySlot { offset: usize },
    #[error("byte {offset}: expected ',' between slots")]
    MissingComma { offset: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeaningRepresentation {
    pub slots: Vec<(String, String)>,
}

impl MeaningRepresentation {
    /// Parses `slot[value], slot[value], ...`, optionally wrapped in
    /// parentheses. Values may contain balanced brackets.
    pub fn parse(input: &str) -> Result<Self, MrParseError> {
        let mut text = input.trim();
        let mut base = input.len() - input.trim_start().len();
        if let Some(inner) = text.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
            text = inner;
            base += 1;
        }
        let bytes = text.as_bytes();
        let mut slots = Vec::new();
        let mut i = 0;
        let skip_ws = |mut i: usize| {
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            i
        };
        i = skip_ws(i);
        while i < bytes.len() {
            let name_start = i;
            while i < bytes.len() && bytes[i] != b'[' && bytes[i] != b']' && bytes[i] != b',' {
                i += 1;
            }
            if i >= bytes.len() || bytes[i] != b'[' {
                return Err(MrParseError::MissingOpen { offset: base + i });
            }
            let name = text[name_start..i].trim();
            if name.is_empty() {
                return Err(MrParseError::EmptySlot {
                    offset: base + name_start,
                });
            }
            let value_start = i + 1;
            let mut depth = 1usize;
            i += 1;
            while i < bytes.len() && depth > 0 {
                match bytes[i] {
                    b'[' => depth += 1,
                    b']' => depth -= 1,
                    _ => {}
                }
                i += 1;
            }
            if depth != 0 {
                return Err(MrParseError::Unbalanced {
                    offset: base + value_start - 1,
                });
            }
            slots.push((name.to_owned(), text[value_start..i - 1].trim().to_owned()));
            i = skip_ws(i);
            if i < bytes.len() {
                if bytes[i] != b',' {
                    return Err(MrParseError::MissingComma { offset: base + i });
                }
                i = skip_ws(i + 1);
                if i >= bytes.len() {
                    return Err(MrParseError::EmptySlot { offset: base + i });
                }
            }
        }
        Ok(MeaningRepresentation { slots })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    NoNameSlot,
    NoOtherSlots,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum E2eOutcome {
    Converted(TripleSet),
    Dropped(DropReason),
}

/// The first `name` slot becomes the subject of one triple per other slot.
pub fn e2e_to_tripleset(mr: &MeaningRepresentation) -> E2eOutcome {
    let Some(name_at) = mr.slots.iter().position(|(s, _)| s == NAME_SLOT) else {
        return E2eOutcome::Dropped(DropReason::NoNameSlot);
    };
    let subject = &mr.slots[name_at].1;
    let triples: Vec<Triple> = mr
        .slots
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != name_at)
        .map(|(_, (slot, value))| Triple::new(subject.clone(), slot.clone(), value.clone()))
        .collect();
    if triples.is_empty() {
        return E2eOutcome::Dropped(DropReason::NoOtherSlots);
    }
    E2eOutcome::Converted(TripleSet::new(triples, Provenance::E2e))
}

#[derive(Debug, Error)]
pub enum E2eCsvError {
    #[error("csv record {record}: {message}")]
    Csv { record: usize, message: String },
    #[error("csv record {record}: {source}")]
    Mr {
        record: usize,
        #[source]
        source: MrParseError,
    },
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct E2eConversion {
    pub entries: Vec<CorpusEntry>,
    pub dropped: usize,
    pub skipped_empty_refs: usize,
}

#[derive(Deserialize)]
struct E2eRow {
    mr: String,
    #[serde(rename = "ref")]
    reference: String,
}

/// Converts an `(mr, ref)` CSV. Rows sharing an MR become one entry with
/// several realizations, in first-appearance order. Entry ids are `Id1`,
/// `Id2`, ... in that order.
pub fn convert_e2e_csv<R: Read>(reader: R) -> Result<E2eConversion, E2eCsvError> {
    let mut csv = csv::Reader::from_reader(reader);
    let mut order: Vec<String> = Vec::new();
    let mut groups: std::collections::HashMap<String, (TripleSet, Vec<Realization>)> =
        std::collections::HashMap::new();
    let mut out = E2eConversion::default();
    for (i, row) in csv.deserialize::<E2eRow>().enumerate() {
        let record = i + 1;
        let row = row.map_err(|e| E2eCsvError::Csv {
            record,
            message: e.to_string(),
        })?;
        if row.reference.trim().is_empty() {
            out.skipped_empty_refs += 1;
            continue;
        }
        let realization = Realization::new(row.reference.trim(), Annotator::ExternalDataset, "E2E");
        if let Some((_, refs)) = groups.get_mut(&row.mr) {
            refs.push(realization);
            continue;
        }
        let mr = MeaningRepresentation::parse(&row.mr)
            .map_err(|source| E2eCsvError::Mr { record, source })?;
        match e2e_to_tripleset(&mr) {
            E2eOutcome::Converted(ts) => {
                order.push(row.mr.clone());
                groups.insert(row.mr, (ts, vec![realization]));
            }
            E2eOutcome::Dropped(_) => out.dropped += 1,
        }
    }
    for (i, mr) in order.into_iter().enumerate() {
        let (tripleset, realizations) = groups.remove(&mr).expect("grouped above");
        out.entries.push(CorpusEntry {
            eid: format!("Id{}", i + 1),
            category: "E2E".to_owned(),
            tripleset,
            realizations,
            table_id: None,
            has_empty_value: false,
        });
    }
    Ok(out)
}
