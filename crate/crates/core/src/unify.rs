//! Predicate canonicalization through a hand-maintained mapping table.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use thiserror::Error;

use crate::tripler::{CorpusEntry, Triple, TripleSet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MapError {
    #[error("line {line}: expected two tab-separated columns")]
    BadLine { line: usize },
    #[error("line {line}: empty predicate")]
    Empty { line: usize },
    #[error("line {line}: {raw:?} already maps to {existing:?}, not {new:?}")]
    Conflict {
        line: usize,
        raw: String,
        existing: String,
        new: String,
    },
    #[error("{raw:?} maps to {canonical:?}, which itself maps to {next:?}")]
    Chain {
        raw: String,
        canonical: String,
        next: String,
    },
    #[error("read failed: {0}")]
    Io(String),
}

/// Raw predicate to canonical predicate. Every canonical value that is also a
/// key maps to itself, so applying the map twice changes nothing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PredicateMap {
    entries: BTreeMap<String, String>,
}

impl PredicateMap {
    pub fn new<I, K, V>(pairs: I) -> Result<Self, MapError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        let mut entries = BTreeMap::new();
        for (i, (raw, canonical)) in pairs.into_iter().enumerate() {
            insert(&mut entries, i + 1, raw.into(), canonical.into())?;
        }
        check_closure(&entries)?;
        Ok(PredicateMap { entries })
    }

    /// Two tab-separated columns per line; blank lines and lines starting
    /// with `#` are skipped.
    pub fn from_tsv<R: BufRead>(reader: R) -> Result<Self, MapError> {
        let mut entries = BTreeMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| MapError::Io(e.to_string()))?;
            let number = i + 1;
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let (Some(raw), Some(canonical), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(MapError::BadLine { line: number });
            };
            insert(&mut entries, number, raw.to_owned(), canonical.to_owned())?;
        }
        check_closure(&entries)?;
        Ok(PredicateMap { entries })
    }

    pub fn get(&self, predicate: &str) -> Option<&str> {
        self.entries.get(predicate.trim()).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

fn insert(
    entries: &mut BTreeMap<String, String>,
    line: usize,
    raw: String,
    canonical: String,
) -> Result<(), MapError> {
    let raw = raw.trim().to_owned();
    let canonical = canonical.trim().to_owned();
    if raw.is_empty() || canonical.is_empty() {
        return Err(MapError::Empty { line });
    }
    match entries.get(&raw) {
        Some(existing) if *existing != canonical => Err(MapError::Conflict {
            line,
            raw,
            existing: existing.clone(),
            new: canonical,
        }),
        _ => {
            entries.insert(raw, canonical);
            Ok(())
        }
    }
}

fn check_closure(entries: &BTreeMap<String, String>) -> Result<(), MapError> {
    for (raw, canonical) in entries {
        if let Some(next) = entries.get(canonical) {
            if next != canonical {
                return Err(MapError::Chain {
                    raw: raw.clone(),
                    canonical: canonical.clone(),
                    next: next.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Replaces each mapped predicate; returns the distinct predicates that had
/// no entry. Subjects, objects and order are untouched.
pub fn unify_tripleset(ts: &TripleSet, map: &PredicateMap) -> (TripleSet, BTreeSet<String>) {
    let mut unmapped = BTreeSet::new();
    let triples = ts
        .triples
        .iter()
        .map(|t| match map.get(&t.predicate) {
            Some(canonical) => Triple {
                predicate: canonical.to_owned(),
                ..t.clone()
            },
            None => {
                unmapped.insert(t.predicate.clone());
                t.clone()
            }
        })
        .collect();
    (TripleSet::new(triples, ts.provenance), unmapped)
}

/// Unifies every entry in place and returns the union of unmapped predicates.
pub fn unify_corpus(entries: &mut [CorpusEntry], map: &PredicateMap) -> BTreeSet<String> {
    let mut unmapped = BTreeSet::new();
    for entry in entries {
        let (ts, missing) = unify_tripleset(&entry.tripleset, map);
        entry.tripleset = ts;
        unmapped.extend(missing);
    }
    unmapped
}

/// Distinct predicate strings, sorted.
pub fn unique_predicates(entries: &[CorpusEntry]) -> (usize, Vec<String>) {
    let set: BTreeSet<&str> = entries
        .iter()
        .flat_map(|e| e.tripleset.triples.iter().map(|t| t.predicate.as_str()))
        .collect();
    (set.len(), set.into_iter().map(str::to_owned).collect())
}
