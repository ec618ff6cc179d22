//! Corpus statistics: sizes, diversity and realization length.
//!
//! Counting goes through [`StatsAccumulator`], whose `merge` is commutative
//! and associative, so shards can be counted independently.
//!
//! Tokenization: whitespace split, then leading and trailing punctuation
//! characters are peeled off into tokens of their own. Only tokens containing
//! an alphanumeric character count as words; vocabulary is the set of
//! lowercased words. A sentence ends at `.`, `!` or `?` followed by
//! whitespace or the end of the text.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::tripler::{CorpusEntry, Triple};

/// Whitespace-split, punctuation-peeled tokens.
pub fn tokenize(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let core_start = chunk
            .char_indices()
            .find(|(_, c)| c.is_alphanumeric())
            .map(|(i, _)| i);
        let Some(start) = core_start else {
            out.extend(
                chunk
                    .char_indices()
                    .map(|(i, c)| &chunk[i..i + c.len_utf8()]),
            );
            continue;
        };
        let end = chunk
            .char_indices()
            .rev()
            .find(|(_, c)| c.is_alphanumeric())
            .map(|(i, c)| i + c.len_utf8())
            .unwrap_or(chunk.len());
        out.extend(
            chunk[..start]
                .char_indices()
                .map(|(i, c)| &chunk[i..i + c.len_utf8()]),
        );
        out.push(&chunk[start..end]);
        out.extend(
            chunk[end..]
                .char_indices()
                .map(|(i, c)| &chunk[end + i..end + i + c.len_utf8()]),
        );
    }
    out
}

/// Tokens that contain at least one alphanumeric character.
pub fn words(text: &str) -> impl Iterator<Item = &str> {
    tokenize(text)
        .into_iter()
        .filter(|t| t.chars().any(char::is_alphanumeric))
}

pub fn count_sentences(text: &str) -> usize {
    let mut count = 0;
    let mut has_content = false;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c.is_alphanumeric() {
            has_content = true;
        }
        if matches!(c, '.' | '!' | '?') && chars.peek().is_none_or(|n| n.is_whitespace()) {
            if has_content {
                count += 1;
            }
            has_content = false;
        }
    }
    count + usize::from(has_content)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TriplesPerSet {
    pub min: usize,
    pub median: f64,
    pub max: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    /// Tripleset/realization pairs.
    pub pair_count: usize,
    pub entry_count: usize,
    pub unique_predicates: usize,
    pub unique_triples: usize,
    pub triples_per_set: TriplesPerSet,
    pub vocab_size: usize,
    pub words_per_sr: f64,
    pub sentences_per_sr: f64,
    pub table_count: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StatsAccumulator {
    pairs: usize,
    entries: usize,
    words: usize,
    sentences: usize,
    vocab: BTreeSet<String>,
    triples: BTreeSet<Triple>,
    predicates: BTreeSet<String>,
    tables: BTreeSet<String>,
    /// Tripleset size → number of entries.
    sizes: BTreeMap<usize, usize>,
}

impl StatsAccumulator {
    pub fn add(&mut self, entry: &CorpusEntry) {
        self.entries += 1;
        *self.sizes.entry(entry.tripleset.len()).or_default() += 1;
        for t in &entry.tripleset.triples {
            self.predicates.insert(t.predicate.clone());
            self.triples.insert(t.clone());
        }
        if let Some(id) = &entry.table_id {
            self.tables.insert(id.clone());
        }
        for r in &entry.realizations {
            self.pairs += 1;
            self.sentences += count_sentences(&r.text);
            for w in words(&r.text) {
                self.words += 1;
                self.vocab.insert(w.to_lowercase());
            }
        }
    }

    pub fn merge(mut self, other: StatsAccumulator) -> StatsAccumulator {
        self.pairs += other.pairs;
        self.entries += other.entries;
        self.words += other.words;
        self.sentences += other.sentences;
        self.vocab.extend(other.vocab);
        self.triples.extend(other.triples);
        self.predicates.extend(other.predicates);
        self.tables.extend(other.tables);
        for (size, n) in other.sizes {
            *self.sizes.entry(size).or_default() += n;
        }
        self
    }

    pub fn finish(&self) -> CorpusStats {
        let mean = |total: usize| {
            if self.pairs == 0 {
                0.0
            } else {
                total as f64 / self.pairs as f64
            }
        };
        CorpusStats {
            pair_count: self.pairs,
            entry_count: self.entries,
            unique_predicates: self.predicates.len(),
            unique_triples: self.triples.len(),
            triples_per_set: self.triples_per_set(),
            vocab_size: self.vocab.len(),
            words_per_sr: mean(self.words),
            sentences_per_sr: mean(self.sentences),
            table_count: self.tables.len(),
        }
    }

    fn triples_per_set(&self) -> TriplesPerSet {
        let (Some((&min, _)), Some((&max, _))) =
            (self.sizes.first_key_value(), self.sizes.last_key_value())
        else {
            return TriplesPerSet::default();
        };
        let nth = |k: usize| {
            let mut seen = 0;
            for (&size, &n) in &self.sizes {
                seen += n;
                if seen > k {
                    return size;
                }
            }
            max
        };
        let median = if self.entries % 2 == 1 {
            nth(self.entries / 2) as f64
        } else {
            (nth(self.entries / 2 - 1) + nth(self.entries / 2)) as f64 / 2.0
        };
        TriplesPerSet { min, median, max }
    }
}

pub fn compute_stats(entries: &[CorpusEntry]) -> CorpusStats {
    let mut acc = StatsAccumulator::default();
    entries.iter().for_each(|e| acc.add(e));
    acc.finish()
}

/// Statistics per provenance tag, plus `"all"`.
pub fn stats_by_partition(entries: &[CorpusEntry]) -> BTreeMap<String, CorpusStats> {
    let mut parts: BTreeMap<String, StatsAccumulator> = BTreeMap::new();
    for e in entries {
        parts
            .entry(e.tripleset.provenance.as_str().to_owned())
            .or_default()
            .add(e);
    }
    let all = parts
        .values()
        .cloned()
        .fold(StatsAccumulator::default(), StatsAccumulator::merge);
    let mut out: BTreeMap<String, CorpusStats> =
        parts.iter().map(|(k, v)| (k.clone(), v.finish())).collect();
    out.insert("all".to_owned(), all.finish());
    out
}

/// Fixed-width text table, one row per named statistics block.
pub fn render_table(rows: &[(String, CorpusStats)]) -> String {
    let header = [
        "partition",
        "pairs",
        "entries",
        "tables",
        "preds",
        "triples",
        "tps_min",
        "tps_med",
        "tps_max",
        "vocab",
        "words/sr",
        "sents/sr",
    ];
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(name, s)| {
            vec![
                name.clone(),
                s.pair_count.to_string(),
                s.entry_count.to_string(),
                s.table_count.to_string(),
                s.unique_predicates.to_string(),
                s.unique_triples.to_string(),
                s.triples_per_set.min.to_string(),
                format!("{:.1}", s.triples_per_set.median),
                s.triples_per_set.max.to_string(),
                s.vocab_size.to_string(),
                format!("{:.2}", s.words_per_sr),
                format!("{:.2}", s.sentences_per_sr),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|i| {
            body.iter()
                .map(|r| r[i].chars().count())
                .chain([header[i].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let mut l = String::new();
        for (i, cell) in cells.iter().enumerate() {
            if i == 0 {
                let _ = write!(l, "{cell:<w$}", w = widths[i]);
            } else {
                let _ = write!(l, "  {cell:>w$}", w = widths[i]);
            }
        }
        out.push_str(l.trim_end());
        out.push('\n');
    };
    line(header.to_vec());
    for r in &body {
        line(r.iter().map(String::as_str).collect());
    }
    out
}
