//! Train/dev/test assignment that keeps similar tables on the same side.
//!
//! Tables are compared by the Jaccard similarity of their title and header
//! tokens. A seed sample is drawn for test, then every table more similar
//! than the threshold to a test table is pulled in, repeatedly, until nothing
//! changes. Dev is built the same way from what remains; the rest is train.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::stream;
use crate::table::Table;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSignature {
    pub table_id: String,
    pub tokens: BTreeSet<String>,
}

impl TableSignature {
    pub fn new<'a>(
        table_id: impl Into<String>,
        title: &'a str,
        headers: impl IntoIterator<Item = &'a str>,
    ) -> Self {
        let mut tokens = BTreeSet::new();
        for text in std::iter::once(title).chain(headers) {
            tokens.extend(tokenize(text));
        }
        TableSignature {
            table_id: table_id.into(),
            tokens,
        }
    }

    pub fn from_table(table: &Table) -> Self {
        Self::new(
            table.id(),
            table.title(),
            table.headers().iter().map(String::as_str),
        )
    }
}

/// Lowercase runs of alphanumeric characters.
fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// |A ∩ B| / |A ∪ B|, and 0 when both are empty.
pub fn jaccard(a: &TableSignature, b: &TableSignature) -> f64 {
    let inter = a.tokens.intersection(&b.tokens).count();
    let union = a.tokens.len() + b.tokens.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "train" => Some(Split::Train),
            "dev" => Some(Split::Dev),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub threshold: f64,
    pub test_seed_fraction: f64,
    pub dev_seed_fraction: f64,
    pub seed: u64,
}

impl SplitConfig {
    pub fn validate(&self) -> Result<(), SplitError> {
        let open = |x: f64| x > 0.0 && x < 1.0;
        if !open(self.threshold)
            || !open(self.test_seed_fraction)
            || !open(self.dev_seed_fraction)
            || self.test_seed_fraction + self.dev_seed_fraction >= 1.0
        {
            return Err(SplitError::BadConfig(*self));
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SplitError {
    #[error("invalid split configuration {0:?}")]
    BadConfig(SplitConfig),
    #[error("need at least 3 tables, got {0}")]
    TooFewTables(usize),
    #[error("table id {0:?} appears more than once")]
    DuplicateTable(String),
    #[error("the {} split ended up empty", .0.as_str())]
    Degenerate(Split),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub splits: BTreeMap<String, Split>,
    pub test_seeds: Vec<String>,
    pub dev_seeds: Vec<String>,
}

impl SplitAssignment {
    pub fn get(&self, table_id: &str) -> Option<Split> {
        self.splits.get(table_id).copied()
    }

    pub fn count(&self, split: Split) -> usize {
        self.splits.values().filter(|&&s| s == split).count()
    }

    pub fn members(&self, split: Split) -> impl Iterator<Item = &str> {
        self.splits
            .iter()
            .filter(move |(_, &s)| s == split)
            .map(|(id, _)| id.as_str())
    }

    /// `table_id<TAB>split` lines in table-id order.
    pub fn to_tsv(&self) -> String {
        self.splits
            .iter()
            .map(|(id, s)| format!("{id}\t{}\n", s.as_str()))
            .collect()
    }
}

/// Seeds and propagates without judging the outcome; empty splits are
/// allowed here.
pub fn propagate_splits(
    tables: &[TableSignature],
    config: &SplitConfig,
) -> Result<SplitAssignment, SplitError> {
    config.validate()?;
    if tables.len() < 3 {
        return Err(SplitError::TooFewTables(tables.len()));
    }
    let mut sorted: Vec<&TableSignature> = tables.iter().collect();
    sorted.sort_by(|a, b| a.table_id.cmp(&b.table_id));
    if let Some(w) = sorted.windows(2).find(|w| w[0].table_id == w[1].table_id) {
        return Err(SplitError::DuplicateTable(w[0].table_id.clone()));
    }
    let n = sorted.len();
    let neighbours: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && jaccard(sorted[i], sorted[j]) > config.threshold)
                .collect()
        })
        .collect();

    let mut rng = stream(config.seed);
    let mut assigned: Vec<Option<Split>> = vec![None; n];

    let all: Vec<usize> = (0..n).collect();
    let test_seeds = draw(&mut rng, &all, seed_count(config.test_seed_fraction, n));
    flood(&neighbours, &test_seeds, Split::Test, &mut assigned);

    let rest: Vec<usize> = (0..n).filter(|&i| assigned[i].is_none()).collect();
    let dev_seeds = draw(&mut rng, &rest, seed_count(config.dev_seed_fraction, n));
    flood(&neighbours, &dev_seeds, Split::Dev, &mut assigned);

    let id = |i: &usize| sorted[*i].table_id.clone();
    Ok(SplitAssignment {
        splits: (0..n)
            .map(|i| (id(&i), assigned[i].unwrap_or(Split::Train)))
            .collect(),
        test_seeds: test_seeds.iter().map(id).collect(),
        dev_seeds: dev_seeds.iter().map(id).collect(),
    })
}

/// `propagate_splits`, failing when any split is empty.
pub fn split(
    tables: &[TableSignature],
    config: &SplitConfig,
) -> Result<SplitAssignment, SplitError> {
    let assignment = propagate_splits(tables, config)?;
    for s in [Split::Train, Split::Dev, Split::Test] {
        if assignment.count(s) == 0 {
            return Err(SplitError::Degenerate(s));
        }
    }
    Ok(assignment)
}

fn seed_count(fraction: f64, n: usize) -> usize {
    (fraction * n as f64).round() as usize
}

fn draw(rng: &mut crate::rng::StreamRng, pool: &[usize], k: usize) -> Vec<usize> {
    let k = k.min(pool.len());
    let mut picked: Vec<usize> = sample(rng, pool.len(), k)
        .into_iter()
        .map(|i| pool[i])
        .collect();
    picked.sort_unstable();
    picked
}

/// Breadth-first closure over unassigned tables.
fn flood(neighbours: &[Vec<usize>], seeds: &[usize], split: Split, assigned: &mut [Option<Split>]) {
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &s in seeds {
        assigned[s] = Some(split);
        queue.push_back(s);
    }
    while let Some(i) = queue.pop_front() {
        for &j in &neighbours[i] {
            if assigned[j].is_none() {
                assigned[j] = Some(split);
                queue.push_back(j);
            }
        }
    }
}

/// Every `(a, b)` pair that breaks the separation rule: a test table similar
/// to a non-test table, or a dev table similar to a train table.
pub fn leaking_pairs(
    tables: &[TableSignature],
    assignment: &SplitAssignment,
    threshold: f64,
) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for a in tables {
        for b in tables {
            let (Some(sa), Some(sb)) = (assignment.get(&a.table_id), assignment.get(&b.table_id))
            else {
                continue;
            };
            let crosses = (sa == Split::Test && sb != Split::Test)
                || (sa == Split::Dev && sb == Split::Train);
            if crosses && jaccard(a, b) > threshold {
                out.push((a.table_id.clone(), b.table_id.clone()));
            }
        }
    }
    out
}
