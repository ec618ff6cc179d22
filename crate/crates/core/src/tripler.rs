//! Highlight completion and triple extraction.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{NodeRef, OntologyTree, ROOT_LABEL};
use crate::table::{Table, TableSource};

/// Triplesets with more triples than this are discarded.
pub const MAX_TRIPLES: usize = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TriplerError {
    #[error("row {row} is out of range for table {table_id} ({rows} rows)")]
    RowOutOfRange {
        table_id: String,
        row: usize,
        rows: usize,
    },
    #[error("highlighted node {0} is not in the ontology tree")]
    UnknownNode(NodeRef),
    #[error("highlight is empty")]
    EmptyHighlight,
    #[error("tripleset has {count} triples, more than the limit of {MAX_TRIPLES}")]
    Oversize { count: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EntryError {
    #[error("entry has no realizations")]
    EmptyRealization,
    #[error("realization {index} has empty text")]
    EmptyRealizationText { index: usize },
    #[error("entry has no triples")]
    EmptyTripleSet,
    #[error("entry has {count} triples, more than the limit of {MAX_TRIPLES}")]
    Oversize { count: usize },
}

/// Cells of one row selected for description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Highlight {
    pub table_id: String,
    pub row_index: usize,
    pub nodes: BTreeSet<NodeRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

impl Triple {
    pub fn new(
        subject: impl Into<String>,
        predicate: impl Into<String>,
        object: impl Into<String>,
    ) -> Self {
        Triple {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
        }
    }
}

/// Where a tripleset came from.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    #[default]
    Unspecified,
    Wikitablequestions,
    Wikisql,
    WikisqlDeclarative,
    Webnlg,
    E2e,
    Synthetic,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Unspecified => "unspecified",
            Provenance::Wikitablequestions => "wikitablequestions",
            Provenance::Wikisql => "wikisql",
            Provenance::WikisqlDeclarative => "wikisql_declarative",
            Provenance::Webnlg => "webnlg",
            Provenance::E2e => "e2e",
            Provenance::Synthetic => "synthetic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "unspecified" => Provenance::Unspecified,
            "wikitablequestions" => Provenance::Wikitablequestions,
            "wikisql" => Provenance::Wikisql,
            "wikisql_declarative" => Provenance::WikisqlDeclarative,
            "webnlg" => Provenance::Webnlg,
            "e2e" => Provenance::E2e,
            "synthetic" => Provenance::Synthetic,
            _ => return None,
        })
    }
}

impl From<TableSource> for Provenance {
    fn from(source: TableSource) -> Self {
        match source {
            TableSource::Wikitablequestions => Provenance::Wikitablequestions,
            TableSource::Wikisql => Provenance::Wikisql,
            TableSource::Synthetic => Provenance::Synthetic,
            TableSource::Other => Provenance::Unspecified,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleSet {
    pub triples: Vec<Triple>,
    #[serde(default)]
    pub provenance: Provenance,
}

impl TripleSet {
    pub fn new(triples: Vec<Triple>, provenance: Provenance) -> Self {
        TripleSet {
            triples,
            provenance,
        }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Annotator {
    Internal,
    Mturk,
    AutoDeclarative,
    #[default]
    ExternalDataset,
}

impl Annotator {
    pub fn as_str(self) -> &'static str {
        match self {
            Annotator::Internal => "internal",
            Annotator::Mturk => "mturk",
            Annotator::AutoDeclarative => "auto_declarative",
            Annotator::ExternalDataset => "external_dataset",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "internal" => Annotator::Internal,
            "mturk" => Annotator::Mturk,
            "auto_declarative" => Annotator::AutoDeclarative,
            "external_dataset" => Annotator::ExternalDataset,
            _ => return None,
        })
    }
}

/// One surface realization of a tripleset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Realization {
    pub text: String,
    #[serde(default)]
    pub annotator: Annotator,
    /// Free-form origin label, e.g. the source dataset name.
    #[serde(default)]
    pub comment: String,
}

impl Realization {
    pub fn new(text: impl Into<String>, annotator: Annotator, comment: impl Into<String>) -> Self {
        Realization {
            text: text.into(),
            annotator,
            comment: comment.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub eid: String,
    pub category: String,
    pub tripleset: TripleSet,
    pub realizations: Vec<Realization>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_id: Option<String>,
    /// Set when some triple carries an empty cell value.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub has_empty_value: bool,
}

impl CorpusEntry {
    pub fn size(&self) -> usize {
        self.tripleset.len()
    }

    /// Checks the invariants `assemble_entry` establishes.
    pub fn check(&self) -> Result<(), EntryError> {
        check_tripleset(&self.tripleset)?;
        if self.realizations.is_empty() {
            return Err(EntryError::EmptyRealization);
        }
        if let Some(index) = self
            .realizations
            .iter()
            .position(|r| r.text.trim().is_empty())
        {
            return Err(EntryError::EmptyRealizationText { index });
        }
        Ok(())
    }
}

fn check_tripleset(ts: &TripleSet) -> Result<(), EntryError> {
    match ts.len() {
        0 => Err(EntryError::EmptyTripleSet),
        n if n > MAX_TRIPLES => Err(EntryError::Oversize { count: n }),
        _ => Ok(()),
    }
}

/// Pairs a tripleset with its realizations. Realization text is trimmed.
pub fn assemble_entry(
    tripleset: TripleSet,
    realizations: Vec<Realization>,
    category: impl Into<String>,
    eid: impl Into<String>,
) -> Result<CorpusEntry, EntryError> {
    let realizations = realizations
        .into_iter()
        .map(|mut r| {
            let trimmed = r.text.trim();
            if trimmed.len() != r.text.len() {
                r.text = trimmed.to_owned();
            }
            r
        })
        .collect();
    let entry = CorpusEntry {
        eid: eid.into(),
        category: category.into(),
        tripleset,
        realizations,
        table_id: None,
        has_empty_value: false,
    };
    entry.check()?;
    Ok(entry)
}

/// Extends `nodes` with every node on the paths up to their lowest common
/// ancestor (inclusive), making the set connected.
pub fn complete_subtree(tree: &OntologyTree, nodes: &BTreeSet<NodeRef>) -> BTreeSet<NodeRef> {
    let chains: Vec<Vec<NodeRef>> = nodes
        .iter()
        .map(|&n| {
            let mut chain = vec![n];
            chain.extend(tree.ancestors(n));
            chain
        })
        .collect();
    let Some(first) = chains.first() else {
        return BTreeSet::new();
    };
    let lca = first
        .iter()
        .copied()
        .find(|candidate| chains[1..].iter().all(|c| c.contains(candidate)));
    let Some(lca) = lca else {
        return nodes.clone();
    };
    let mut out = BTreeSet::new();
    for chain in &chains {
        for &n in chain {
            out.insert(n);
            if n == lca {
                break;
            }
        }
    }
    out
}

/// Value of every tree node for one table row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueAssignment {
    values: BTreeMap<NodeRef, String>,
    empty: BTreeSet<NodeRef>,
    provenance: Provenance,
}

impl ValueAssignment {
    pub fn get(&self, node: NodeRef) -> Option<&str> {
        self.values.get(&node).map(String::as_str)
    }

    /// Nodes whose value is empty after trimming.
    pub fn empty_nodes(&self) -> &BTreeSet<NodeRef> {
        &self.empty
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
}

pub fn instantiate(
    tree: &OntologyTree,
    table: &Table,
    row_index: usize,
) -> Result<ValueAssignment, TriplerError> {
    let row = table
        .row(row_index)
        .ok_or_else(|| TriplerError::RowOutOfRange {
            table_id: table.id().to_owned(),
            row: row_index,
            rows: table.row_count(),
        })?;
    let mut values = BTreeMap::new();
    let mut empty = BTreeSet::new();
    for node in tree.nodes() {
        let value = match node {
            NodeRef::Root => ROOT_LABEL,
            NodeRef::Title => table.title(),
            NodeRef::Column(i) => row.get(i).map_or("", String::as_str),
        };
        if node != NodeRef::Root && value.trim().is_empty() {
            empty.insert(node);
        }
        values.insert(node, value.to_owned());
    }
    Ok(ValueAssignment {
        values,
        empty,
        provenance: table.source().into(),
    })
}

/// One `(value(parent(N)), label(N), value(N))` triple per non-root node of
/// `subtree`, in tree pre-order. The parent's value is used even when the
/// parent is outside the subtree.
pub fn extract_triples(
    subtree: &BTreeSet<NodeRef>,
    assignment: &ValueAssignment,
    tree: &OntologyTree,
) -> Result<TripleSet, TriplerError> {
    let mut triples = Vec::new();
    for node in tree.preorder() {
        if node == NodeRef::Root || !subtree.contains(&node) {
            continue;
        }
        let parent = tree
            .parent(node)
            .expect("pre-order nodes below the root have parents");
        triples.push(Triple::new(
            assignment.get(parent).unwrap_or_default(),
            tree.label(node).unwrap_or_default(),
            assignment.get(node).unwrap_or_default(),
        ));
    }
    if triples.len() > MAX_TRIPLES {
        return Err(TriplerError::Oversize {
            count: triples.len(),
        });
    }
    Ok(TripleSet::new(triples, assignment.provenance()))
}

/// Completes, instantiates and extracts in one go. The flag reports whether
/// any extracted triple carries an empty value.
pub fn highlight_to_tripleset(
    tree: &OntologyTree,
    table: &Table,
    highlight: &Highlight,
) -> Result<(TripleSet, bool), TriplerError> {
    if highlight.nodes.is_empty() {
        return Err(TriplerError::EmptyHighlight);
    }
    if let Some(&bad) = highlight.nodes.iter().find(|&&n| !tree.contains(n)) {
        return Err(TriplerError::UnknownNode(bad));
    }
    let subtree = complete_subtree(tree, &highlight.nodes);
    let assignment = instantiate(tree, table, highlight.row_index)?;
    let ts = extract_triples(&subtree, &assignment, tree)?;
    let has_empty = subtree.iter().any(|n| {
        *n != NodeRef::Root
            && (assignment.empty_nodes().contains(n)
                || tree
                    .parent(*n)
                    .is_some_and(|p| assignment.empty_nodes().contains(&p)))
    });
    Ok((ts, has_empty))
}
