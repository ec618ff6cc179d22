//! Column ontology trees.
//!
//! Every tree is rooted at `[TABLECONTEXT]`. Columns hang below the root,
//! below the optional `[TITLE]` node, or below another column, as given by a
//! per-column parent annotation.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::table::Table;

pub const ROOT_LABEL: &str = "[TABLECONTEXT]";
pub const TITLE_LABEL: &str = "[TITLE]";

/// Identity of a node in a table's ontology tree.
///
/// Ordering is Root, Title, then columns by index; that order is also the
/// sibling order used everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeRef {
    Root,
    Title,
    Column(usize),
}

/// Parent of one annotated column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParentRef {
    RootChild,
    TitleChild,
    Column(usize),
}

impl ParentRef {
    pub fn node(self) -> NodeRef {
        match self {
            ParentRef::RootChild => NodeRef::Root,
            ParentRef::TitleChild => NodeRef::Title,
            ParentRef::Column(i) => NodeRef::Column(i),
        }
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRef::Root => f.write_str("ROOT"),
            NodeRef::Title => f.write_str("TITLE"),
            NodeRef::Column(i) => write!(f, "{i}"),
        }
    }
}

// Both node and parent references share the wire form "ROOT" | "TITLE" | integer.

impl Serialize for NodeRef {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            NodeRef::Root => serializer.serialize_str("ROOT"),
            NodeRef::Title => serializer.serialize_str("TITLE"),
            NodeRef::Column(i) => serializer.serialize_u64(*i as u64),
        }
    }
}

struct NodeRefVisitor;

impl Visitor<'_> for NodeRefVisitor {
    type Value = NodeRef;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("\"ROOT\", \"TITLE\" or a column index")
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<NodeRef, E> {
        usize::try_from(v)
            .map(NodeRef::Column)
            .map_err(|_| E::custom("column index out of range"))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<NodeRef, E> {
        u64::try_from(v)
            .map_err(|_| E::custom("negative column index"))
            .and_then(|v| self.visit_u64(v))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<NodeRef, E> {
        match v {
            "ROOT" => Ok(NodeRef::Root),
            "TITLE" => Ok(NodeRef::Title),
            other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
        }
    }
}

impl<'de> Deserialize<'de> for NodeRef {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(NodeRefVisitor)
    }
}

impl Serialize for ParentRef {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.node().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ParentRef {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(match NodeRef::deserialize(deserializer)? {
            NodeRef::Root => ParentRef::RootChild,
            NodeRef::Title => ParentRef::TitleChild,
            NodeRef::Column(i) => ParentRef::Column(i),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TitleShape {
    /// `[TITLE]` sits under the root next to root-level columns.
    #[default]
    TitleUnderRoot,
    /// `[TITLE]` is the only child of the root.
    TitleAsSoleChild,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnnotationError {
    #[error("annotation for {table_id}: column {column} is a root child but the title is the sole child of the root")]
    RootChildUnderSoleTitle { table_id: String, column: usize },
}

/// Per-column parent annotation for one table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawAnnotation")]
pub struct OntologyAnnotation {
    table_id: String,
    #[serde(default)]
    title_shape: TitleShape,
    parents: Vec<ParentRef>,
}

#[derive(Deserialize)]
struct RawAnnotation {
    table_id: String,
    #[serde(default)]
    title_shape: TitleShape,
    parents: Vec<ParentRef>,
}

impl TryFrom<RawAnnotation> for OntologyAnnotation {
    type Error = AnnotationError;

    fn try_from(raw: RawAnnotation) -> Result<Self, Self::Error> {
        OntologyAnnotation::new(raw.table_id, raw.parents, raw.title_shape)
    }
}

impl OntologyAnnotation {
    pub fn new(
        table_id: impl Into<String>,
        parents: Vec<ParentRef>,
        title_shape: TitleShape,
    ) -> Result<Self, AnnotationError> {
        let table_id = table_id.into();
        if title_shape == TitleShape::TitleAsSoleChild {
            if let Some(column) = parents.iter().position(|p| *p == ParentRef::RootChild) {
                return Err(AnnotationError::RootChildUnderSoleTitle { table_id, column });
            }
        }
        Ok(OntologyAnnotation {
            table_id,
            title_shape,
            parents,
        })
    }

    pub fn table_id(&self) -> &str {
        &self.table_id
    }

    pub fn parents(&self) -> &[ParentRef] {
        &self.parents
    }

    pub fn title_shape(&self) -> TitleShape {
        self.title_shape
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BuildError {
    #[error("annotation is for table {annotation}, not {table}")]
    TableMismatch { table: String, annotation: String },
    #[error("annotation has {parents} parents for {columns} columns")]
    ColumnCountMismatch { parents: usize, columns: usize },
    #[error("column {column} references invalid parent column {parent}")]
    BadIndex { column: usize, parent: usize },
    #[error("parent links form a cycle through columns {columns:?}")]
    Cycle { columns: Vec<usize> },
    #[error("nodes {nodes:?} cannot reach the root")]
    Disconnected { nodes: Vec<NodeRef> },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeShapeError {
    #[error("tree has no root node")]
    MissingRoot,
    #[error("root node must not have a parent")]
    RootHasParent,
    #[error("node {0} appears more than once")]
    DuplicateNode(NodeRef),
    #[error("node {node} has unknown parent {parent}")]
    UnknownParent { node: NodeRef, parent: NodeRef },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct TreeNode {
    node: NodeRef,
    label: String,
    parent: Option<usize>,
}

/// Arena-backed ontology tree. May hold an invalid shape when built through
/// [`OntologyTree::from_links`]; [`validate_tree`] reports such defects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OntologyTree {
    nodes: Vec<TreeNode>,
    index: BTreeMap<NodeRef, usize>,
    children: Vec<Vec<usize>>,
}

impl OntologyTree {
    /// Assembles a tree from `(node, label, parent)` links without checking
    /// connectivity or acyclicity.
    pub fn from_links<I, S>(links: I) -> Result<Self, TreeShapeError>
    where
        I: IntoIterator<Item = (NodeRef, S, Option<NodeRef>)>,
        S: Into<String>,
    {
        let mut sorted: BTreeMap<NodeRef, (String, Option<NodeRef>)> = BTreeMap::new();
        for (node, label, parent) in links {
            if sorted.insert(node, (label.into(), parent)).is_some() {
                return Err(TreeShapeError::DuplicateNode(node));
            }
        }
        match sorted.get(&NodeRef::Root) {
            None => return Err(TreeShapeError::MissingRoot),
            Some((_, Some(_))) => return Err(TreeShapeError::RootHasParent),
            Some(_) => {}
        }
        let index: BTreeMap<NodeRef, usize> =
            sorted.keys().enumerate().map(|(i, n)| (*n, i)).collect();
        let mut nodes = Vec::with_capacity(sorted.len());
        for (node, (label, parent)) in sorted {
            let parent = match parent {
                None => None,
                Some(p) => Some(
                    *index
                        .get(&p)
                        .ok_or(TreeShapeError::UnknownParent { node, parent: p })?,
                ),
            };
            nodes.push(TreeNode {
                node,
                label,
                parent,
            });
        }
        let mut children = vec![Vec::new(); nodes.len()];
        for (i, n) in nodes.iter().enumerate() {
            if let Some(p) = n.parent {
                children[p].push(i);
            }
        }
        Ok(OntologyTree {
            nodes,
            index,
            children,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, node: NodeRef) -> bool {
        self.index.contains_key(&node)
    }

    pub fn has_title(&self) -> bool {
        self.contains(NodeRef::Title)
    }

    /// All nodes in sibling order (Root, Title, columns).
    pub fn nodes(&self) -> impl Iterator<Item = NodeRef> + '_ {
        self.nodes.iter().map(|n| n.node)
    }

    pub fn label(&self, node: NodeRef) -> Option<&str> {
        self.index.get(&node).map(|&i| self.nodes[i].label.as_str())
    }

    pub fn parent(&self, node: NodeRef) -> Option<NodeRef> {
        let i = *self.index.get(&node)?;
        self.nodes[i].parent.map(|p| self.nodes[p].node)
    }

    pub fn children(&self, node: NodeRef) -> impl Iterator<Item = NodeRef> + '_ {
        self.index
            .get(&node)
            .map(|&i| self.children[i].as_slice())
            .unwrap_or(&[])
            .iter()
            .map(|&c| self.nodes[c].node)
    }

    pub fn child_count(&self, node: NodeRef) -> usize {
        self.index.get(&node).map_or(0, |&i| self.children[i].len())
    }

    /// Other children of `node`'s parent, in sibling order.
    pub fn siblings(&self, node: NodeRef) -> Vec<NodeRef> {
        match self.parent(node) {
            Some(p) => self.children(p).filter(|&c| c != node).collect(),
            None => Vec::new(),
        }
    }

    /// Ancestors from the parent upwards. Stops early on a cycle.
    pub fn ancestors(&self, node: NodeRef) -> Vec<NodeRef> {
        let mut out = Vec::new();
        let mut current = node;
        while let Some(p) = self.parent(current) {
            if p == node || out.contains(&p) {
                break;
            }
            out.push(p);
            current = p;
        }
        out
    }

    /// Number of edges from the root, or `None` when the root is unreachable.
    pub fn depth_of(&self, node: NodeRef) -> Option<usize> {
        if node == NodeRef::Root {
            return self.contains(node).then_some(0);
        }
        let ancestors = self.ancestors(node);
        (ancestors.last() == Some(&NodeRef::Root)).then_some(ancestors.len())
    }

    /// Nodes reachable from the root, parents before children, siblings in order.
    pub fn preorder(&self) -> Vec<NodeRef> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let Some(&root) = self.index.get(&NodeRef::Root) else {
            return out;
        };
        let mut stack = vec![root];
        let mut seen = vec![false; self.nodes.len()];
        while let Some(i) = stack.pop() {
            if std::mem::replace(&mut seen[i], true) {
                continue;
            }
            out.push(self.nodes[i].node);
            stack.extend(self.children[i].iter().rev());
        }
        out
    }
}

/// Builds the ontology tree for `table` from its parent annotation.
pub fn build_tree(
    table: &Table,
    annotation: &OntologyAnnotation,
) -> Result<OntologyTree, BuildError> {
    if annotation.table_id() != table.id() {
        return Err(BuildError::TableMismatch {
            table: table.id().to_owned(),
            annotation: annotation.table_id().to_owned(),
        });
    }
    let parents = annotation.parents();
    let columns = table.column_count();
    if parents.len() != columns {
        return Err(BuildError::ColumnCountMismatch {
            parents: parents.len(),
            columns,
        });
    }
    for (column, parent) in parents.iter().enumerate() {
        if let ParentRef::Column(p) = *parent {
            if p >= columns || p == column {
                return Err(BuildError::BadIndex { column, parent: p });
            }
        }
    }
    if let Some(columns) = find_column_cycle(parents) {
        return Err(BuildError::Cycle { columns });
    }

    let with_title = !table.title().is_empty()
        || annotation.title_shape() == TitleShape::TitleAsSoleChild
        || parents.contains(&ParentRef::TitleChild);
    let mut links: Vec<(NodeRef, String, Option<NodeRef>)> =
        vec![(NodeRef::Root, ROOT_LABEL.to_owned(), None)];
    if with_title {
        links.push((NodeRef::Title, TITLE_LABEL.to_owned(), Some(NodeRef::Root)));
    }
    for (i, (label, parent)) in table.headers().iter().zip(parents).enumerate() {
        links.push((NodeRef::Column(i), label.clone(), Some(parent.node())));
    }
    let tree = OntologyTree::from_links(links)
        .expect("links are unique, rooted and reference existing nodes");

    let unreachable: Vec<NodeRef> = tree
        .nodes()
        .filter(|&n| tree.depth_of(n).is_none())
        .collect();
    if !unreachable.is_empty() {
        return Err(BuildError::Disconnected { nodes: unreachable });
    }
    Ok(tree)
}

/// First cycle among column-to-column links, scanning columns in index order.
fn find_column_cycle(parents: &[ParentRef]) -> Option<Vec<usize>> {
    // 0 = unvisited, 1 = on current path, 2 = done
    let mut state = vec![0u8; parents.len()];
    for start in 0..parents.len() {
        let mut path = Vec::new();
        let mut current = start;
        loop {
            match state[current] {
                2 => break,
                1 => {
                    let from = path.iter().position(|&c| c == current).unwrap();
                    return Some(path[from..].to_vec());
                }
                _ => {}
            }
            state[current] = 1;
            path.push(current);
            match parents[current] {
                ParentRef::Column(p) if p < parents.len() => current = p,
                _ => break,
            }
        }
        for c in path {
            state[c] = 2;
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Finding {
    /// Nodes that cannot reach the root and are not themselves on a cycle.
    Disconnected {
        nodes: Vec<NodeRef>,
    },
    /// One parent-link cycle.
    Cyclic {
        nodes: Vec<NodeRef>,
    },
    MissingColumn {
        index: usize,
        label: String,
    },
    UnknownColumn {
        index: usize,
    },
    LabelMismatch {
        index: usize,
        expected: String,
        found: String,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.findings.is_empty()
    }
}

/// Checks connectivity, acyclicity and column coverage of `tree` against `table`.
pub fn validate_tree(tree: &OntologyTree, table: &Table) -> ValidationReport {
    let mut findings = Vec::new();

    // Walk parent links from every node; classify by where each walk ends.
    let n = tree.nodes.len();
    let mut on_cycle = vec![false; n];
    let mut reaches_root = vec![false; n];
    let mut resolved = vec![false; n];
    let mut cycles: Vec<Vec<NodeRef>> = Vec::new();
    for start in 0..n {
        let mut path = Vec::new();
        let mut current = Some(start);
        let mut ok = false;
        while let Some(c) = current {
            if resolved[c] {
                ok = reaches_root[c];
                break;
            }
            if let Some(from) = path.iter().position(|&p| p == c) {
                let cycle: Vec<usize> = path[from..].to_vec();
                for &m in &cycle {
                    on_cycle[m] = true;
                }
                cycles.push(cycle.iter().map(|&m| tree.nodes[m].node).collect());
                break;
            }
            path.push(c);
            if tree.nodes[c].node == NodeRef::Root {
                ok = true;
                break;
            }
            current = tree.nodes[c].parent;
        }
        for p in path {
            resolved[p] = true;
            reaches_root[p] = ok;
        }
    }

    let disconnected: Vec<NodeRef> = (0..n)
        .filter(|&i| !reaches_root[i] && !on_cycle[i])
        .map(|i| tree.nodes[i].node)
        .collect();
    if !disconnected.is_empty() {
        findings.push(Finding::Disconnected {
            nodes: disconnected,
        });
    }
    for mut nodes in cycles {
        nodes.sort();
        findings.push(Finding::Cyclic { nodes });
    }

    for (index, label) in table.headers().iter().enumerate() {
        match tree.label(NodeRef::Column(index)) {
            None => findings.push(Finding::MissingColumn {
                index,
                label: label.clone(),
            }),
            Some(found) if found != label => findings.push(Finding::LabelMismatch {
                index,
                expected: label.clone(),
                found: found.to_owned(),
            }),
            Some(_) => {}
        }
    }
    for node in tree.nodes() {
        if let NodeRef::Column(index) = node {
            if index >= table.column_count() {
                findings.push(Finding::UnknownColumn { index });
            }
        }
    }
    ValidationReport { findings }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OntologyStats {
    /// Maximum number of edges from the root to any node.
    pub depth: usize,
    /// Nodes excluding the root; the title node counts.
    pub node_count: usize,
    /// Mean child count over nodes that have children (root included).
    pub branching_factor: f64,
}

pub fn ontology_stats(tree: &OntologyTree) -> OntologyStats {
    let depth = tree
        .nodes()
        .filter_map(|n| tree.depth_of(n))
        .max()
        .unwrap_or(0);
    let (parents, children) = tree
        .children
        .iter()
        .filter(|c| !c.is_empty())
        .fold((0usize, 0usize), |(p, c), kids| (p + 1, c + kids.len()));
    OntologyStats {
        depth,
        node_count: tree.len().saturating_sub(1),
        branching_factor: if parents == 0 {
            0.0
        } else {
            children as f64 / parents as f64
        },
    }
}
