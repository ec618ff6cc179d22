//! Connected-component sampling over ontology trees.
//!
//! A component is grown by a walk that, at each step, descends to an unvisited
//! child with probability `p` and otherwise moves to the next unvisited
//! sibling. `p = 1` degenerates to depth-first order, `p = 0` to
//! sibling-first order. The root is never part of a component; two root-level
//! nodes in one component are connected through it.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{NodeRef, OntologyTree};
use crate::rng::keyed_stream;

#[derive(Debug, Error, PartialEq)]
pub enum SamplerError {
    #[error("tree has no nodes below the root")]
    EmptyTree,
    #[error("size range [{min}, {max}] is invalid")]
    BadSizeRange { min: usize, max: usize },
    #[error("probability range [{min}, {max}] is invalid")]
    BadProbabilityRange { min: f64, max: f64 },
    #[error("start node {0} is not in the tree")]
    UnknownStart(NodeRef),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub size_min: usize,
    pub size_max: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub seed: u64,
}

impl SamplerConfig {
    /// Sizes in [2, 5] and expansion probability in [0.5, 0.7].
    pub fn with_seed(seed: u64) -> Self {
        SamplerConfig {
            size_min: 2,
            size_max: 5,
            p_min: 0.5,
            p_max: 0.7,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.size_min < 1 || self.size_min > self.size_max {
            return Err(SamplerError::BadSizeRange {
                min: self.size_min,
                max: self.size_max,
            });
        }
        let in_unit = |p: f64| (0.0..=1.0).contains(&p);
        if !in_unit(self.p_min) || !in_unit(self.p_max) || self.p_min > self.p_max {
            return Err(SamplerError::BadProbabilityRange {
                min: self.p_min,
                max: self.p_max,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub nodes: BTreeSet<NodeRef>,
    /// Nodes in the order the walk added them.
    pub visit_order: Vec<NodeRef>,
    pub p_used: f64,
    pub target_size: usize,
}

impl Component {
    pub fn size(&self) -> usize {
        self.nodes.len()
    }
}

/// Draws a target size, an expansion probability and a start node, then walks.
pub fn sample_component<R: Rng + ?Sized>(
    tree: &OntologyTree,
    config: &SamplerConfig,
    rng: &mut R,
) -> Result<Component, SamplerError> {
    config.validate()?;
    let starts: Vec<NodeRef> = tree.children(NodeRef::Root).collect();
    if starts.is_empty() {
        return Err(SamplerError::EmptyTree);
    }
    let target_size = rng.random_range(config.size_min..=config.size_max);
    let p = if config.p_min == config.p_max {
        config.p_min
    } else {
        rng.random_range(config.p_min..=config.p_max)
    };
    let start = starts[rng.random_range(0..starts.len())];
    walk_from(tree, start, target_size, p, rng)
}

/// The walk itself, with every random choice except per-step coin flips fixed.
pub fn walk_from<R: Rng + ?Sized>(
    tree: &OntologyTree,
    start: NodeRef,
    target_size: usize,
    p: f64,
    rng: &mut R,
) -> Result<Component, SamplerError> {
    if start == NodeRef::Root || !tree.contains(start) {
        return Err(SamplerError::UnknownStart(start));
    }
    let mut nodes = BTreeSet::from([start]);
    let mut visit_order = vec![start];
    let mut current = start;

    while nodes.len() < target_size {
        let child = tree.children(current).find(|c| !nodes.contains(c));
        let sibling = next_unvisited_sibling(tree, current, &nodes);
        let next = match (child, sibling) {
            (Some(c), Some(s)) => {
                if rng.random::<f64>() < p {
                    c
                } else {
                    s
                }
            }
            (Some(c), None) => c,
            (None, Some(s)) => s,
            (None, None) => {
                let has_move = |n: NodeRef| {
                    tree.children(n).any(|c| !nodes.contains(&c))
                        || next_unvisited_sibling(tree, n, &nodes).is_some()
                };
                let ancestor = tree
                    .ancestors(current)
                    .into_iter()
                    .take_while(|&a| a != NodeRef::Root)
                    .find(|&a| has_move(a));
                let resume = ancestor.or_else(|| {
                    visit_order
                        .iter()
                        .copied()
                        .find(|&n| tree.children(n).any(|c| !nodes.contains(&c)))
                });
                match resume {
                    Some(n) => {
                        current = n;
                        continue;
                    }
                    None => break,
                }
            }
        };
        nodes.insert(next);
        visit_order.push(next);
        current = next;
    }

    Ok(Component {
        nodes,
        visit_order,
        p_used: p,
        target_size,
    })
}

/// First unvisited sibling after `node`, wrapping around in sibling order.
fn next_unvisited_sibling(
    tree: &OntologyTree,
    node: NodeRef,
    visited: &BTreeSet<NodeRef>,
) -> Option<NodeRef> {
    let parent = tree.parent(node)?;
    let siblings: Vec<NodeRef> = tree.children(parent).collect();
    let at = siblings.iter().position(|&s| s == node)?;
    siblings[at + 1..]
        .iter()
        .chain(&siblings[..at])
        .copied()
        .find(|s| !visited.contains(s))
}

/// One sampled component tied to a table row, as exchanged between stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub table_id: String,
    pub row_index: usize,
    pub node_ids: Vec<NodeRef>,
    pub p_used: f64,
    pub target_size: usize,
}

/// Samples `per_row` components for every row of one table. The stream is
/// derived from `(config.seed, table_id)`, so tables can be processed in any
/// order or in parallel.
pub fn sample_table(
    tree: &OntologyTree,
    table_id: &str,
    row_count: usize,
    per_row: usize,
    config: &SamplerConfig,
) -> Result<Vec<ComponentRecord>, SamplerError> {
    let mut rng = keyed_stream(config.seed, table_id);
    let mut out = Vec::with_capacity(row_count * per_row);
    for row_index in 0..row_count {
        for _ in 0..per_row {
            let c = sample_component(tree, config, &mut rng)?;
            out.push(ComponentRecord {
                table_id: table_id.to_owned(),
                row_index,
                node_ids: c.nodes.into_iter().collect(),
                p_used: c.p_used,
                target_size: c.target_size,
            });
        }
    }
    Ok(out)
}
