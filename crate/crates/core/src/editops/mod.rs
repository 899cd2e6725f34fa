//! Graph editing for negative sampling, graph edit distance and hard-negative
//! selection.
//!
//! Random draws come from ChaCha8 seeded with the 64-bit seed, always as
//! `gen_range(0..n)` calls in the order documented on [`plan_edit`].

mod assignment;
pub mod ged;
mod levenshtein;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{graph_equal, Edge, EdgeType, LdGraph};

pub use assignment::{min_cost_assignment, min_cost_matching};
pub use ged::{ged, ged_with, GedConfig, GedResult};
pub use levenshtein::levenshtein;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EditError {
    #[error("cannot edit an empty graph")]
    EmptyGraph,
    #[error("deletion ratio must lie in [0, 1], got {0}")]
    BadTau(f64),
    #[error("number of seeds must be positive")]
    NoSeeds,
    #[error("no candidates to choose from")]
    NoCandidates,
    #[error("every candidate equals the reference graph")]
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EditConfig {
    pub tau: f64,
    pub num_seeds: usize,
    pub base_seed: u64,
}

impl Default for EditConfig {
    fn default() -> Self {
        EditConfig {
            tau: 0.1,
            num_seeds: 10,
            base_seed: 0,
        }
    }
}

impl EditConfig {
    pub fn check(&self) -> Result<(), EditError> {
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(EditError::BadTau(self.tau));
        }
        if self.num_seeds == 0 {
            return Err(EditError::NoSeeds);
        }
        Ok(())
    }

    /// Seed of candidate `i`.
    pub fn seed(&self, i: usize) -> u64 {
        self.base_seed.wrapping_add(i as u64)
    }
}

/// The random decisions behind one edit, resolved against a graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EditPlan {
    /// Remove these node ids, reconnecting around each.
    Delete { nodes: Vec<usize> },
    /// Copy node `node` as a new node and link `attach_to -> copy`.
    Duplicate {
        node: usize,
        edge_type: EdgeType,
        attach_to: usize,
    },
}

/// Number of nodes removed for ratio `tau`: `floor(tau * n)`, where a
/// product within 1e-9 below an integer counts as that integer.
pub fn deletion_count(tau: f64, n: usize) -> usize {
    ((tau * n as f64) + 1e-9).floor() as usize
}

/// Draw the edit for `graph`.
///
/// With `k = deletion_count(tau, |V|)`:
/// * `k > 0`: starting from all ids in ascending order, `k` times draw
///   `i = gen_range(0..remaining)` and take the `i`-th remaining id.
/// * `k == 0`: if the graph has edges, draw `e = gen_range(0..|E|)` over the
///   edges in `(src, dst, type)` order and copy `dst(e)` with `e`'s type;
///   otherwise draw `gen_range(0..|V|)` for the node and use `Flow`. Then draw
///   `gen_range(0..|V|)` for the node that links to the copy.
pub fn plan_edit(graph: &LdGraph, tau: f64, seed: u64) -> Result<EditPlan, EditError> {
    if graph.is_empty() {
        return Err(EditError::EmptyGraph);
    }
    if !(0.0..=1.0).contains(&tau) {
        return Err(EditError::BadTau(tau));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = graph.node_count();
    let k = deletion_count(tau, n);
    let ids: Vec<usize> = graph.nodes().iter().map(|x| x.id).collect();
    if k > 0 {
        let mut pool = ids;
        let mut nodes: Vec<usize> = (0..k)
            .map(|_| {
                let i = rng.gen_range(0..pool.len());
                pool.remove(i)
            })
            .collect();
        nodes.sort_unstable();
        return Ok(EditPlan::Delete { nodes });
    }
    let (node, edge_type) = if graph.edges().is_empty() {
        (ids[rng.gen_range(0..n)], EdgeType::Flow)
    } else {
        let e = graph.edges()[rng.gen_range(0..graph.edge_count())];
        (e.dst, e.edge_type)
    };
    let attach_to = ids[rng.gen_range(0..n)];
    Ok(EditPlan::Duplicate {
        node,
        edge_type,
        attach_to,
    })
}

/// Remove `x`, linking each predecessor to each successor with the type of
/// the successor edge. Existing triples are not duplicated.
fn delete_and_reconnect(nodes: &mut Vec<crate::graph::Node>, edges: &mut BTreeSet<Edge>, x: usize) {
    let preds: Vec<usize> = edges.iter().filter(|e| e.dst == x).map(|e| e.src).collect();
    let succs: Vec<(usize, EdgeType)> = edges
        .iter()
        .filter(|e| e.src == x)
        .map(|e| (e.dst, e.edge_type))
        .collect();
    edges.retain(|e| e.src != x && e.dst != x);
    nodes.retain(|n| n.id != x);
    for &w in &preds {
        for &(y, t) in &succs {
            if w != y {
                edges.insert(Edge::new(w, y, t));
            }
        }
    }
}

pub fn apply_plan(graph: &LdGraph, plan: &EditPlan) -> LdGraph {
    let mut nodes = graph.nodes().to_vec();
    let mut edges: BTreeSet<Edge> = graph.edges().iter().copied().collect();
    match plan {
        EditPlan::Delete { nodes: doomed } => {
            for &x in doomed {
                delete_and_reconnect(&mut nodes, &mut edges, x);
            }
            let remap: std::collections::BTreeMap<usize, usize> = nodes
                .iter()
                .enumerate()
                .map(|(new, n)| (n.id, new))
                .collect();
            let nodes = nodes.iter().map(|n| n.relabeled(remap[&n.id])).collect();
            let edges = edges
                .iter()
                .map(|e| Edge::new(remap[&e.src], remap[&e.dst], e.edge_type))
                .collect();
            LdGraph::from_parts(nodes, edges).canonicalize()
        }
        EditPlan::Duplicate {
            node,
            edge_type,
            attach_to,
        } => {
            let copy_id = graph.node_count();
            let copy = graph
                .node(*node)
                .expect("plan drawn from this graph")
                .relabeled(copy_id);
            nodes.push(copy);
            edges.insert(Edge::new(*attach_to, copy_id, *edge_type));
            LdGraph::from_parts(nodes, edges.into_iter().collect()).canonicalize()
        }
    }
}

/// One random edit of `graph`: node deletion with reconnection when
/// `floor(tau * |V|) > 0`, otherwise duplication of one node.
pub fn edit_graph(graph: &LdGraph, tau: f64, seed: u64) -> Result<LdGraph, EditError> {
    Ok(apply_plan(graph, &plan_edit(graph, tau, seed)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegativeCandidate {
    pub graph: LdGraph,
    pub seed_index: usize,
    pub seed_value: u64,
    pub plan: EditPlan,
    pub ged_to_gt: Option<GedResult>,
}

/// `num_seeds` independent edits of `graph`, candidate `i` using seed
/// `base_seed + i`.
pub fn generate_negatives(
    graph: &LdGraph,
    config: &EditConfig,
) -> Result<Vec<NegativeCandidate>, EditError> {
    config.check()?;
    (0..config.num_seeds)
        .map(|i| {
            let seed = config.seed(i);
            let plan = plan_edit(graph, config.tau, seed)?;
            Ok(NegativeCandidate {
                graph: apply_plan(graph, &plan),
                seed_index: i,
                seed_value: seed,
                plan,
                ged_to_gt: None,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairProvenance {
    pub tau: f64,
    pub seed_index: usize,
    pub seed: u64,
    pub ged: u64,
    pub ged_exact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreferencePair {
    pub chosen: LdGraph,
    pub rejected: LdGraph,
    pub provenance: PairProvenance,
}

/// Score every candidate against `gt` and keep the closest one; ties go to
/// the lowest seed index. Candidates equal to `gt` are never selected.
pub fn select_hard_negative(
    gt: &LdGraph,
    candidates: &[NegativeCandidate],
    tau: f64,
    ged_config: &GedConfig,
) -> Result<PreferencePair, EditError> {
    if candidates.is_empty() {
        return Err(EditError::NoCandidates);
    }
    let scored: Vec<(usize, GedResult)> = candidates
        .par_iter()
        .enumerate()
        .filter(|(_, c)| !graph_equal(gt, &c.graph))
        .map(|(i, c)| (i, c.ged_to_gt.unwrap_or_else(|| ged_with(gt, &c.graph, ged_config))))
        .collect();
    let (best, score) = scored
        .into_iter()
        .min_by_key(|&(i, r)| (r.cost, candidates[i].seed_index))
        .ok_or(EditError::Degenerate)?;
    let c = &candidates[best];
    Ok(PreferencePair {
        chosen: gt.clone(),
        rejected: c.graph.clone(),
        provenance: PairProvenance {
            tau,
            seed_index: c.seed_index,
            seed: c.seed_value,
            ged: score.cost,
            ged_exact: score.exact,
        },
    })
}
