//! Node/Edge F1 and exact-match scores between a reference graph and a
//! predicted graph. Nodes and edges are matched by their canonical strings,
//! counted as multisets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::LdGraph;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub node_tp: usize,
    pub node_fp: usize,
    pub node_fn: usize,
    pub edge_tp: usize,
    pub edge_fp: usize,
    pub edge_fn: usize,
    pub node_f1: f64,
    pub edge_f1: f64,
    pub node_em: u8,
    pub edge_em: u8,
    pub program_em: u8,
}

fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        1.0
    } else {
        (2 * tp) as f64 / denom as f64
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

impl EvalResult {
    /// Score of a prediction that could not be read at all.
    pub fn zero(gt: &LdGraph) -> EvalResult {
        EvalResult {
            node_fn: gt.node_count(),
            edge_fn: gt.edge_count(),
            ..EvalResult::default()
        }
    }

    pub fn node_precision(&self) -> f64 {
        ratio(self.node_tp, self.node_tp + self.node_fp)
    }

    pub fn node_recall(&self) -> f64 {
        ratio(self.node_tp, self.node_tp + self.node_fn)
    }

    pub fn edge_precision(&self) -> f64 {
        ratio(self.edge_tp, self.edge_tp + self.edge_fp)
    }

    pub fn edge_recall(&self) -> f64 {
        ratio(self.edge_tp, self.edge_tp + self.edge_fn)
    }
}

/// `(tp, fp, fn)` of `pred` against `gt` under multiset intersection.
fn overlap(gt: Vec<String>, pred: Vec<String>) -> (usize, usize, usize) {
    let mut pool: BTreeMap<String, usize> = BTreeMap::new();
    for s in gt.iter() {
        *pool.entry(s.clone()).or_default() += 1;
    }
    let mut tp = 0;
    for s in &pred {
        if let Some(n) = pool.get_mut(s) {
            if *n > 0 {
                *n -= 1;
                tp += 1;
            }
        }
    }
    (tp, pred.len() - tp, gt.len() - tp)
}

pub fn evaluate(gt: &LdGraph, pred: &LdGraph) -> EvalResult {
    let (node_tp, node_fp, node_fn) =
        overlap(gt.canonical_node_strings(), pred.canonical_node_strings());
    let (edge_tp, edge_fp, edge_fn) =
        overlap(gt.canonical_edge_strings(), pred.canonical_edge_strings());
    let node_em = u8::from(node_fp == 0 && node_fn == 0);
    let edge_em = u8::from(edge_fp == 0 && edge_fn == 0);
    EvalResult {
        node_tp,
        node_fp,
        node_fn,
        edge_tp,
        edge_fp,
        edge_fn,
        node_f1: f1(node_tp, node_fp, node_fn),
        edge_f1: f1(edge_tp, edge_fp, edge_fn),
        node_em,
        edge_em,
        program_em: node_em & edge_em,
    }
}

/// Per-metric means over a set of results, as percentages with one decimal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub n_samples: usize,
    pub node_f1: f64,
    pub edge_f1: f64,
    pub node_em: f64,
    pub edge_em: f64,
    pub program_em: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("cannot aggregate an empty list of results")]
    Empty,
}

/// Round half-up to one decimal, treating values within 1e-9 of a tie as
/// the tie.
pub fn round1(x: f64) -> f64 {
    ((x * 10.0) + 0.5 + 1e-9).floor() / 10.0
}

pub fn aggregate(results: &[EvalResult]) -> Result<EvalSummary, MetricsError> {
    if results.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = results.len() as f64;
    let mean = |f: &dyn Fn(&EvalResult) -> f64| {
        round1(results.iter().map(f).sum::<f64>() / n * 100.0)
    };
    Ok(EvalSummary {
        n_samples: results.len(),
        node_f1: mean(&|r| r.node_f1),
        edge_f1: mean(&|r| r.edge_f1),
        node_em: mean(&|r| f64::from(r.node_em)),
        edge_em: mean(&|r| f64::from(r.edge_em)),
        program_em: mean(&|r| f64::from(r.program_em)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, EdgeType, ElementType, Node};

    fn chain(names: &[&str]) -> LdGraph {
        let nodes = names
            .iter()
            .enumerate()
            .map(|(i, n)| Node::new(i, ElementType::NormallyOpen, *n))
            .collect();
        let edges = (1..names.len())
            .map(|i| Edge::new(i - 1, i, EdgeType::Flow))
            .collect();
        LdGraph::from_parts(nodes, edges)
    }

    #[test]
    fn identity_is_perfect() {
        let g = chain(&["A", "B", "C"]);
        let r = evaluate(&g, &g);
        assert_eq!((r.node_f1, r.edge_f1), (1.0, 1.0));
        assert_eq!((r.node_em, r.edge_em, r.program_em), (1, 1, 1));
    }

    #[test]
    fn empty_prediction_scores_zero() {
        let r = evaluate(&chain(&["A", "B"]), &LdGraph::empty());
        assert_eq!((r.node_f1, r.edge_f1), (0.0, 0.0));
        assert_eq!((r.node_em, r.edge_em, r.program_em), (0, 0, 0));
        assert_eq!(r, EvalResult::zero(&chain(&["A", "B"])));
    }

    #[test]
    fn both_empty_is_perfect() {
        let r = evaluate(&LdGraph::empty(), &LdGraph::empty());
        assert_eq!((r.node_f1, r.program_em), (1.0, 1));
    }

    #[test]
    fn duplicates_are_counted_once_each() {
        let gt = chain(&["A", "A"]);
        let pred = LdGraph::from_parts(vec![Node::new(0, ElementType::NormallyOpen, "A")], vec![]);
        let r = evaluate(&gt, &pred);
        assert_eq!((r.node_tp, r.node_fp, r.node_fn), (1, 0, 1));
    }

    #[test]
    fn aggregate_midpoint() {
        let g = chain(&["A", "B"]);
        let perfect = evaluate(&g, &g);
        let zero = evaluate(&g, &LdGraph::empty());
        let s = aggregate(&[perfect, zero]).unwrap();
        assert_eq!(s.n_samples, 2);
        for v in [s.node_f1, s.edge_f1, s.node_em, s.edge_em, s.program_em] {
            assert_eq!(v, 50.0);
        }
        assert_eq!(aggregate(&[]), Err(MetricsError::Empty));
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(round1(62.45), 62.5);
        assert_eq!(round1(62.44), 62.4);
        assert_eq!(round1(100.0), 100.0);
        assert_eq!(round1(2.0 / 3.0 * 100.0), 66.7);
    }
}
