//! Seeded generator of synthetic ladder programs with templated prompts.
//!
//! Each rung is drawn as a series-parallel network of contacts (optionally
//! holding one function block with variable inputs) followed by one coil or
//! a parallel group of coils. Edges follow the shared-net rule of the XML
//! grid: every element whose output reaches a connection point feeds every
//! element whose input sits on it.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Edge, EdgeType, ElementType, LdGraph, Node};
use crate::pipeline::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub n_samples: usize,
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub branch_prob: f64,
    pub fb_prob: f64,
    pub max_rungs: usize,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_samples: 100,
            min_nodes: 3,
            max_nodes: 24,
            branch_prob: 0.3,
            fb_prob: 0.25,
            max_rungs: 3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("node bounds must satisfy 1 <= min_nodes <= max_nodes, got {0}..{1}")]
    BadBounds(usize, usize),
    #[error("probability `{0}` must lie in [0, 1], got {1}")]
    BadProbability(&'static str, f64),
    #[error("max_rungs must be positive")]
    NoRungs,
}

impl SynthParams {
    pub fn check(&self) -> Result<(), SynthError> {
        if self.min_nodes == 0 || self.min_nodes > self.max_nodes {
            return Err(SynthError::BadBounds(self.min_nodes, self.max_nodes));
        }
        for (name, p) in [("branch_prob", self.branch_prob), ("fb_prob", self.fb_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SynthError::BadProbability(name, p));
            }
        }
        if self.max_rungs == 0 {
            return Err(SynthError::NoRungs);
        }
        Ok(())
    }
}

enum Shape {
    Leaf(usize),
    Series(Box<Shape>, Box<Shape>),
    Parallel(Box<Shape>, Box<Shape>),
}

/// Series-parallel shape over `slots[..]`, consuming them left to right.
fn shape(rng: &mut ChaCha8Rng, slots: &[usize], branch_prob: f64) -> Shape {
    if slots.len() == 1 {
        return Shape::Leaf(slots[0]);
    }
    let cut = rng.gen_range(1..slots.len());
    let parallel = rng.gen_bool(branch_prob);
    let a = Box::new(shape(rng, &slots[..cut], branch_prob));
    let b = Box::new(shape(rng, &slots[cut..], branch_prob));
    if parallel {
        Shape::Parallel(a, b)
    } else {
        Shape::Series(a, b)
    }
}

/// Wire `s` and return its (input elements, output elements).
fn wire(s: &Shape, edges: &mut Vec<(usize, usize)>) -> (Vec<usize>, Vec<usize>) {
    match s {
        Shape::Leaf(id) => (vec![*id], vec![*id]),
        Shape::Series(a, b) => {
            let (ai, ao) = wire(a, edges);
            let (bi, bo) = wire(b, edges);
            for &u in &ao {
                for &v in &bi {
                    edges.push((u, v));
                }
            }
            (ai, bo)
        }
        Shape::Parallel(a, b) => {
            let (mut ai, mut ao) = wire(a, edges);
            let (bi, bo) = wire(b, edges);
            ai.extend(bi);
            ao.extend(bo);
            (ai, ao)
        }
    }
}

const CONTACTS: [(ElementType, u32); 6] = [
    (ElementType::NormallyOpen, 10),
    (ElementType::NormallyClosed, 5),
    (ElementType::RisingEdgeContact, 2),
    (ElementType::FallingEdgeContact, 1),
    (ElementType::RisingEdgeNotContact, 1),
    (ElementType::FallingEdgeNotContact, 1),
];

const COILS: [(ElementType, u32); 4] = [
    (ElementType::StandardCoil, 10),
    (ElementType::SetCoil, 3),
    (ElementType::ResetCoil, 3),
    (ElementType::NegatedCoil, 1),
];

const BLOCKS: [&str; 6] = ["MOV", "TON", "CTU", "ADD", "CMP", "BMOV"];

fn weighted(rng: &mut ChaCha8Rng, table: &[(ElementType, u32)]) -> ElementType {
    let total: u32 = table.iter().map(|t| t.1).sum();
    let mut x = rng.gen_range(0..total);
    for &(ty, w) in table {
        if x < w {
            return ty;
        }
        x -= w;
    }
    unreachable!("weights cover the range")
}

/// Distinct device names within one graph.
struct Names {
    used: BTreeSet<String>,
}

impl Names {
    fn draw(&mut self, rng: &mut ChaCha8Rng, prefix: &str, range: u32) -> String {
        for attempt in 0u32.. {
            let widened = range.saturating_mul(1 + attempt / 32);
            let name = format!("{prefix}{}", rng.gen_range(0..widened));
            if self.used.insert(name.clone()) {
                return name;
            }
        }
        unreachable!("the name range keeps widening")
    }
}

struct RungBuilder<'a> {
    rng: &'a mut ChaCha8Rng,
    names: &'a mut Names,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

impl RungBuilder<'_> {
    fn add(&mut self, ty: ElementType, name: String) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::new(id, ty, name));
        id
    }

    fn contact(&mut self) -> usize {
        let ty = weighted(self.rng, &CONTACTS);
        let prefix = if self.rng.gen_bool(0.6) { "X" } else { "M" };
        let name = self.names.draw(self.rng, prefix, 200);
        self.add(ty, name)
    }

    fn coil(&mut self) -> usize {
        let ty = weighted(self.rng, &COILS);
        let prefix = if self.rng.gen_bool(0.7) { "Y" } else { "M" };
        let name = self.names.draw(self.rng, prefix, 200);
        self.add(ty, name)
    }

    fn block(&mut self, n_vars: usize) -> usize {
        let kind = *BLOCKS.choose(self.rng).expect("non-empty");
        let name = self.names.draw(self.rng, &format!("{kind}_"), 16);
        let id = self.nodes.len();
        let mut node = Node::new(id, ElementType::FunctionBlock, name);
        if matches!(kind, "TON" | "CTU") {
            let preset = format!("K{}", self.rng.gen_range(1..100) * 10);
            node = node.with_params([("Preset", preset)]).expect("valid key");
        }
        self.nodes.push(node);
        for k in 1..=n_vars {
            let var = if self.rng.gen_bool(0.5) {
                self.names.draw(self.rng, "D", 1000)
            } else {
                self.names.draw(self.rng, "K", 1000)
            };
            let v = self.add(ElementType::Variable, var);
            self.edges.push(Edge::new(id, v, EdgeType::Input(k as u32)));
        }
        id
    }

    /// One connected rung with exactly `m` nodes.
    fn rung(&mut self, m: usize, p: &SynthParams) {
        let with_fb = self.rng.gen_bool(p.fb_prob);
        let n_vars = if with_fb {
            self.rng.gen_range(0..=m.saturating_sub(1).min(3))
        } else {
            0
        };
        let flow = m - n_vars;
        let n_coils = if flow >= 3 && self.rng.gen_bool(p.branch_prob) { 2 } else { 1 };
        let body_len = flow - n_coils.min(flow);
        let fb_slot = with_fb.then(|| self.rng.gen_range(0..body_len.max(1)));

        let mut body = Vec::with_capacity(body_len);
        for i in 0..body_len {
            body.push(if fb_slot == Some(i) {
                self.block(n_vars)
            } else {
                self.contact()
            });
        }
        let mut outputs = Vec::new();
        for _ in 0..n_coils.min(flow) {
            if body_len == 0 && with_fb {
                outputs.push(self.block(n_vars));
            } else {
                outputs.push(self.coil());
            }
        }

        let mut pairs = Vec::new();
        if !body.is_empty() {
            let s = shape(self.rng, &body, p.branch_prob);
            let (_, outs) = wire(&s, &mut pairs);
            for &u in &outs {
                for &v in &outputs {
                    pairs.push((u, v));
                }
            }
        }
        for (u, v) in pairs {
            let t = EdgeType::for_flow(self.nodes[u].element_type, self.nodes[v].element_type);
            self.edges.push(Edge::new(u, v, t));
        }
    }
}

/// Split `n` into `r` positive parts.
fn partition(rng: &mut ChaCha8Rng, n: usize, r: usize) -> Vec<usize> {
    let mut parts = vec![1; r];
    for _ in 0..n - r {
        parts[rng.gen_range(0..r)] += 1;
    }
    parts
}

fn rng_for(params: &SynthParams, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(index as u64);
    rng
}

fn graph_with_rng(params: &SynthParams, rng: &mut ChaCha8Rng) -> LdGraph {
    let n = rng.gen_range(params.min_nodes..=params.max_nodes);
    let max_r = params.max_rungs.min((n / 3).max(1));
    let r = rng.gen_range(1..=max_r);
    let mut names = Names {
        used: BTreeSet::new(),
    };
    let mut nodes = Vec::with_capacity(n);
    let mut edges = Vec::new();
    for m in partition(rng, n, r) {
        let mut b = RungBuilder {
            rng,
            names: &mut names,
            nodes: Vec::new(),
            edges: Vec::new(),
        };
        b.rung(m, params);
        let off = nodes.len();
        nodes.extend(b.nodes.into_iter().map(|x| x.relabeled(x.id + off)));
        edges.extend(
            b.edges
                .into_iter()
                .map(|e| Edge::new(e.src + off, e.dst + off, e.edge_type)),
        );
    }
    LdGraph::from_parts(nodes, edges).canonicalize()
}

/// Graph number `index` of the corpus described by `params`.
pub fn generate_graph(params: &SynthParams, index: usize) -> Result<LdGraph, SynthError> {
    params.check()?;
    Ok(graph_with_rng(params, &mut rng_for(params, index)))
}

fn names_of(graph: &LdGraph, pred: impl Fn(ElementType) -> bool) -> Vec<&str> {
    graph
        .nodes()
        .iter()
        .filter(|n| pred(n.element_type))
        .map(|n| n.name.as_str())
        .collect()
}

fn describe(graph: &LdGraph, rng: &mut ChaCha8Rng) -> (String, String) {
    let coils = names_of(graph, |t| t.is_coil());
    let contacts = names_of(graph, |t| t.is_contact());
    let blocks = names_of(graph, |t| t == ElementType::FunctionBlock);
    let vars = names_of(graph, |t| t == ElementType::Variable);
    let targets = if coils.is_empty() { &blocks } else { &coils };
    let korean = rng.gen_bool(0.5);
    let theme = if korean {
        ["모터 운전", "컨베이어 제어", "램프 점등", "펌프 기동", "알람 출력", "서보 조그"]
    } else {
        ["Motor run", "Conveyor control", "Lamp output", "Pump start", "Alarm latch", "Servo jog"]
    };
    let theme = theme.choose(rng).expect("non-empty");
    let mut detail = Vec::new();
    if korean {
        let program = format!("{theme} 프로그램 ({})", targets.join(", "));
        if !contacts.is_empty() {
            detail.push(format!("{} 접점 조건에 따라", contacts.join(", ")));
        }
        if !blocks.is_empty() {
            detail.push(format!("{} 명령을 실행하고", blocks.join(", ")));
        }
        if !vars.is_empty() {
            detail.push(format!("{} 값을 사용하며", vars.join(", ")));
        }
        detail.push(format!("{} 출력을 제어합니다.", targets.join(", ")));
        (program, detail.join(" "))
    } else {
        let program = format!("{theme} program ({})", targets.join(", "));
        if !contacts.is_empty() {
            detail.push(format!("Depending on contacts {},", contacts.join(", ")));
        }
        if !blocks.is_empty() {
            detail.push(format!("execute {}", blocks.join(", ")));
        }
        if !vars.is_empty() {
            detail.push(format!("with operands {}", vars.join(", ")));
        }
        detail.push(format!("and drive {}.", targets.join(", ")));
        (program, detail.join(" "))
    }
}

/// Sample `index`: graph plus templated descriptions naming its devices.
pub fn generate_sample(params: &SynthParams, index: usize) -> Result<Sample, SynthError> {
    params.check()?;
    let mut rng = rng_for(params, index);
    let graph = graph_with_rng(params, &mut rng);
    let (program_description, detailed_description) = describe(&graph, &mut rng);
    Ok(Sample {
        sample_id: format!("S{index:05}"),
        program_description,
        detailed_description,
        graph,
    })
}

pub fn generate_corpus(params: &SynthParams) -> Result<Vec<Sample>, SynthError> {
    params.check()?;
    (0..params.n_samples)
        .into_par_iter()
        .map(|i| generate_sample(params, i))
        .collect()
}
