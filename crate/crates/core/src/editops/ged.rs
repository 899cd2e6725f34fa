//! Graph edit distance under string-length and Levenshtein costs.
//!
//! * deleting or inserting a node costs the length of its canonical string,
//!   substituting one node for another costs the Levenshtein distance
//!   between their canonical strings;
//! * edges are priced the same way over canonical edge strings. Between two
//!   mapped node pairs the edges of each direction are matched at minimum
//!   cost; edges touching a deleted or inserted node are deleted or
//!   inserted with them.
//!
//! Small instances are solved exactly by depth-first branch and bound over
//! node mappings. Larger ones fall back to a beam search whose result is an
//! upper bound.

use std::cell::RefCell;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::assignment::{min_cost_assignment, min_cost_matching, FORBIDDEN};
use super::levenshtein::levenshtein;
use crate::graph::{canonical_edge_string, canonical_node_string, LdGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GedConfig {
    /// Largest node count solved exactly.
    pub exact_limit: usize,
    pub beam_width: usize,
}

impl Default for GedConfig {
    fn default() -> Self {
        GedConfig {
            exact_limit: 10,
            beam_width: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GedResult {
    pub cost: u64,
    /// False when the beam search produced the value.
    pub exact: bool,
}

pub fn ged(a: &LdGraph, b: &LdGraph) -> GedResult {
    ged_with(a, b, &GedConfig::default())
}

pub fn ged_with(a: &LdGraph, b: &LdGraph, cfg: &GedConfig) -> GedResult {
    let p = Problem::new(a, b);
    let ub = p.hungarian_upper_bound();
    if a.node_count().max(b.node_count()) <= cfg.exact_limit {
        GedResult {
            cost: p.branch_and_bound(ub) as u64,
            exact: true,
        }
    } else {
        GedResult {
            cost: p.beam(cfg.beam_width.max(1)).min(ub) as u64,
            exact: false,
        }
    }
}

struct Side {
    node_len: Vec<i64>,
    node_str: Vec<String>,
    edge_str: Vec<String>,
    edge_len: Vec<i64>,
    /// Edge indices per ordered node-position pair.
    groups: HashMap<(usize, usize), Vec<usize>>,
    /// Total length of edges between two nodes, both directions.
    pair_len: Vec<Vec<i64>>,
}

impl Side {
    fn new(g: &LdGraph) -> Side {
        let pos: HashMap<usize, usize> =
            g.nodes().iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        let node_str: Vec<String> = g.nodes().iter().map(canonical_node_string).collect();
        let n = node_str.len();
        let mut groups: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        let mut edge_str = Vec::new();
        let mut edge_len = Vec::new();
        let mut pair_len = vec![vec![0i64; n]; n];
        for e in g.edges() {
            let (Some(&s), Some(&d)) = (pos.get(&e.src), pos.get(&e.dst)) else {
                continue;
            };
            let text = canonical_edge_string(e, &g.nodes()[s], &g.nodes()[d]);
            let len = text.chars().count() as i64;
            groups.entry((s, d)).or_default().push(edge_str.len());
            edge_str.push(text);
            edge_len.push(len);
            pair_len[s][d] += len;
            if s != d {
                pair_len[d][s] += len;
            }
        }
        Side {
            node_len: node_str.iter().map(|s| s.chars().count() as i64).collect(),
            node_str,
            edge_str,
            edge_len,
            groups,
            pair_len,
        }
    }

    fn n(&self) -> usize {
        self.node_len.len()
    }

    fn group(&self, s: usize, d: usize) -> &[usize] {
        self.groups.get(&(s, d)).map_or(&[], Vec::as_slice)
    }
}

struct Problem {
    a: Side,
    b: Side,
    sub: Vec<Vec<i64>>,
    group_cache: RefCell<HashMap<(usize, usize, usize, usize), i64>>,
}

/// A partial mapping: `target[i]` is the image of A node `i` for the first
/// `depth` nodes in processing order (processing order is node position).
#[derive(Clone)]
struct State {
    target: Vec<Option<usize>>,
    used: Vec<bool>,
    g: i64,
}

impl Problem {
    fn new(ga: &LdGraph, gb: &LdGraph) -> Problem {
        let a = Side::new(ga);
        let b = Side::new(gb);
        let sub = a
            .node_str
            .iter()
            .map(|x| b.node_str.iter().map(|y| levenshtein(x, y) as i64).collect())
            .collect();
        Problem {
            a,
            b,
            sub,
            group_cache: RefCell::new(HashMap::new()),
        }
    }

    /// Cost of the A edges `u -> w` against the B edges `v -> x`.
    fn group_cost(&self, u: usize, w: usize, v: usize, x: usize) -> i64 {
        let ga = self.a.group(u, w);
        let gb = self.b.group(v, x);
        if ga.is_empty() {
            return gb.iter().map(|&j| self.b.edge_len[j]).sum();
        }
        if gb.is_empty() {
            return ga.iter().map(|&i| self.a.edge_len[i]).sum();
        }
        if let Some(&c) = self.group_cache.borrow().get(&(u, w, v, x)) {
            return c;
        }
        let c = min_cost_matching(
            ga.len(),
            gb.len(),
            |i, j| levenshtein(&self.a.edge_str[ga[i]], &self.b.edge_str[gb[j]]) as i64,
            |i| self.a.edge_len[ga[i]],
            |j| self.b.edge_len[gb[j]],
        );
        self.group_cache.borrow_mut().insert((u, w, v, x), c);
        c
    }

    /// Cost of all edges between A nodes `u` and `w` given their images.
    fn pair_cost(&self, u: usize, w: usize, tu: Option<usize>, tw: Option<usize>) -> i64 {
        match (tu, tw) {
            (Some(v), Some(x)) => {
                if self.a.pair_len[u][w] == 0 {
                    self.b.pair_len[v][x]
                } else if self.b.pair_len[v][x] == 0 {
                    self.a.pair_len[u][w]
                } else {
                    self.group_cost(u, w, v, x) + self.group_cost(w, u, x, v)
                }
            }
            _ => self.a.pair_len[u][w],
        }
    }

    fn node_cost(&self, u: usize, t: Option<usize>) -> i64 {
        match t {
            Some(v) => self.sub[u][v],
            None => self.a.node_len[u],
        }
    }

    /// Added cost of mapping the next A node (`state.target.len()`) to `t`.
    fn step(&self, state: &State, t: Option<usize>) -> i64 {
        let u = state.target.len();
        let mut c = self.node_cost(u, t);
        for (w, &tw) in state.target.iter().enumerate() {
            c += self.pair_cost(u, w, t, tw);
        }
        c
    }

    /// Cost of inserting every B node left unmapped, with its edges.
    fn completion(&self, used: &[bool]) -> i64 {
        let nb = self.b.n();
        let mut c = 0;
        for v in 0..nb {
            if used[v] {
                continue;
            }
            c += self.b.node_len[v];
            for x in 0..nb {
                // Count each edge once: pairs with both ends free only when v < x.
                if used[x] || v < x {
                    c += self.b.pair_len[v][x];
                } else if v == x {
                    c += self.b.pair_len[v][v];
                }
            }
        }
        c
    }

    fn child(&self, state: &State, t: Option<usize>) -> State {
        let mut s = state.clone();
        s.g += self.step(state, t);
        s.target.push(t);
        if let Some(v) = t {
            s.used[v] = true;
        }
        s
    }

    fn root(&self) -> State {
        State {
            target: Vec::with_capacity(self.a.n()),
            used: vec![false; self.b.n()],
            g: 0,
        }
    }

    /// Admissible estimate of the cost still to pay from `state`, as the
    /// optimum of an assignment over the unmapped nodes. Matrix entries are
    /// doubled so that half-edge shares stay integral. Also returns the
    /// assignment, as images for the remaining A nodes.
    fn lower_bound(&self, state: &State) -> (i64, Vec<Option<usize>>) {
        let depth = state.target.len();
        let ra: Vec<usize> = (depth..self.a.n()).collect();
        let fb: Vec<usize> = (0..self.b.n()).filter(|&v| !state.used[v]).collect();
        let (na, nb) = (ra.len(), fb.len());
        let m = na + nb;
        if m == 0 {
            return (0, Vec::new());
        }
        let rem_a: Vec<i64> = ra
            .iter()
            .map(|&u| ra.iter().map(|&w| self.a.pair_len[u][w]).sum())
            .collect();
        let rem_b: Vec<i64> = fb
            .iter()
            .map(|&v| fb.iter().map(|&x| self.b.pair_len[v][x]).sum())
            .collect();
        let mut cost = vec![vec![0i64; m]; m];
        for (i, &u) in ra.iter().enumerate() {
            for (j, &v) in fb.iter().enumerate() {
                let mut fixed = self.sub[u][v];
                for (w, &tw) in state.target.iter().enumerate() {
                    fixed += self.pair_cost(u, w, Some(v), tw);
                }
                cost[i][j] = 2 * fixed + (rem_a[i] - rem_b[j]).abs();
            }
            let to_assigned: i64 = (0..depth).map(|w| self.a.pair_len[u][w]).sum();
            for k in 0..na {
                cost[i][nb + k] = if k == i {
                    2 * (self.a.node_len[u] + to_assigned) + rem_a[i]
                } else {
                    FORBIDDEN
                };
            }
        }
        for (j, &v) in fb.iter().enumerate() {
            let to_images: i64 = state
                .target
                .iter()
                .flatten()
                .map(|&x| self.b.pair_len[v][x])
                .sum();
            for k in 0..nb {
                cost[na + k][j] = if k == j {
                    2 * (self.b.node_len[v] + to_images) + rem_b[j]
                } else {
                    FORBIDDEN
                };
            }
        }
        let (total, assign) = min_cost_assignment(&cost);
        let images = (0..na)
            .map(|i| (assign[i] < nb).then(|| fb[assign[i]]))
            .collect();
        ((total + 1) / 2, images)
    }

    fn evaluate(&self, images: &[Option<usize>]) -> i64 {
        let mut s = self.root();
        for &t in images {
            s = self.child(&s, t);
        }
        s.g + self.completion(&s.used)
    }

    /// Cost of the mapping suggested by the root assignment bound.
    fn hungarian_upper_bound(&self) -> i64 {
        let (_, images) = self.lower_bound(&self.root());
        self.evaluate(&images)
    }

    fn branch_and_bound(&self, upper: i64) -> i64 {
        let mut best = upper;
        let mut stack = vec![(0, self.root())];
        while let Some((f, state)) = stack.pop() {
            if f >= best {
                continue;
            }
            if state.target.len() == self.a.n() {
                best = best.min(state.g + self.completion(&state.used));
                continue;
            }
            let mut children: Vec<(i64, State)> = Vec::new();
            let options = (0..self.b.n())
                .filter(|&v| !state.used[v])
                .map(Some)
                .chain(std::iter::once(None));
            for t in options {
                let c = self.child(&state, t);
                let f = c.g + self.lower_bound(&c).0;
                if f < best {
                    children.push((f, c));
                }
            }
            // Most promising child last, so it is popped first.
            children.sort_by_key(|c| std::cmp::Reverse(c.0));
            stack.extend(children);
        }
        best
    }

    fn beam(&self, width: usize) -> i64 {
        let mut layer = vec![self.root()];
        for _ in 0..self.a.n() {
            let mut next: Vec<State> = Vec::with_capacity(layer.len() * (self.b.n() + 1));
            for state in &layer {
                for v in (0..self.b.n()).filter(|&v| !state.used[v]) {
                    next.push(self.child(state, Some(v)));
                }
                next.push(self.child(state, None));
            }
            next.sort_by_key(|s| s.g);
            next.truncate(width);
            layer = next;
        }
        layer
            .iter()
            .map(|s| s.g + self.completion(&s.used))
            .min()
            .unwrap_or(0)
    }
}
