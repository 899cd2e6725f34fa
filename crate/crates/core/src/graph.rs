//! Graph model for Ladder Diagram programs.
//!
//! Every visual element except wiring lines is a node; connections between
//! elements are typed edges. A functional unit is one [`LdGraph`] whose
//! weakly-connected components are its rungs, sharing a single id space.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Closed catalog of LD element kinds that appear as graph nodes.
///
/// Line elements (`VertLine`, `HorzLine`, `MultiHorzLine`) are wiring and
/// never become nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementType {
    NormallyOpen,
    NormallyClosed,
    RisingEdgeContact,
    FallingEdgeContact,
    RisingEdgeNotContact,
    FallingEdgeNotContact,
    StandardCoil,
    NegatedCoil,
    SetCoil,
    ResetCoil,
    RisingEdgeCoil,
    FallingEdgeCoil,
    Inverter,
    FunctionBlock,
    Variable,
    RisingEdge,
    FallingEdge,
}

impl ElementType {
    pub const ALL: [ElementType; 17] = [
        ElementType::NormallyOpen,
        ElementType::NormallyClosed,
        ElementType::RisingEdgeContact,
        ElementType::FallingEdgeContact,
        ElementType::RisingEdgeNotContact,
        ElementType::FallingEdgeNotContact,
        ElementType::StandardCoil,
        ElementType::NegatedCoil,
        ElementType::SetCoil,
        ElementType::ResetCoil,
        ElementType::RisingEdgeCoil,
        ElementType::FallingEdgeCoil,
        ElementType::Inverter,
        ElementType::FunctionBlock,
        ElementType::Variable,
        ElementType::RisingEdge,
        ElementType::FallingEdge,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ElementType::NormallyOpen => "NormallyOpen",
            ElementType::NormallyClosed => "NormallyClosed",
            ElementType::RisingEdgeContact => "RisingEdgeContact",
            ElementType::FallingEdgeContact => "FallingEdgeContact",
            ElementType::RisingEdgeNotContact => "RisingEdgeNotContact",
            ElementType::FallingEdgeNotContact => "FallingEdgeNotContact",
            ElementType::StandardCoil => "StandardCoil",
            ElementType::NegatedCoil => "NegatedCoil",
            ElementType::SetCoil => "SetCoil",
            ElementType::ResetCoil => "ResetCoil",
            ElementType::RisingEdgeCoil => "RisingEdgeCoil",
            ElementType::FallingEdgeCoil => "FallingEdgeCoil",
            ElementType::Inverter => "Inverter",
            ElementType::FunctionBlock => "FunctionBlock",
            ElementType::Variable => "Variable",
            ElementType::RisingEdge => "RisingEdge",
            ElementType::FallingEdge => "FallingEdge",
        }
    }

    pub fn is_contact(self) -> bool {
        matches!(
            self,
            ElementType::NormallyOpen
                | ElementType::NormallyClosed
                | ElementType::RisingEdgeContact
                | ElementType::FallingEdgeContact
                | ElementType::RisingEdgeNotContact
                | ElementType::FallingEdgeNotContact
        )
    }

    pub fn is_coil(self) -> bool {
        matches!(
            self,
            ElementType::StandardCoil
                | ElementType::NegatedCoil
                | ElementType::SetCoil
                | ElementType::ResetCoil
                | ElementType::RisingEdgeCoil
                | ElementType::FallingEdgeCoil
        )
    }
}

impl fmt::Display for ElementType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown element type `{0}`")]
pub struct UnknownElementType(pub String);

impl FromStr for ElementType {
    type Err = UnknownElementType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ElementType::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| UnknownElementType(s.to_string()))
    }
}

/// Connection type of an edge: plain power flow or a function-block port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeType {
    Flow,
    Enable,
    Output,
    /// `Input<n>`, n >= 1.
    Input(u32),
}

impl EdgeType {
    /// Edge type implied by the endpoints of a power-flow connection.
    pub fn for_flow(src: ElementType, dst: ElementType) -> EdgeType {
        if src == ElementType::FunctionBlock {
            EdgeType::Output
        } else if dst == ElementType::FunctionBlock {
            EdgeType::Enable
        } else {
            EdgeType::Flow
        }
    }

    pub fn is_input(self) -> bool {
        matches!(self, EdgeType::Input(_))
    }
}

impl fmt::Display for EdgeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeType::Flow => f.write_str("Flow"),
            EdgeType::Enable => f.write_str("Enable"),
            EdgeType::Output => f.write_str("Output"),
            EdgeType::Input(n) => write!(f, "Input{n}"),
        }
    }
}

impl serde::Serialize for EdgeType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for EdgeType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid edge type `{0}` (expected Flow, Enable, Output or Input<n> with n >= 1)")]
pub struct InvalidEdgeType(pub String);

impl FromStr for EdgeType {
    type Err = InvalidEdgeType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Flow" => Ok(EdgeType::Flow),
            "Enable" => Ok(EdgeType::Enable),
            "Output" => Ok(EdgeType::Output),
            _ => {
                let digits = s
                    .strip_prefix("Input")
                    .ok_or_else(|| InvalidEdgeType(s.to_string()))?;
                // Canonical decimal only, so that display(parse(s)) == s.
                if digits.is_empty()
                    || digits.starts_with('0')
                    || !digits.bytes().all(|b| b.is_ascii_digit())
                {
                    return Err(InvalidEdgeType(s.to_string()));
                }
                digits
                    .parse::<u32>()
                    .map(EdgeType::Input)
                    .map_err(|_| InvalidEdgeType(s.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NodeError {
    #[error("invalid parameter key `{0}`")]
    InvalidParamKey(String),
    #[error("duplicate parameter key `{0}`")]
    DuplicateParamKey(String),
}

/// Attribute names reserved by the text formats.
const RESERVED_KEYS: [&str; 2] = ["ElementType", "Name"];

/// Parameter keys are identifiers: `[A-Za-z_][A-Za-z0-9_]*`, excluding the
/// reserved attribute names.
pub fn is_valid_param_key(key: &str) -> bool {
    let mut chars = key.chars();
    let head_ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_');
    head_ok
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED_KEYS.contains(&key)
}

/// One LD element. Parameters are kept sorted by key, keys unique.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Node {
    pub id: usize,
    pub element_type: ElementType,
    pub name: String,
    params: Vec<(String, String)>,
}

impl Node {
    pub fn new(id: usize, element_type: ElementType, name: impl Into<String>) -> Node {
        Node {
            id,
            element_type,
            name: name.into(),
            params: Vec::new(),
        }
    }

    /// Attach parameters, normalizing them into key order.
    pub fn with_params<K, V, I>(mut self, params: I) -> Result<Node, NodeError>
    where
        K: Into<String>,
        V: Into<String>,
        I: IntoIterator<Item = (K, V)>,
    {
        let mut map = BTreeMap::new();
        for (k, v) in self.params.drain(..) {
            map.insert(k, v);
        }
        for (k, v) in params {
            let k = k.into();
            if !is_valid_param_key(&k) {
                return Err(NodeError::InvalidParamKey(k));
            }
            if map.contains_key(&k) {
                return Err(NodeError::DuplicateParamKey(k));
            }
            map.insert(k, v.into());
        }
        self.params = map.into_iter().collect();
        Ok(self)
    }

    pub fn params(&self) -> &[(String, String)] {
        &self.params
    }

    pub fn param(&self, key: &str) -> Option<&str> {
        self.params
            .binary_search_by(|(k, _)| k.as_str().cmp(key))
            .ok()
            .map(|i| self.params[i].1.as_str())
    }

    /// Same content under a different id.
    pub fn relabeled(&self, id: usize) -> Node {
        Node { id, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub edge_type: EdgeType,
}

impl Edge {
    pub fn new(src: usize, dst: usize, edge_type: EdgeType) -> Edge {
        Edge { src, dst, edge_type }
    }
}

/// Escape the characters that carry structure in canonical strings.
fn escape_canonical(s: &str, out: &mut String) {
    for c in s.chars() {
        if matches!(c, '\\' | '|' | '>') {
            out.push('\\');
        }
        out.push(c);
    }
}

/// `ElementType|name|k1=v1|k2=v2…`; the match key for metrics and the
/// substrate for edit costs.
pub fn canonical_node_string(node: &Node) -> String {
    let mut out = String::from(node.element_type.as_str());
    out.push('|');
    escape_canonical(&node.name, &mut out);
    for (k, v) in &node.params {
        out.push('|');
        out.push_str(k);
        out.push('=');
        escape_canonical(v, &mut out);
    }
    out
}

/// `canon(src)->canon(dst)@edge_type`; independent of node ids.
pub fn canonical_edge_string(edge: &Edge, src: &Node, dst: &Node) -> String {
    format!(
        "{}->{}@{}",
        canonical_node_string(src),
        canonical_node_string(dst),
        edge.edge_type
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateNodeId { id: usize },
    /// Node ids are not exactly `0..n`.
    NonDenseIds { missing: Vec<usize>, out_of_range: Vec<usize> },
    DanglingEdge { edge: Edge },
    DuplicateEdge { edge: Edge },
    /// One strongly-connected group of nodes (or a self-loop).
    Cycle { nodes: Vec<usize> },
    /// A rung whose nodes are interleaved with another rung in id order.
    NonContiguousRung { nodes: Vec<usize> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateNodeId { id } => write!(f, "duplicate node id {id}"),
            Violation::NonDenseIds {
                missing,
                out_of_range,
            } => write!(
                f,
                "node ids are not dense: missing {missing:?}, out of range {out_of_range:?}"
            ),
            Violation::DanglingEdge { edge } => write!(
                f,
                "edge {}->{} ({}) references a missing node",
                edge.src, edge.dst, edge.edge_type
            ),
            Violation::DuplicateEdge { edge } => write!(
                f,
                "duplicate edge {}->{} ({})",
                edge.src, edge.dst, edge.edge_type
            ),
            Violation::Cycle { nodes } => write!(f, "cycle through nodes {nodes:?}"),
            Violation::NonContiguousRung { nodes } => {
                write!(f, "rung {nodes:?} is not contiguous in id order")
            }
        }
    }
}

/// Every invariant violation found in a graph; empty when valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// A Ladder Diagram program as a directed acyclic graph.
///
/// Construction never fails; use [`LdGraph::validate`] to check invariants.
/// Nodes are kept sorted by id and edges by `(src, dst, edge_type)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LdGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    rung_starts: Vec<usize>,
}

impl LdGraph {
    pub fn empty() -> LdGraph {
        LdGraph::default()
    }

    pub fn from_parts(mut nodes: Vec<Node>, mut edges: Vec<Edge>) -> LdGraph {
        nodes.sort_by_key(|n| n.id);
        edges.sort();
        let rung_starts = components_of(&nodes, &edges)
            .iter()
            .map(|c| c[0])
            .collect();
        LdGraph {
            nodes,
            edges,
            rung_starts,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// First (minimum) node id of each rung, ascending.
    pub fn rung_starts(&self) -> &[usize] {
        &self.rung_starts
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: usize) -> Option<&Node> {
        match self.nodes.get(id) {
            Some(n) if n.id == id => Some(n),
            _ => self.nodes.iter().find(|n| n.id == id),
        }
    }

    /// Outgoing edges of `id`, ordered by `(dst, edge_type)`.
    pub fn out_edges(&self, id: usize) -> impl Iterator<Item = &Edge> {
        let start = self.edges.partition_point(|e| e.src < id);
        self.edges[start..].iter().take_while(move |e| e.src == id)
    }

    pub fn in_edges(&self, id: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.dst == id)
    }

    /// Node ids of each weakly-connected component, each sorted, ordered by
    /// minimum id.
    pub fn components(&self) -> Vec<Vec<usize>> {
        components_of(&self.nodes, &self.edges)
    }

    /// Number of nodes plus number of edges.
    pub fn complexity(&self) -> usize {
        self.nodes.len() + self.edges.len()
    }

    pub fn canonical_node_strings(&self) -> Vec<String> {
        self.nodes.iter().map(canonical_node_string).collect()
    }

    /// Canonical strings of all edges whose endpoints exist.
    pub fn canonical_edge_strings(&self) -> Vec<String> {
        self.edges
            .iter()
            .filter_map(|e| {
                let s = self.node(e.src)?;
                let d = self.node(e.dst)?;
                Some(canonical_edge_string(e, s, d))
            })
            .collect()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let n = self.nodes.len();

        let mut seen = BTreeSet::new();
        for node in &self.nodes {
            if !seen.insert(node.id) {
                violations.push(Violation::DuplicateNodeId { id: node.id });
            }
        }
        let missing: Vec<usize> = (0..n).filter(|i| !seen.contains(i)).collect();
        let out_of_range: Vec<usize> = seen.iter().copied().filter(|&i| i >= n).collect();
        if !missing.is_empty() || !out_of_range.is_empty() {
            violations.push(Violation::NonDenseIds {
                missing,
                out_of_range,
            });
        }

        let mut edge_set = BTreeSet::new();
        for e in &self.edges {
            if !seen.contains(&e.src) || !seen.contains(&e.dst) {
                violations.push(Violation::DanglingEdge { edge: *e });
            }
            if !edge_set.insert(*e) {
                violations.push(Violation::DuplicateEdge { edge: *e });
            }
        }

        for nodes in cyclic_groups(&seen, &self.edges) {
            violations.push(Violation::Cycle { nodes });
        }

        // Rungs must occupy contiguous runs of the id-sorted node list.
        let position: BTreeMap<usize, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, node)| (node.id, i))
            .collect();
        for comp in self.components() {
            let first = position[&comp[0]];
            let last = position[comp.last().unwrap()];
            if last - first + 1 != comp.len() {
                violations.push(Violation::NonContiguousRung { nodes: comp });
            }
        }

        ValidationReport { violations }
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_valid()
    }

    /// Relabel ids to `0..n`: rungs ordered by their smallest current id,
    /// nodes inside a rung keep their relative order. Edges whose endpoints
    /// are missing are dropped.
    pub fn canonicalize(&self) -> LdGraph {
        let mut order: Vec<usize> = Vec::with_capacity(self.nodes.len());
        for comp in self.components() {
            order.extend(comp);
        }
        let remap: BTreeMap<usize, usize> = order
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new))
            .collect();
        let nodes = self
            .nodes
            .iter()
            .map(|n| n.relabeled(remap[&n.id]))
            .collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|e| {
                Some(Edge::new(
                    *remap.get(&e.src)?,
                    *remap.get(&e.dst)?,
                    e.edge_type,
                ))
            })
            .collect();
        LdGraph::from_parts(nodes, edges)
    }

    /// Topological order of a valid graph (smallest available id first).
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        for e in &self.edges {
            if e.dst >= n || e.src >= n {
                return None;
            }
            indeg[e.dst] += 1;
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = ready.pop_first() {
            order.push(u);
            for e in self.out_edges(u) {
                indeg[e.dst] -= 1;
                if indeg[e.dst] == 0 {
                    ready.insert(e.dst);
                }
            }
        }
        (order.len() == n).then_some(order)
    }
}

/// True iff both graphs have the same multiset of canonical node strings and
/// the same multiset of canonical edge strings.
pub fn graph_equal(a: &LdGraph, b: &LdGraph) -> bool {
    if a.node_count() != b.node_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    let mut na = a.canonical_node_strings();
    let mut nb = b.canonical_node_strings();
    na.sort();
    nb.sort();
    if na != nb {
        return false;
    }
    let mut ea = a.canonical_edge_strings();
    let mut eb = b.canonical_edge_strings();
    ea.sort();
    eb.sort();
    ea == eb
}

fn components_of(nodes: &[Node], edges: &[Edge]) -> Vec<Vec<usize>> {
    let ids: Vec<usize> = nodes.iter().map(|n| n.id).collect();
    let index: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for e in edges {
        if let (Some(&a), Some(&b)) = (index.get(&e.src), index.get(&e.dst)) {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..ids.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(ids[i]);
    }
    let mut comps: Vec<Vec<usize>> = groups
        .into_values()
        .map(|mut c| {
            c.sort_unstable();
            c.dedup();
            c
        })
        .collect();
    comps.sort_by_key(|c| c[0]);
    comps
}

/// Strongly-connected groups that contain a cycle (size > 1 or self-loop).
fn cyclic_groups(ids: &BTreeSet<usize>, edges: &[Edge]) -> Vec<Vec<usize>> {
    let index: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let ids: Vec<usize> = ids.iter().copied().collect();
    let n = ids.len();
    let mut adj = vec![Vec::new(); n];
    let mut self_loop = vec![false; n];
    for e in edges {
        if let (Some(&a), Some(&b)) = (index.get(&e.src), index.get(&e.dst)) {
            adj[a].push(b);
            if a == b {
                self_loop[a] = true;
            }
        }
    }

    // Iterative Tarjan.
    let mut idx = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut counter = 0;
    let mut groups = Vec::new();
    for root in 0..n {
        if idx[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        idx[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut next)) = call.last_mut() {
            if *next < adj[v].len() {
                let w = adj[v][*next];
                *next += 1;
                if idx[w] == usize::MAX {
                    idx[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(idx[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == idx[v] {
                    let mut group = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        group.push(ids[w]);
                        if w == v {
                            break;
                        }
                    }
                    if group.len() > 1 || self_loop[v] {
                        group.sort_unstable();
                        groups.push(group);
                    }
                }
            }
        }
    }
    groups.sort();
    groups
}
