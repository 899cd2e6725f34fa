//! Call-statement rendering: a graph as a sequence of `G.add_node(...)` and
//! `G.add_edge(...)` lines. The text is parsed against a fixed grammar and
//! never executed.
//!
//! ```text
//! G.add_node(0, ElementType="NormallyOpen", Name="X0")
//! G.add_edge(0, 1, type="Flow")
//! G.add_node(1, ElementType="StandardCoil", Name="Y0")
//! ```

use std::collections::{BTreeMap, BTreeSet};

use super::{checked, CodecError};
use crate::graph::{is_valid_param_key, Edge, EdgeType, ElementType, LdGraph, Node};

fn push_quoted(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
}

fn node_stmt(node: &Node) -> String {
    let mut s = format!("G.add_node({}, ElementType=", node.id);
    push_quoted(&mut s, node.element_type.as_str());
    s.push_str(", Name=");
    push_quoted(&mut s, &node.name);
    for (k, v) in node.params() {
        s.push_str(", ");
        s.push_str(k);
        s.push('=');
        push_quoted(&mut s, v);
    }
    s.push(')');
    s
}

fn edge_stmt(edge: &Edge) -> String {
    let mut s = format!("G.add_edge({}, {}, type=", edge.src, edge.dst);
    push_quoted(&mut s, &edge.edge_type.to_string());
    s.push(')');
    s
}

/// Depth-first emission. Roots are taken in ascending id among unvisited
/// nodes; successors in ascending `(dst, type)` order. A node is written on
/// first visit and each edge when its source is expanded.
pub fn to_metaprogram(graph: &LdGraph) -> String {
    let mut out = String::new();
    let mut visited = BTreeSet::new();
    for root in graph.nodes().iter().map(|n| n.id) {
        if visited.contains(&root) {
            continue;
        }
        let mut stack: Vec<(usize, Vec<Edge>, usize)> = Vec::new();
        let enter = |id: usize, out: &mut String, visited: &mut BTreeSet<usize>| {
            visited.insert(id);
            out.push_str(&node_stmt(graph.node(id).expect("edge endpoint exists")));
            out.push('\n');
            (id, graph.out_edges(id).copied().collect::<Vec<_>>(), 0)
        };
        stack.push(enter(root, &mut out, &mut visited));
        while let Some((_, edges, next)) = stack.last_mut() {
            if *next == edges.len() {
                stack.pop();
                continue;
            }
            let e = edges[*next];
            *next += 1;
            out.push_str(&edge_stmt(&e));
            out.push('\n');
            if !visited.contains(&e.dst) {
                let frame = enter(e.dst, &mut out, &mut visited);
                stack.push(frame);
            }
        }
    }
    out
}

/// Byte cursor over the whole text, tracking line and column.
struct Scanner<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    line_start: usize,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a str) -> Self {
        Scanner {
            src,
            pos: 0,
            line: 1,
            line_start: 0,
        }
    }

    fn err(&self, message: impl Into<String>) -> CodecError {
        CodecError::Parse {
            line: self.line,
            column: self.src[self.line_start..self.pos].chars().count() + 1,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.line_start = self.pos;
        }
        Some(c)
    }

    /// Skip spaces and tabs (and a stray `\r`) but not newlines.
    fn skip_inline_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\r')) {
            self.bump();
        }
    }

    fn skip_all_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn expect(&mut self, lit: &str) -> Result<(), CodecError> {
        self.skip_inline_ws();
        if self.src[self.pos..].starts_with(lit) {
            for _ in lit.chars() {
                self.bump();
            }
            Ok(())
        } else {
            Err(self.err(format!("expected `{lit}`")))
        }
    }

    fn eat(&mut self, lit: &str) -> bool {
        self.skip_inline_ws();
        if self.src[self.pos..].starts_with(lit) {
            for _ in lit.chars() {
                self.bump();
            }
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> Result<usize, CodecError> {
        self.skip_inline_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        if start == self.pos {
            return Err(self.err("expected a node id"));
        }
        self.src[start..self.pos]
            .parse()
            .map_err(|_| self.err("node id out of range"))
    }

    fn ident(&mut self) -> Result<&'a str, CodecError> {
        self.skip_inline_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.bump();
        }
        if start == self.pos {
            return Err(self.err("expected an attribute name"));
        }
        Ok(&self.src[start..self.pos])
    }

    fn qstring(&mut self) -> Result<String, CodecError> {
        self.skip_inline_ws();
        if self.peek() != Some('"') {
            return Err(self.err("expected a quoted string"));
        }
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(self.err("unterminated string")),
                Some('"') => return Ok(s),
                Some('\\') => match self.bump() {
                    Some(c @ ('"' | '\\')) => s.push(c),
                    _ => return Err(self.err("only \\\" and \\\\ escapes are allowed")),
                },
                Some(c) => s.push(c),
            }
        }
    }

    /// After a statement: optional spaces, then a newline or end of input.
    fn end_of_statement(&mut self) -> Result<(), CodecError> {
        self.skip_inline_ws();
        match self.peek() {
            None => Ok(()),
            Some('\n') => {
                self.bump();
                Ok(())
            }
            Some(_) => Err(self.err("unexpected text after statement")),
        }
    }
}

enum Stmt {
    Node { line: usize, node: Node },
    Edge { line: usize, edge: Edge },
}

fn node_body(sc: &mut Scanner, line: usize) -> Result<Node, CodecError> {
    let id = sc.int()?;
    let mut attrs: BTreeMap<&str, String> = BTreeMap::new();
    let mut order = Vec::new();
    while sc.eat(",") {
        let key = sc.ident()?;
        sc.expect("=")?;
        let value = sc.qstring()?;
        if attrs.insert(key, value).is_some() {
            return Err(CodecError::Schema(format!(
                "line {line}: attribute `{key}` given twice"
            )));
        }
        order.push(key);
    }
    sc.expect(")")?;

    let ty = attrs.remove("ElementType").ok_or_else(|| {
        CodecError::Schema(format!("line {line}: add_node without ElementType"))
    })?;
    let element_type: ElementType = ty
        .parse()
        .map_err(|e| CodecError::Schema(format!("line {line}: {e}")))?;
    let name = attrs.remove("Name").unwrap_or_default();
    for key in attrs.keys() {
        if !is_valid_param_key(key) {
            return Err(CodecError::Schema(format!(
                "line {line}: invalid attribute name `{key}`"
            )));
        }
    }
    Node::new(id, element_type, name)
        .with_params(attrs)
        .map_err(|e| CodecError::Schema(format!("line {line}: {e}")))
}

fn edge_body(sc: &mut Scanner, line: usize) -> Result<Edge, CodecError> {
    let src = sc.int()?;
    sc.expect(",")?;
    let dst = sc.int()?;
    sc.expect(",")?;
    sc.expect("type")?;
    sc.expect("=")?;
    let raw = sc.qstring()?;
    sc.expect(")")?;
    let edge_type: EdgeType = raw
        .parse()
        .map_err(|e| CodecError::Schema(format!("line {line}: {e}")))?;
    Ok(Edge::new(src, dst, edge_type))
}

fn statements(text: &str) -> Result<Vec<Stmt>, CodecError> {
    let mut sc = Scanner::new(text);
    let mut out = Vec::new();
    loop {
        sc.skip_all_ws();
        if sc.peek().is_none() {
            return Ok(out);
        }
        let line = sc.line;
        if sc.eat("G.add_node(") {
            let node = node_body(&mut sc, line)?;
            out.push(Stmt::Node { line, node });
        } else if sc.eat("G.add_edge(") {
            let edge = edge_body(&mut sc, line)?;
            out.push(Stmt::Edge { line, edge });
        } else {
            return Err(sc.err("expected `G.add_node(` or `G.add_edge(`"));
        }
        sc.end_of_statement()?;
    }
}

/// Inverse of [`to_metaprogram`] up to [`crate::graph::graph_equal`];
/// statement order does not matter.
pub fn parse_metaprogram(text: &str) -> Result<LdGraph, CodecError> {
    let mut nodes = BTreeMap::new();
    let mut edges = Vec::new();
    for stmt in statements(text)? {
        match stmt {
            Stmt::Node { line, node } => {
                let id = node.id;
                if nodes.insert(id, node).is_some() {
                    return Err(CodecError::Schema(format!(
                        "line {line}: node {id} declared twice"
                    )));
                }
            }
            Stmt::Edge { line, edge } => edges.push((line, edge)),
        }
    }
    for (line, e) in &edges {
        for end in [e.src, e.dst] {
            if !nodes.contains_key(&end) {
                return Err(CodecError::Wiring(format!(
                    "line {line}: add_edge references undeclared node {end}"
                )));
            }
        }
    }
    let raw = LdGraph::from_parts(
        nodes.into_values().collect(),
        edges.into_iter().map(|(_, e)| e).collect(),
    );
    checked(raw.canonicalize())
}
