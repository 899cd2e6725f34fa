//! JSON rendering: one `"G<i>"` object per rung, keyed by decimal node id.
//!
//! ```text
//! {"G0":{"0":{"attributes":{"ElementType":"NormallyOpen","Name":"X0"},
//!             "edges":[{"target":"1","type":"Flow"}]}, ...}}
//! ```
//!
//! Output is compact and byte-deterministic: rungs by smallest id, nodes in
//! ascending numeric id, attributes as `ElementType`, `Name`, then params in
//! key order, edges by `(target, type)`.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::Value;

use super::{checked, CodecError};
use crate::graph::{is_valid_param_key, Edge, EdgeType, ElementType, LdGraph, Node};

fn quoted(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization cannot fail")
}

pub fn to_json_text(graph: &LdGraph) -> String {
    let mut out = String::from("{");
    for (gi, comp) in graph.components().iter().enumerate() {
        if gi > 0 {
            out.push(',');
        }
        out.push_str(&format!("\"G{gi}\":{{"));
        for (ni, &id) in comp.iter().enumerate() {
            let node = graph.node(id).expect("component ids come from the graph");
            if ni > 0 {
                out.push(',');
            }
            out.push_str(&format!("\"{id}\":{{\"attributes\":{{\"ElementType\":"));
            out.push_str(&quoted(node.element_type.as_str()));
            out.push_str(",\"Name\":");
            out.push_str(&quoted(&node.name));
            for (k, v) in node.params() {
                out.push(',');
                out.push_str(&quoted(k));
                out.push(':');
                out.push_str(&quoted(v));
            }
            out.push_str("},\"edges\":[");
            for (ei, e) in graph.out_edges(id).enumerate() {
                if ei > 0 {
                    out.push(',');
                }
                out.push_str(&format!(
                    "{{\"target\":\"{}\",\"type\":{}}}",
                    e.dst,
                    quoted(&e.edge_type.to_string())
                ));
            }
            out.push_str("]}");
        }
        out.push('}');
    }
    out.push('}');
    out
}

fn parse_id(raw: &str, what: &str) -> Result<usize, CodecError> {
    if raw.is_empty() || !raw.bytes().all(|b| b.is_ascii_digit()) {
        return Err(CodecError::Schema(format!("{what} `{raw}` is not a node id")));
    }
    raw.parse()
        .map_err(|_| CodecError::Schema(format!("{what} `{raw}` is out of range")))
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn parse_node(id: usize, value: &Value) -> Result<(Node, Vec<(usize, EdgeType)>), CodecError> {
    let obj = value
        .as_object()
        .ok_or_else(|| CodecError::Schema(format!("node {id} is not an object")))?;
    let attrs = obj
        .get("attributes")
        .and_then(Value::as_object)
        .ok_or_else(|| CodecError::Schema(format!("node {id} has no `attributes` object")))?;

    let element_type: ElementType = attrs
        .get("ElementType")
        .and_then(Value::as_str)
        .ok_or_else(|| CodecError::Schema(format!("node {id} has no string `ElementType`")))?
        .parse()
        .map_err(|e| CodecError::Schema(format!("node {id}: {e}")))?;
    let name = match attrs.get("Name") {
        None | Some(Value::Null) => String::new(),
        Some(v) => scalar_text(v)
            .ok_or_else(|| CodecError::Schema(format!("node {id}: `Name` must be a string")))?,
    };
    let mut params = Vec::new();
    for (k, v) in attrs {
        if k == "ElementType" || k == "Name" {
            continue;
        }
        if !is_valid_param_key(k) {
            return Err(CodecError::Schema(format!(
                "node {id}: invalid attribute key `{k}`"
            )));
        }
        let v = scalar_text(v).ok_or_else(|| {
            CodecError::Schema(format!("node {id}: attribute `{k}` must be a scalar"))
        })?;
        params.push((k.clone(), v));
    }
    let node = Node::new(id, element_type, name)
        .with_params(params)
        .map_err(|e| CodecError::Schema(format!("node {id}: {e}")))?;

    let mut edges = Vec::new();
    let raw_edges = match obj.get("edges") {
        None | Some(Value::Null) => &[][..],
        Some(Value::Array(a)) => a.as_slice(),
        Some(_) => {
            return Err(CodecError::Schema(format!(
                "node {id}: `edges` must be an array"
            )))
        }
    };
    for e in raw_edges {
        let eo = e
            .as_object()
            .ok_or_else(|| CodecError::Schema(format!("node {id}: edge is not an object")))?;
        let target = match eo.get("target") {
            Some(Value::String(s)) => parse_id(s, "edge target")?,
            Some(Value::Number(n)) => n
                .as_u64()
                .map(|t| t as usize)
                .ok_or_else(|| CodecError::Schema(format!("node {id}: bad edge target {n}")))?,
            _ => {
                return Err(CodecError::Schema(format!(
                    "node {id}: edge without `target`"
                )))
            }
        };
        let edge_type: EdgeType = eo
            .get("type")
            .and_then(Value::as_str)
            .ok_or_else(|| CodecError::Schema(format!("node {id}: edge without string `type`")))?
            .parse()
            .map_err(|e| CodecError::Schema(format!("node {id}: {e}")))?;
        edges.push((target, edge_type));
    }
    Ok((node, edges))
}

/// Inverse of [`to_json_text`] up to [`crate::graph::graph_equal`]. Sparse
/// ids are re-densified; rung grouping is recomputed from connectivity.
pub fn parse_json_text(text: &str) -> Result<LdGraph, CodecError> {
    let root: Value = serde_json::from_str(text).map_err(|e| CodecError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let groups = root
        .as_object()
        .ok_or_else(|| CodecError::Schema("root is not an object".into()))?;

    let mut nodes = BTreeMap::new();
    let mut edges = Vec::new();
    for (label, group) in groups {
        let group = group
            .as_object()
            .ok_or_else(|| CodecError::Schema(format!("graph `{label}` is not an object")))?;
        for (key, value) in group {
            let id = parse_id(key, "node key")?;
            let (node, out) = parse_node(id, value)?;
            if nodes.insert(id, node).is_some() {
                return Err(CodecError::Schema(format!("node id {id} declared twice")));
            }
            edges.extend(out.into_iter().map(|(dst, t)| Edge::new(id, dst, t)));
        }
    }

    let declared: BTreeSet<usize> = nodes.keys().copied().collect();
    if let Some(e) = edges.iter().find(|e| !declared.contains(&e.dst)) {
        return Err(CodecError::Wiring(format!(
            "edge {} -> {} targets an undeclared node",
            e.src, e.dst
        )));
    }
    let raw = LdGraph::from_parts(nodes.into_values().collect(), edges);
    // Duplicate edges survive canonicalization and are reported by validation.
    checked(raw.canonicalize())
}
