//! Grid layout for emitting a graph as XML.
//!
//! Each rung is read as a two-terminal circuit: the left and right rails are
//! terminals, every shared connection point (a *net*) is an interior vertex
//! and every non-Variable node is a circuit edge from its input net to its
//! output net. A rung has a grid layout exactly when this circuit reduces to
//! a single rail-to-rail edge by series and parallel merges; the merge tree
//! is then drawn as nested blocks.

use std::collections::BTreeMap;

use super::{XmlElement, XmlKind};
use crate::codecs::CodecError;
use crate::graph::{EdgeType, ElementType, LdGraph};

const LEFT: usize = 0;
const RIGHT: usize = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Block {
    Leaf(usize),
    Series(Vec<Block>),
    Parallel(Vec<Block>),
}

impl Block {
    fn min_id(&self) -> usize {
        match self {
            Block::Leaf(id) => *id,
            Block::Series(v) | Block::Parallel(v) => v.iter().map(Block::min_id).min().unwrap(),
        }
    }

    fn series(a: Block, b: Block) -> Block {
        let mut parts = Vec::new();
        for x in [a, b] {
            match x {
                Block::Series(v) => parts.extend(v),
                other => parts.push(other),
            }
        }
        Block::Series(parts)
    }

    fn parallel(a: Block, b: Block) -> Block {
        let mut parts = Vec::new();
        for x in [a, b] {
            match x {
                Block::Parallel(v) => parts.extend(v),
                other => parts.push(other),
            }
        }
        parts.sort_by_key(Block::min_id);
        Block::Parallel(parts)
    }
}

fn unrepresentable(msg: impl Into<String>) -> CodecError {
    CodecError::Unrepresentable(msg.into())
}

/// Variables hanging under each function block: `fb -> [(k, var)]`.
type Ports = BTreeMap<usize, Vec<(u32, usize)>>;

/// Check the edge vocabulary against what the grid can express and split
/// the component into flow nodes and port variables.
fn classify(graph: &LdGraph, comp: &[usize]) -> Result<(Vec<usize>, Ports), CodecError> {
    let ty = |id: usize| graph.node(id).expect("component node").element_type;
    let mut ports: Ports = BTreeMap::new();
    let mut flow_nodes = Vec::new();
    for &id in comp {
        let outs: Vec<_> = graph.out_edges(id).collect();
        for e in &outs {
            let (s, d) = (ty(e.src), ty(e.dst));
            match e.edge_type {
                EdgeType::Input(k) => {
                    if s != ElementType::FunctionBlock || d != ElementType::Variable {
                        return Err(unrepresentable(format!(
                            "edge {}->{} of type {} must run from a FunctionBlock to a Variable",
                            e.src, e.dst, e.edge_type
                        )));
                    }
                    ports.entry(e.src).or_default().push((k, e.dst));
                }
                t => {
                    if s == ElementType::Variable || d == ElementType::Variable {
                        return Err(unrepresentable(format!(
                            "edge {}->{} connects a Variable by power flow",
                            e.src, e.dst
                        )));
                    }
                    let want = EdgeType::for_flow(s, d);
                    if t != want {
                        return Err(unrepresentable(format!(
                            "edge {}->{} has type {t}, its endpoints imply {want}",
                            e.src, e.dst
                        )));
                    }
                }
            }
        }
        if ty(id) == ElementType::Variable {
            let ins: Vec<_> = graph.in_edges(id).collect();
            let attached = ins.len() == 1 && ins[0].edge_type.is_input() && outs.is_empty();
            let alone = ins.is_empty() && outs.is_empty() && comp.len() == 1;
            if !attached && !alone {
                return Err(unrepresentable(format!(
                    "Variable {id} must be a single function-block input"
                )));
            }
        } else {
            flow_nodes.push(id);
        }
    }
    for (fb, list) in ports.iter_mut() {
        list.sort();
        if list.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(unrepresentable(format!(
                "FunctionBlock {fb} has two variables on the same input port"
            )));
        }
    }
    Ok((flow_nodes, ports))
}

/// Series-parallel decomposition of the flow part of one rung.
fn decompose(graph: &LdGraph, flow_nodes: &[usize]) -> Result<Block, CodecError> {
    let is_flow = |e: &&crate::graph::Edge| !e.edge_type.is_input();
    let succ: BTreeMap<usize, Vec<usize>> = flow_nodes
        .iter()
        .map(|&u| (u, graph.out_edges(u).filter(is_flow).map(|e| e.dst).collect()))
        .collect();

    // Nodes sharing a successor set drive the same net.
    let mut net_of_key: BTreeMap<&Vec<usize>, usize> = BTreeMap::new();
    let mut out_vertex = BTreeMap::new();
    for (&u, s) in &succ {
        let v = if s.is_empty() {
            RIGHT
        } else {
            let next = net_of_key.len() + 2;
            *net_of_key.entry(s).or_insert(next)
        };
        out_vertex.insert(u, v);
    }
    let mut in_vertex: BTreeMap<usize, usize> = flow_nodes.iter().map(|&u| (u, LEFT)).collect();
    for (key, &net) in &net_of_key {
        for &v in key.iter() {
            if in_vertex[&v] != LEFT {
                return Err(unrepresentable(format!(
                    "node {v} is fed by two different connection points"
                )));
            }
            in_vertex.insert(v, net);
        }
    }

    let mut edges: Vec<(usize, usize, Block)> = flow_nodes
        .iter()
        .map(|&u| (in_vertex[&u], out_vertex[&u], Block::Leaf(u)))
        .collect();

    loop {
        let mut changed = false;

        // Parallel merges.
        let mut by_ends: BTreeMap<(usize, usize), Vec<Block>> = BTreeMap::new();
        for (a, b, blk) in edges.drain(..) {
            by_ends.entry((a, b)).or_default().push(blk);
        }
        for ((a, b), blocks) in by_ends {
            if blocks.len() > 1 {
                changed = true;
            }
            let merged = blocks.into_iter().reduce(Block::parallel).unwrap();
            edges.push((a, b, merged));
        }

        // Series merges at interior vertices with one edge in and one out.
        let mut indeg: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut outdeg: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, (a, b, _)) in edges.iter().enumerate() {
            outdeg.entry(*a).or_default().push(i);
            indeg.entry(*b).or_default().push(i);
        }
        let pick = indeg.iter().find_map(|(&v, ins)| {
            let outs = outdeg.get(&v)?;
            (v > RIGHT && ins.len() == 1 && outs.len() == 1).then(|| (ins[0], outs[0]))
        });
        if let Some((i, o)) = pick {
            let (hi, lo) = (i.max(o), i.min(o));
            let e_hi = edges.remove(hi);
            let e_lo = edges.remove(lo);
            let (first, second) = if i < o { (e_lo, e_hi) } else { (e_hi, e_lo) };
            edges.push((first.0, second.1, Block::series(first.2, second.2)));
            changed = true;
        }

        if !changed {
            break;
        }
    }

    match edges.as_slice() {
        [(LEFT, RIGHT, _)] => Ok(edges.pop().unwrap().2),
        _ => Err(unrepresentable(format!(
            "rung starting at node {} is not a series-parallel network",
            flow_nodes.first().copied().unwrap_or(0)
        ))),
    }
}

/// One grid cell of a laid-out rung, relative to the rung origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cell {
    Node(usize),
    Vert,
    Horz,
}

struct Canvas {
    cells: BTreeMap<(usize, usize), Cell>,
}

impl Canvas {
    fn put(&mut self, row: usize, col: usize, cell: Cell) {
        let prev = self.cells.insert((row, col), cell);
        debug_assert!(prev.is_none(), "layout overlap at ({row},{col})");
    }
}

fn size(b: &Block, ports: &Ports, at_left: bool, at_right: bool) -> (usize, usize) {
    match b {
        Block::Leaf(id) => {
            let depth = ports
                .get(id)
                .and_then(|l| l.last())
                .map_or(0, |&(k, _)| k as usize);
            (1, 1 + depth)
        }
        Block::Series(parts) => {
            let last = parts.len() - 1;
            parts.iter().enumerate().fold((0, 0), |(w, h), (i, p)| {
                let (pw, ph) = size(p, ports, at_left && i == 0, at_right && i == last);
                (w + pw, h.max(ph))
            })
        }
        Block::Parallel(parts) => {
            let (mut w, mut h) = (0, 0);
            for p in parts {
                let (pw, ph) = size(p, ports, at_left, at_right);
                w = w.max(pw);
                h += ph;
            }
            (w + usize::from(!at_left) + usize::from(!at_right), h)
        }
    }
}

/// Draw a junction column joining the given branch rows.
fn junction(canvas: &mut Canvas, col: usize, tops: &[usize]) {
    let (first, last) = (tops[0], *tops.last().unwrap());
    for r in first..last {
        canvas.put(r, col, Cell::Vert);
    }
    canvas.put(last, col, Cell::Horz);
}

fn place(
    b: &Block,
    ports: &Ports,
    row: usize,
    col: usize,
    at_left: bool,
    at_right: bool,
    canvas: &mut Canvas,
) {
    match b {
        Block::Leaf(id) => {
            canvas.put(row, col, Cell::Node(*id));
            for &(k, var) in ports.get(id).into_iter().flatten() {
                canvas.put(row + k as usize, col, Cell::Node(var));
            }
        }
        Block::Series(parts) => {
            let last = parts.len() - 1;
            let mut c = col;
            for (i, p) in parts.iter().enumerate() {
                let (l, r) = (at_left && i == 0, at_right && i == last);
                place(p, ports, row, c, l, r, canvas);
                c += size(p, ports, l, r).0;
            }
        }
        Block::Parallel(parts) => {
            let inner = col + usize::from(!at_left);
            let sizes: Vec<_> = parts.iter().map(|p| size(p, ports, at_left, at_right)).collect();
            let width = sizes.iter().map(|s| s.0).max().unwrap();
            let mut tops = Vec::with_capacity(parts.len());
            let mut r = row;
            for (p, &(w, h)) in parts.iter().zip(&sizes) {
                place(p, ports, r, inner, at_left, at_right, canvas);
                if !at_right {
                    for c in inner + w..inner + width {
                        canvas.put(r, c, Cell::Horz);
                    }
                }
                tops.push(r);
                r += h;
            }
            if !at_left {
                junction(canvas, col, &tops);
            }
            if !at_right {
                junction(canvas, inner + width, &tops);
            }
        }
    }
}

fn to_elements(graph: &LdGraph, canvas: Canvas) -> Vec<XmlElement> {
    let mut out = Vec::new();
    let mut run: Option<XmlElement> = None;
    let flush = |run: &mut Option<XmlElement>, out: &mut Vec<XmlElement>| {
        if let Some(mut e) = run.take() {
            if e.length.unwrap_or(1) == 1 {
                e.kind = XmlKind::HorzLine;
                e.length = None;
            }
            out.push(e);
        }
    };
    for ((row, col), cell) in canvas.cells {
        if let (Cell::Horz, Some(r)) = (cell, run.as_mut()) {
            let len = r.length.unwrap();
            if r.row == row && r.col + len == col {
                r.length = Some(len + 1);
                continue;
            }
        }
        flush(&mut run, &mut out);
        match cell {
            Cell::Horz => {
                run = Some(XmlElement {
                    kind: XmlKind::MultiHorzLine,
                    row,
                    col,
                    name: String::new(),
                    params: Vec::new(),
                    length: Some(1),
                })
            }
            Cell::Vert => out.push(XmlElement::line(XmlKind::VertLine, row, col)),
            Cell::Node(id) => {
                let node = graph.node(id).expect("laid-out node exists");
                out.push(XmlElement {
                    kind: XmlKind::Node(node.element_type),
                    row,
                    col,
                    name: node.name.clone(),
                    params: node.params().to_vec(),
                    length: None,
                });
            }
        }
    }
    flush(&mut run, &mut out);
    out
}

/// Lay out every rung of a valid graph. Rungs follow component order.
pub(super) fn layout(graph: &LdGraph) -> Result<Vec<Vec<XmlElement>>, CodecError> {
    let mut rungs = Vec::new();
    for comp in graph.components() {
        let (flow_nodes, ports) = classify(graph, &comp)?;
        let mut canvas = Canvas {
            cells: BTreeMap::new(),
        };
        if flow_nodes.is_empty() {
            // A lone Variable.
            canvas.put(0, 0, Cell::Node(comp[0]));
        } else {
            let tree = decompose(graph, &flow_nodes)?;
            place(&tree, &ports, 0, 0, true, true, &mut canvas);
        }
        rungs.push(to_elements(graph, canvas));
    }
    Ok(rungs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, Node};

    fn nodes(types: &[ElementType]) -> Vec<Node> {
        types
            .iter()
            .enumerate()
            .map(|(i, &t)| Node::new(i, t, format!("N{i}")))
            .collect()
    }

    #[test]
    fn bridge_is_rejected() {
        use ElementType::NormallyOpen as NO;
        // Node 3 is fed by {0, 1} while node 2 is fed by {0} alone.
        let g = LdGraph::from_parts(
            nodes(&[NO, NO, NO, NO]),
            vec![
                Edge::new(0, 2, EdgeType::Flow),
                Edge::new(0, 3, EdgeType::Flow),
                Edge::new(1, 3, EdgeType::Flow),
            ],
        );
        assert!(matches!(layout(&g), Err(CodecError::Unrepresentable(_))));
    }

    #[test]
    fn wrong_flow_type_is_rejected() {
        use ElementType::*;
        let g = LdGraph::from_parts(
            nodes(&[NormallyOpen, StandardCoil]),
            vec![Edge::new(0, 1, EdgeType::Enable)],
        );
        assert!(matches!(layout(&g), Err(CodecError::Unrepresentable(_))));
    }

    #[test]
    fn decomposition_of_parallel_then_series() {
        use ElementType::*;
        let g = LdGraph::from_parts(
            nodes(&[NormallyOpen, NormallyClosed, StandardCoil]),
            vec![Edge::new(0, 2, EdgeType::Flow), Edge::new(1, 2, EdgeType::Flow)],
        );
        let tree = decompose(&g, &[0, 1, 2]).unwrap();
        assert_eq!(
            tree,
            Block::Series(vec![
                Block::Parallel(vec![Block::Leaf(0), Block::Leaf(1)]),
                Block::Leaf(2)
            ])
        );
    }
}
