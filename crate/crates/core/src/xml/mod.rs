//! Coordinate-based XML for Ladder Diagram programs.
//!
//! ```xml
//! <Program>
//!   <Rung>
//!     <Element ElementType="NormallyOpen" Row="0" Col="0" Name="X0"/>
//!     <Element ElementType="HorzLine" Row="0" Col="1"/>
//!     <Element ElementType="StandardCoil" Row="0" Col="2" Name="Y0"/>
//!   </Rung>
//! </Program>
//! ```
//!
//! A rung is a grid of cells. Let `P(r, x)` be the left edge of cell
//! `(r, x)`. Wiring is resolved as follows:
//!
//! * an element at `(r, c)` takes power at `P(r, c)` and delivers it at
//!   `P(r, c+1)`. Variables have no power terminals.
//! * `HorzLine`, and each cell spanned by `MultiHorzLine`, joins `P(r, c)`
//!   and `P(r, c+1)`.
//! * `VertLine` joins like a `HorzLine` and additionally ties its cell to the
//!   cell directly below, which must hold a `HorzLine` or `VertLine`.
//! * every element delivering power into a connected set of points gets an
//!   edge to every element taking power from it.
//! * a Variable `k` rows below a `FunctionBlock` in the same column, with
//!   only empty cells or other Variables between them, gets an `Input<k>`
//!   edge from the block.
//!
//! Node ids follow column-major order within a rung (column, then row), and
//! continue across rungs, so every edge points to a larger id.

mod layout;

use std::collections::BTreeMap;

use crate::codecs::{checked, CodecError};
use crate::graph::{is_valid_param_key, Edge, EdgeType, ElementType, LdGraph, Node};

/// What an `<Element>` draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XmlKind {
    Node(ElementType),
    VertLine,
    HorzLine,
    MultiHorzLine,
}

impl XmlKind {
    pub fn as_str(self) -> &'static str {
        match self {
            XmlKind::Node(t) => t.as_str(),
            XmlKind::VertLine => "VertLine",
            XmlKind::HorzLine => "HorzLine",
            XmlKind::MultiHorzLine => "MultiHorzLine",
        }
    }

    fn parse(s: &str) -> Option<XmlKind> {
        match s {
            "VertLine" => Some(XmlKind::VertLine),
            "HorzLine" => Some(XmlKind::HorzLine),
            "MultiHorzLine" => Some(XmlKind::MultiHorzLine),
            _ => s.parse().ok().map(XmlKind::Node),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XmlElement {
    pub kind: XmlKind,
    pub row: usize,
    pub col: usize,
    pub name: String,
    pub params: Vec<(String, String)>,
    /// Cells spanned; set only for `MultiHorzLine`.
    pub length: Option<usize>,
}

impl XmlElement {
    pub fn line(kind: XmlKind, row: usize, col: usize) -> XmlElement {
        XmlElement {
            kind,
            row,
            col,
            name: String::new(),
            params: Vec::new(),
            length: None,
        }
    }

    fn span(&self) -> usize {
        self.length.unwrap_or(1)
    }
}

/// Rungs in document order, elements in document order within each rung.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LdXmlDocument {
    pub rungs: Vec<Vec<XmlElement>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct XmlOptions {
    /// Ignore unknown attributes and elements instead of rejecting them.
    pub lenient: bool,
}

pub fn parse_xml(text: &str) -> Result<LdGraph, CodecError> {
    parse_xml_with(text, XmlOptions::default())
}

pub fn parse_xml_with(text: &str, opts: XmlOptions) -> Result<LdGraph, CodecError> {
    document_to_graph(&read_document(text, opts)?)
}

/// Lay out a valid graph and write it as XML. Fails for graphs whose
/// connections cannot be drawn on a grid.
pub fn emit_xml(graph: &LdGraph) -> Result<String, CodecError> {
    checked(graph.clone())?;
    check_xml_text(graph)?;
    Ok(write_document(&layout_document(graph)?))
}

pub fn layout_document(graph: &LdGraph) -> Result<LdXmlDocument, CodecError> {
    Ok(LdXmlDocument {
        rungs: layout::layout(graph)?,
    })
}

// ---------------------------------------------------------------------------
// Reading

fn schema_at(doc: &roxmltree::Document, node: roxmltree::Node, msg: String) -> CodecError {
    let pos = doc.text_pos_at(node.range().start);
    CodecError::Schema(format!("line {}, column {}: {msg}", pos.row, pos.col))
}

fn parse_index(raw: &str) -> Option<usize> {
    if raw.is_empty() || !raw.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    raw.parse().ok()
}

fn read_element(
    doc: &roxmltree::Document,
    node: roxmltree::Node,
    opts: XmlOptions,
) -> Result<XmlElement, CodecError> {
    let err = |msg: String| schema_at(doc, node, msg);
    let mut kind = None;
    let (mut row, mut col, mut length) = (None, None, None);
    let mut name = None;
    let mut params = Vec::new();
    for attr in node.attributes() {
        let value = attr.value();
        match attr.name() {
            "ElementType" => {
                kind = Some(
                    XmlKind::parse(value)
                        .ok_or_else(|| err(format!("unknown element type `{value}`")))?,
                )
            }
            "Row" => row = Some(parse_index(value).ok_or_else(|| err(format!("bad Row `{value}`")))?),
            "Col" => col = Some(parse_index(value).ok_or_else(|| err(format!("bad Col `{value}`")))?),
            "Length" => {
                length = Some(
                    parse_index(value)
                        .filter(|&n| n > 0)
                        .ok_or_else(|| err(format!("bad Length `{value}`")))?,
                )
            }
            "Name" => name = Some(value.to_string()),
            other => match other.strip_prefix("Param.") {
                Some(key) if is_valid_param_key(key) => {
                    params.push((key.to_string(), value.to_string()))
                }
                _ if opts.lenient => {}
                _ => return Err(err(format!("unknown attribute `{other}`"))),
            },
        }
    }
    let kind = kind.ok_or_else(|| err("missing ElementType".into()))?;
    let row = row.ok_or_else(|| err("missing Row".into()))?;
    let col = col.ok_or_else(|| err("missing Col".into()))?;
    match (kind, length) {
        (XmlKind::MultiHorzLine, None) => return Err(err("MultiHorzLine needs Length".into())),
        (XmlKind::MultiHorzLine, Some(_)) => {}
        (_, Some(_)) if !opts.lenient => {
            return Err(err(format!("Length is only allowed on MultiHorzLine, not {}", kind.as_str())))
        }
        (_, Some(_)) => length = None,
        _ => {}
    }
    let is_line = !matches!(kind, XmlKind::Node(_));
    if is_line && (!params.is_empty() || name.as_deref().is_some_and(|n| !n.is_empty())) {
        if !opts.lenient {
            return Err(err(format!("{} takes no Name or parameters", kind.as_str())));
        }
        params.clear();
        name = None;
    }
    params.sort();
    if params.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(err("duplicate parameter".into()));
    }
    Ok(XmlElement {
        kind,
        row,
        col,
        name: name.unwrap_or_default(),
        params,
        length,
    })
}

fn check_no_attributes(
    doc: &roxmltree::Document,
    node: roxmltree::Node,
    opts: XmlOptions,
) -> Result<(), CodecError> {
    match node.attributes().next() {
        Some(a) if !opts.lenient => Err(schema_at(
            doc,
            node,
            format!("unknown attribute `{}` on <{}>", a.name(), node.tag_name().name()),
        )),
        _ => Ok(()),
    }
}

/// Children that carry content; whitespace text, comments and processing
/// instructions are skipped.
fn content_children<'a, 'input>(
    doc: &roxmltree::Document,
    parent: roxmltree::Node<'a, 'input>,
) -> Result<Vec<roxmltree::Node<'a, 'input>>, CodecError> {
    let mut out = Vec::new();
    for child in parent.children() {
        if child.is_element() {
            out.push(child);
        } else if child.is_text() && !child.text().unwrap_or("").trim().is_empty() {
            return Err(schema_at(doc, child, "unexpected text".into()));
        }
    }
    Ok(out)
}

/// Parse and schema-check the XML without interpreting the wiring.
pub fn read_document(text: &str, opts: XmlOptions) -> Result<LdXmlDocument, CodecError> {
    let doc = roxmltree::Document::parse(text).map_err(|e| {
        let pos = e.pos();
        CodecError::Parse {
            line: pos.row as usize,
            column: pos.col as usize,
            message: e.to_string(),
        }
    })?;
    let root = doc.root_element();
    if root.tag_name().name() != "Program" {
        return Err(schema_at(
            &doc,
            root,
            format!("root element must be <Program>, found <{}>", root.tag_name().name()),
        ));
    }
    check_no_attributes(&doc, root, opts)?;
    let mut rungs = Vec::new();
    for rung in content_children(&doc, root)? {
        if rung.tag_name().name() != "Rung" {
            if opts.lenient {
                continue;
            }
            return Err(schema_at(
                &doc,
                rung,
                format!("expected <Rung>, found <{}>", rung.tag_name().name()),
            ));
        }
        check_no_attributes(&doc, rung, opts)?;
        let mut elements = Vec::new();
        let mut occupied: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for el in content_children(&doc, rung)? {
            if el.tag_name().name() != "Element" {
                if opts.lenient {
                    continue;
                }
                return Err(schema_at(
                    &doc,
                    el,
                    format!("expected <Element>, found <{}>", el.tag_name().name()),
                ));
            }
            if !opts.lenient && el.has_children() {
                return Err(schema_at(&doc, el, "<Element> must be empty".into()));
            }
            let x = read_element(&doc, el, opts)?;
            for c in x.col..x.col + x.span() {
                if occupied.insert((x.row, c), elements.len()).is_some() {
                    return Err(schema_at(
                        &doc,
                        el,
                        format!("cell (row {}, col {c}) is already occupied", x.row),
                    ));
                }
            }
            elements.push(x);
        }
        rungs.push(elements);
    }
    Ok(LdXmlDocument { rungs })
}

// ---------------------------------------------------------------------------
// Wiring

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Cell {
    Line,
    Vert,
    Elem(usize),
}

/// Infer edges for one rung. `first_id` is the id given to the rung's first
/// node; returns the rung's nodes and edges.
fn wire_rung(
    rung_index: usize,
    elements: &[XmlElement],
    first_id: usize,
) -> Result<(Vec<Node>, Vec<Edge>), CodecError> {
    let mut order: Vec<usize> = (0..elements.len())
        .filter(|&i| matches!(elements[i].kind, XmlKind::Node(_)))
        .collect();
    order.sort_by_key(|&i| (elements[i].col, elements[i].row));
    let mut id_of = vec![usize::MAX; elements.len()];
    let mut nodes = Vec::with_capacity(order.len());
    for (k, &i) in order.iter().enumerate() {
        let el = &elements[i];
        let XmlKind::Node(t) = el.kind else { unreachable!() };
        let id = first_id + k;
        id_of[i] = id;
        let node = Node::new(id, t, el.name.clone())
            .with_params(el.params.iter().cloned())
            .map_err(|e| CodecError::Schema(format!("rung {rung_index}: {e}")))?;
        nodes.push(node);
    }

    let mut cells: BTreeMap<(usize, usize), Cell> = BTreeMap::new();
    let mut width = 0;
    for (i, el) in elements.iter().enumerate() {
        let cell = match el.kind {
            XmlKind::Node(_) => Cell::Elem(i),
            XmlKind::VertLine => Cell::Vert,
            XmlKind::HorzLine | XmlKind::MultiHorzLine => Cell::Line,
        };
        for c in el.col..el.col + el.span() {
            cells.insert((el.row, c), cell);
        }
        width = width.max(el.col + el.span());
    }
    let rows = cells.keys().map(|&(r, _)| r + 1).max().unwrap_or(0);
    let stride = width + 1;
    let point = |r: usize, x: usize| r * stride + x;
    let mut uf = UnionFind::new(rows * stride);

    for (&(r, c), &cell) in &cells {
        match cell {
            Cell::Line => uf.union(point(r, c), point(r, c + 1)),
            Cell::Vert => {
                uf.union(point(r, c), point(r, c + 1));
                match cells.get(&(r + 1, c)) {
                    Some(Cell::Line | Cell::Vert) => uf.union(point(r, c), point(r + 1, c)),
                    _ => {
                        return Err(CodecError::Wiring(format!(
                            "rung {rung_index}: VertLine at row {r}, col {c} has no line below it"
                        )))
                    }
                }
            }
            Cell::Elem(_) => {}
        }
    }

    let ty = |i: usize| match elements[i].kind {
        XmlKind::Node(t) => t,
        _ => unreachable!(),
    };
    let mut nets: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for &i in &order {
        if ty(i) == ElementType::Variable {
            continue;
        }
        let (r, c) = (elements[i].row, elements[i].col);
        nets.entry(uf.find(point(r, c + 1))).or_default().0.push(i);
        nets.entry(uf.find(point(r, c))).or_default().1.push(i);
    }

    let mut edges = Vec::new();
    for (drivers, receivers) in nets.values() {
        for &d in drivers {
            for &v in receivers {
                if d == v {
                    let el = &elements[d];
                    return Err(CodecError::Wiring(format!(
                        "rung {rung_index}: element at row {}, col {} is short-circuited",
                        el.row, el.col
                    )));
                }
                edges.push(Edge::new(id_of[d], id_of[v], EdgeType::for_flow(ty(d), ty(v))));
            }
        }
    }

    for &i in &order {
        if ty(i) != ElementType::FunctionBlock {
            continue;
        }
        let (r, c) = (elements[i].row, elements[i].col);
        for below in r + 1..rows {
            match cells.get(&(below, c)) {
                None => continue,
                Some(&Cell::Elem(v)) if ty(v) == ElementType::Variable => {
                    let k = u32::try_from(below - r).map_err(|_| {
                        CodecError::Wiring(format!("rung {rung_index}: input port out of range"))
                    })?;
                    edges.push(Edge::new(id_of[i], id_of[v], EdgeType::Input(k)));
                }
                Some(_) => break,
            }
        }
    }
    Ok((nodes, edges))
}

/// Turn a schema-checked document into a validated graph.
pub fn document_to_graph(doc: &LdXmlDocument) -> Result<LdGraph, CodecError> {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for (ri, rung) in doc.rungs.iter().enumerate() {
        let (n, e) = wire_rung(ri, rung, nodes.len())?;
        nodes.extend(n);
        edges.extend(e);
    }
    checked(LdGraph::from_parts(nodes, edges).canonicalize())
}

// ---------------------------------------------------------------------------
// Writing

fn is_xml_char(c: char) -> bool {
    matches!(c, '\t' | '\n' | '\r' | '\u{20}'..='\u{D7FF}' | '\u{E000}'..='\u{FFFD}' | '\u{10000}'..)
}

fn push_attr(out: &mut String, key: &str, value: &str) {
    out.push(' ');
    out.push_str(key);
    out.push_str("=\"");
    for c in value.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\t' => out.push_str("&#9;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
    out.push('"');
}

/// Serialize a document. Attribute order is fixed: `ElementType`, `Row`,
/// `Col`, `Name`, `Param.*` in key order, `Length`. Line elements carry no
/// `Name`.
pub fn write_document(doc: &LdXmlDocument) -> String {
    let mut out = String::from("<Program>\n");
    for rung in &doc.rungs {
        out.push_str("  <Rung>\n");
        for el in rung {
            out.push_str("    <Element");
            push_attr(&mut out, "ElementType", el.kind.as_str());
            push_attr(&mut out, "Row", &el.row.to_string());
            push_attr(&mut out, "Col", &el.col.to_string());
            if let XmlKind::Node(_) = el.kind {
                push_attr(&mut out, "Name", &el.name);
            }
            for (k, v) in &el.params {
                push_attr(&mut out, &format!("Param.{k}"), v);
            }
            if let Some(n) = el.length {
                push_attr(&mut out, "Length", &n.to_string());
            }
            out.push_str("/>\n");
        }
        out.push_str("  </Rung>\n");
    }
    out.push_str("</Program>\n");
    out
}

fn check_xml_text(graph: &LdGraph) -> Result<(), CodecError> {
    for node in graph.nodes() {
        let texts = std::iter::once(node.name.as_str()).chain(node.params().iter().map(|(_, v)| v.as_str()));
        for t in texts {
            if let Some(c) = t.chars().find(|&c| !is_xml_char(c)) {
                return Err(CodecError::Unrepresentable(format!(
                    "node {} contains U+{:04X}, which XML cannot carry",
                    node.id, c as u32
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::graph_equal;

    fn xml(body: &str) -> String {
        format!("<Program><Rung>{body}</Rung></Program>")
    }

    #[test]
    fn minimal_series_rung() {
        let g = parse_xml(&xml(
            r#"<Element ElementType="NormallyOpen" Row="0" Col="0" Name="X0"/>
               <Element ElementType="HorzLine" Row="0" Col="1"/>
               <Element ElementType="StandardCoil" Row="0" Col="2" Name="Y0"/>"#,
        ))
        .unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.node(0).unwrap().element_type, ElementType::NormallyOpen);
        assert_eq!(g.edges(), &[Edge::new(0, 1, EdgeType::Flow)]);
    }

    #[test]
    fn parallel_branch() {
        let g = parse_xml(&xml(
            r#"<Element ElementType="NormallyOpen" Row="0" Col="0" Name="X0"/>
               <Element ElementType="NormallyClosed" Row="1" Col="0" Name="X1"/>
               <Element ElementType="VertLine" Row="0" Col="1"/>
               <Element ElementType="HorzLine" Row="1" Col="1"/>
               <Element ElementType="StandardCoil" Row="0" Col="2" Name="Y0"/>"#,
        ))
        .unwrap();
        assert_eq!(
            g.edges(),
            &[Edge::new(0, 2, EdgeType::Flow), Edge::new(1, 2, EdgeType::Flow)]
        );
    }

    #[test]
    fn parallel_contacts_enable_block() {
        let g = parse_xml(&xml(
            r#"<Element ElementType="NormallyOpen" Row="0" Col="0" Name="X0"/>
               <Element ElementType="NormallyOpen" Row="1" Col="0" Name="X1"/>
               <Element ElementType="VertLine" Row="0" Col="1"/>
               <Element ElementType="HorzLine" Row="1" Col="1"/>
               <Element ElementType="FunctionBlock" Row="0" Col="2" Name="MOV_1"/>
               <Element ElementType="StandardCoil" Row="0" Col="3" Name="Y0"/>"#,
        ))
        .unwrap();
        assert_eq!(
            g.edges(),
            &[
                Edge::new(0, 2, EdgeType::Enable),
                Edge::new(1, 2, EdgeType::Enable),
                Edge::new(2, 3, EdgeType::Output),
            ]
        );
        let back = parse_xml(&emit_xml(&g).unwrap()).unwrap();
        assert!(graph_equal(&back, &g));
    }

    #[test]
    fn function_block_ports() {
        let g = parse_xml(&xml(
            r#"<Element ElementType="NormallyOpen" Row="0" Col="0" Name="X0"/>
               <Element ElementType="FunctionBlock" Row="0" Col="1" Name="T0" Param.kind="TON"/>
               <Element ElementType="Variable" Row="1" Col="1" Name="T#5S"/>
               <Element ElementType="StandardCoil" Row="0" Col="2" Name="Y0"/>"#,
        ))
        .unwrap();
        assert_eq!(
            g.edges(),
            &[
                Edge::new(0, 1, EdgeType::Enable),
                Edge::new(1, 2, EdgeType::Input(1)),
                Edge::new(1, 3, EdgeType::Output),
            ]
        );
    }

    #[test]
    fn dangling_vertline_is_wiring_error() {
        let r = parse_xml(&xml(
            r#"<Element ElementType="NormallyOpen" Row="0" Col="0" Name="X0"/>
               <Element ElementType="VertLine" Row="0" Col="1"/>"#,
        ));
        assert!(matches!(r, Err(CodecError::Wiring(m)) if m.contains("row 0, col 1")));
    }

    #[test]
    fn unknown_type_is_named() {
        let r = parse_xml(&xml(r#"<Element ElementType="Relay" Row="0" Col="0"/>"#));
        assert!(matches!(r, Err(CodecError::Schema(m)) if m.contains("Relay")));
    }

    #[test]
    fn malformed_xml_reports_position() {
        match parse_xml("<Program>\n<Rung>\n</Program>") {
            Err(CodecError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn strict_and_lenient_attributes() {
        let text = xml(r#"<Element ElementType="Inverter" Row="0" Col="0" Color="red"/>"#);
        assert!(matches!(parse_xml(&text), Err(CodecError::Schema(_))));
        let g = parse_xml_with(&text, XmlOptions { lenient: true }).unwrap();
        assert_eq!(g.node_count(), 1);
    }

    #[test]
    fn overlap_is_schema_error() {
        let r = parse_xml(&xml(
            r#"<Element ElementType="MultiHorzLine" Row="0" Col="0" Length="3"/>
               <Element ElementType="Inverter" Row="0" Col="2"/>"#,
        ));
        assert!(matches!(r, Err(CodecError::Schema(m)) if m.contains("occupied")));
    }

    #[test]
    fn multi_horz_line_spans_cells() {
        let g = parse_xml(&xml(
            r#"<Element ElementType="NormallyOpen" Row="0" Col="0" Name="X0"/>
               <Element ElementType="MultiHorzLine" Row="0" Col="1" Length="4"/>
               <Element ElementType="StandardCoil" Row="0" Col="5" Name="Y0"/>"#,
        ))
        .unwrap();
        assert_eq!(g.edges(), &[Edge::new(0, 1, EdgeType::Flow)]);
    }

    #[test]
    fn empty_program() {
        let g = LdGraph::empty();
        let text = emit_xml(&g).unwrap();
        assert_eq!(text, "<Program>\n</Program>\n");
        assert!(parse_xml(&text).unwrap().is_empty());
    }

    #[test]
    fn singleton_coil() {
        let g = LdGraph::from_parts(vec![Node::new(0, ElementType::StandardCoil, "Y0")], vec![]);
        let text = emit_xml(&g).unwrap();
        assert_eq!(
            text,
            "<Program>\n  <Rung>\n    <Element ElementType=\"StandardCoil\" Row=\"0\" Col=\"0\" Name=\"Y0\"/>\n  </Rung>\n</Program>\n"
        );
    }

    #[test]
    fn branch_round_trip() {
        let g = LdGraph::from_parts(
            vec![
                Node::new(0, ElementType::NormallyOpen, "X0"),
                Node::new(1, ElementType::NormallyClosed, "X1"),
                Node::new(2, ElementType::StandardCoil, "Y0"),
            ],
            vec![Edge::new(0, 2, EdgeType::Flow), Edge::new(1, 2, EdgeType::Flow)],
        );
        let back = parse_xml(&emit_xml(&g).unwrap()).unwrap();
        assert!(graph_equal(&g, &back));
    }

    #[test]
    fn special_characters_survive() {
        let g = LdGraph::from_parts(
            vec![Node::new(0, ElementType::Variable, "a<b>&\"c'\td\ne\r")
                .with_params([("note", " lead & trail ")])
                .unwrap()],
            vec![],
        );
        let back = parse_xml(&emit_xml(&g).unwrap()).unwrap();
        assert!(graph_equal(&g, &back));
    }

    #[test]
    fn control_characters_are_unrepresentable() {
        let g = LdGraph::from_parts(vec![Node::new(0, ElementType::Variable, "a\u{1}")], vec![]);
        assert!(matches!(emit_xml(&g), Err(CodecError::Unrepresentable(_))));
    }
}
