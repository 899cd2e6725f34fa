//! Byte-for-byte checks of the text formats. Set `UPDATE_GOLDEN=1` to
//! rewrite the files after an intended format change.

use std::path::PathBuf;

use ladder_forge::codecs::FormatKind;
use ladder_forge::graph::{graph_equal, Edge, EdgeType, ElementType, LdGraph, Node};

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn check(name: &str, format: FormatKind, graph: &LdGraph) {
    let text = format.render(graph).unwrap();
    let path = golden(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &text).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, want, "{name} differs from its golden file");
    assert!(graph_equal(&format.parse(&want).unwrap(), graph));
}

fn chain() -> LdGraph {
    LdGraph::from_parts(
        vec![
            Node::new(0, ElementType::NormallyOpen, "X0"),
            Node::new(1, ElementType::NormallyClosed, "X1"),
            Node::new(2, ElementType::StandardCoil, "Y0"),
        ],
        vec![
            Edge::new(0, 1, EdgeType::Flow),
            Edge::new(1, 2, EdgeType::Flow),
        ],
    )
}

/// Start button in parallel with the coil's own contact, then the stop
/// button, then the coil.
fn latch() -> LdGraph {
    LdGraph::from_parts(
        vec![
            Node::new(0, ElementType::NormallyOpen, "START"),
            Node::new(1, ElementType::NormallyOpen, "Y0"),
            Node::new(2, ElementType::NormallyClosed, "STOP"),
            Node::new(3, ElementType::StandardCoil, "Y0"),
        ],
        vec![
            Edge::new(0, 2, EdgeType::Flow),
            Edge::new(1, 2, EdgeType::Flow),
            Edge::new(2, 3, EdgeType::Flow),
        ],
    )
}

/// A timer block with two operands, then a second rung.
fn timer() -> LdGraph {
    let ton = Node::new(1, ElementType::FunctionBlock, "TON_1")
        .with_params([("Preset", "K50"), ("Comment", "t<5 & \"fast\"")])
        .unwrap();
    LdGraph::from_parts(
        vec![
            Node::new(0, ElementType::RisingEdgeContact, "X10"),
            ton,
            Node::new(2, ElementType::Variable, "D100"),
            Node::new(3, ElementType::Variable, "K10"),
            Node::new(4, ElementType::SetCoil, "M0"),
            Node::new(5, ElementType::NormallyOpen, "M0"),
            Node::new(6, ElementType::StandardCoil, "Y1"),
        ],
        vec![
            Edge::new(0, 1, EdgeType::Enable),
            Edge::new(1, 2, EdgeType::Input(1)),
            Edge::new(1, 3, EdgeType::Input(2)),
            Edge::new(1, 4, EdgeType::Output),
            Edge::new(5, 6, EdgeType::Flow),
        ],
    )
}

#[test]
fn xml_chain() {
    check("chain.xml", FormatKind::Xml, &chain());
}

#[test]
fn xml_latch() {
    check("latch.xml", FormatKind::Xml, &latch());
}

#[test]
fn xml_timer() {
    check("timer.xml", FormatKind::Xml, &timer());
}

#[test]
fn json_timer() {
    check("timer.json", FormatKind::Json, &timer());
}

#[test]
fn metaprogram_timer() {
    check("timer.meta", FormatKind::Metaprogram, &timer());
}

#[test]
fn metaprogram_latch() {
    check("latch.meta", FormatKind::Metaprogram, &latch());
}
