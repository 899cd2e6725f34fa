//! Text renderings of [`LdGraph`]: XML (layout-bearing), JSON and the
//! metaprogram call-statement format.
//!
//! Every conversion goes through the graph, so each parse also validates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{LdGraph, ValidationReport};
use crate::xml;

pub mod json;
pub mod metaprogram;

pub use json::{parse_json_text, to_json_text};
pub use metaprogram::{parse_metaprogram, to_metaprogram};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("wiring error: {0}")]
    Wiring(String),
    #[error("invalid graph: {0}")]
    Invalid(ValidationReport),
    #[error("graph has no ladder layout: {0}")]
    Unrepresentable(String),
}

/// Validate a freshly decoded graph, turning violations into an error.
pub(crate) fn checked(graph: LdGraph) -> Result<LdGraph, CodecError> {
    let report = graph.validate();
    if report.is_valid() {
        Ok(graph)
    } else {
        Err(CodecError::Invalid(report))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatKind {
    Xml,
    Json,
    Metaprogram,
}

impl FormatKind {
    pub const ALL: [FormatKind; 3] = [FormatKind::Xml, FormatKind::Json, FormatKind::Metaprogram];

    pub fn as_str(self) -> &'static str {
        match self {
            FormatKind::Xml => "xml",
            FormatKind::Json => "json",
            FormatKind::Metaprogram => "metaprogram",
        }
    }

    /// Render a graph in this format. Only XML can fail, for graphs that have
    /// no grid layout.
    pub fn render(self, graph: &LdGraph) -> Result<String, CodecError> {
        match self {
            FormatKind::Xml => xml::emit_xml(graph),
            FormatKind::Json => Ok(to_json_text(graph)),
            FormatKind::Metaprogram => Ok(to_metaprogram(graph)),
        }
    }

    pub fn parse(self, text: &str) -> Result<LdGraph, CodecError> {
        self.parse_with(text, false)
    }

    /// `lenient` only affects XML, where unknown attributes are then ignored.
    pub fn parse_with(self, text: &str, lenient: bool) -> Result<LdGraph, CodecError> {
        match self {
            FormatKind::Xml => xml::parse_xml_with(text, xml::XmlOptions { lenient }),
            FormatKind::Json => parse_json_text(text),
            FormatKind::Metaprogram => parse_metaprogram(text),
        }
    }
}

impl fmt::Display for FormatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FormatKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "xml" => Ok(FormatKind::Xml),
            "json" => Ok(FormatKind::Json),
            "metaprogram" | "meta" | "code" => Ok(FormatKind::Metaprogram),
            other => Err(format!(
                "unknown format `{other}` (expected xml, json or metaprogram)"
            )),
        }
    }
}
