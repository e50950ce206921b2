//! Line-oriented graph text format.
//!
//! ```text
//! # comment
//! var <name> [hidden]
//! edge <tail> -> <head>
//! edge <a> <-> <b>
//! ```
//!
//! Two extension line kinds cover conditional and split graphs: `fixed
//! <name>[=<value>]` declares a fixed vertex (with its intervention value
//! when the graph is a split world), and `label <vertex> <text>` attaches
//! the counterfactual label of a random vertex. `edge t -> h det` marks a
//! deterministic copy edge. Round trip holds up to declaration order.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{GraphError, MixedGraph, VertexId, VertexSet};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum TextError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: bad vertex name `{name}`")]
    BadName { line: usize, name: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Parse result: the graph plus any fixed-vertex values and labels that
/// were present in the file.
#[derive(Clone, Debug)]
pub struct ParsedGraph {
    pub graph: MixedGraph,
    pub fixed_values: BTreeMap<VertexId, String>,
    pub labels: BTreeMap<VertexId, String>,
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '^' || c == '=' || c == '\'')
}

/// Parses the text format. `#` starts a comment; blank lines are skipped.
pub fn parse_graph(input: &str) -> Result<ParsedGraph, TextError> {
    let mut random: Vec<VertexId> = Vec::new();
    let mut fixed: Vec<VertexId> = Vec::new();
    let mut hidden: VertexSet = VertexSet::new();
    let mut directed: Vec<(VertexId, VertexId)> = Vec::new();
    let mut bidirected: Vec<(VertexId, VertexId)> = Vec::new();
    let mut det: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
    let mut fixed_values = BTreeMap::new();
    let mut labels = BTreeMap::new();

    for (idx, raw) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let kw = parts.next().unwrap();
        let rest: Vec<&str> = parts.collect();
        let syntax = |msg: &str| TextError::Syntax {
            line: line_no,
            msg: msg.to_string(),
        };
        match kw {
            "var" => {
                let name = rest.first().ok_or_else(|| syntax("expected `var <name>`"))?;
                if !valid_name(name) {
                    return Err(TextError::BadName {
                        line: line_no,
                        name: name.to_string(),
                    });
                }
                let v = VertexId::new(*name);
                match rest.get(1) {
                    None => {}
                    Some(&"hidden") => {
                        hidden.insert(v.clone());
                    }
                    Some(other) => return Err(syntax(&format!("unexpected token `{other}`"))),
                }
                random.push(v);
            }
            "fixed" => {
                let spec = rest.first().ok_or_else(|| syntax("expected `fixed <name>`"))?;
                if !valid_name(spec) {
                    return Err(TextError::BadName {
                        line: line_no,
                        name: spec.to_string(),
                    });
                }
                let v = VertexId::new(*spec);
                if let Some((_, value)) = spec.split_once('=') {
                    fixed_values.insert(v.clone(), value.to_string());
                }
                fixed.push(v);
            }
            "edge" => {
                let (a, op, b) = match rest.as_slice() {
                    [a, op, b] | [a, op, b, "det"] => (*a, *op, *b),
                    _ => return Err(syntax("expected `edge <a> -> <b>` or `edge <a> <-> <b>`")),
                };
                for n in [a, b] {
                    if !valid_name(n) {
                        return Err(TextError::BadName {
                            line: line_no,
                            name: n.to_string(),
                        });
                    }
                }
                let (va, vb) = (VertexId::new(a), VertexId::new(b));
                match op {
                    "->" => {
                        if rest.len() == 4 {
                            det.insert((va.clone(), vb.clone()));
                        }
                        directed.push((va, vb));
                    }
                    "<->" => {
                        if rest.len() == 4 {
                            return Err(syntax("`det` only applies to directed edges"));
                        }
                        bidirected.push((va, vb));
                    }
                    other => return Err(syntax(&format!("unknown edge operator `{other}`"))),
                }
            }
            "label" => {
                let v = rest.first().ok_or_else(|| syntax("expected `label <vertex> <text>`"))?;
                let text = rest[1..].join(" ");
                labels.insert(VertexId::new(*v), text);
            }
            other => return Err(syntax(&format!("unknown directive `{other}`"))),
        }
    }

    let graph = MixedGraph::from_parts(random, fixed, directed, bidirected, hidden, det)?;
    Ok(ParsedGraph {
        graph,
        fixed_values,
        labels,
    })
}

/// Serializes a graph in the text format; inverse of [`parse_graph`] up
/// to declaration order.
pub fn serialize_graph(g: &MixedGraph) -> String {
    serialize_with(g, &BTreeMap::new(), &BTreeMap::new())
}

/// Serialization with fixed-vertex values and vertex labels (split
/// graphs use both).
pub fn serialize_with(
    g: &MixedGraph,
    fixed_values: &BTreeMap<VertexId, String>,
    labels: &BTreeMap<VertexId, String>,
) -> String {
    let mut out = String::new();
    for v in g.random() {
        out.push_str("var ");
        out.push_str(v.as_str());
        if g.hidden().contains(v) {
            out.push_str(" hidden");
        }
        out.push('\n');
    }
    for v in g.fixed() {
        out.push_str("fixed ");
        out.push_str(v.as_str());
        // Names of split halves already embed `name=value`; only add a
        // value for plain names.
        if !v.as_str().contains('=') {
            if let Some(val) = fixed_values.get(v) {
                out.push_str(&format!("={val}"));
            }
        }
        out.push('\n');
    }
    for (t, h) in g.directed_edges() {
        if g.det_edges().contains(&(t.clone(), h.clone())) {
            out.push_str(&format!("edge {t} -> {h} det\n"));
        } else {
            out.push_str(&format!("edge {t} -> {h}\n"));
        }
    }
    for (a, b) in g.bidirected_edges() {
        out.push_str(&format!("edge {a} <-> {b}\n"));
    }
    for (v, text) in labels {
        out.push_str(&format!("label {v} {text}\n"));
    }
    out
}
