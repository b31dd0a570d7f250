//! Text query files and JSON answers.
//!
//! One query per line, `#` comments allowed:
//!
//! ```text
//! E src dst label
//! G src1 dst1 label1; src2 dst2 label2; ...
//! R src dst label1,label2,...
//! ```

use std::io::{BufRead, Write};

use serde::Serialize;

use crate::error::{Result, SketchError};
use crate::metrics::relative_error;
use crate::oracle::ExactGraph;
use crate::query::{EdgeQuery, GraphSketch, ReachabilityQuery, SubgraphQuery};
use crate::stream::{parse_vertex, LabelDictionary};

#[derive(Clone, Debug, PartialEq)]
pub enum Query {
    Edge(EdgeQuery),
    Subgraph(SubgraphQuery),
    Reach(ReachabilityQuery),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Answer {
    Weight(f64),
    Reachable(bool),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QueryResult {
    pub query: String,
    pub estimate: Answer,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<Answer>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_error: Option<f64>,
}

fn parse_label(token: &str, labels: Option<&LabelDictionary>) -> std::result::Result<u16, String> {
    match labels {
        Some(dict) => dict.resolve(token).ok_or_else(|| format!("unknown label {token:?}")),
        None => token.parse().map_err(|_| format!("invalid label {token:?}")),
    }
}

fn parse_edge(text: &str, labels: Option<&LabelDictionary>) -> std::result::Result<EdgeQuery, String> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    match fields.as_slice() {
        [src, dst, label] => Ok(EdgeQuery::new(parse_vertex(src), parse_vertex(dst), parse_label(label, labels)?)),
        _ => Err(format!("expected `src dst label`, got {text:?}")),
    }
}

/// Parses one non-comment line.
pub fn parse_query(line: &str, labels: Option<&LabelDictionary>) -> std::result::Result<Query, String> {
    let line = line.trim();
    let (kind, rest) = line.split_once(char::is_whitespace).ok_or("missing query body")?;
    match kind {
        "E" => Ok(Query::Edge(parse_edge(rest, labels)?)),
        "G" => {
            let edges = rest
                .split(';')
                .filter(|part| !part.trim().is_empty())
                .map(|part| parse_edge(part, labels))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            SubgraphQuery::new(edges).map(Query::Subgraph).map_err(|e| e.to_string())
        }
        "R" => {
            let fields: Vec<&str> = rest.split_whitespace().collect();
            let [src, dst, list] = fields.as_slice() else {
                return Err(format!("expected `src dst label,label,...`, got {rest:?}"));
            };
            let allowed = list
                .split(',')
                .map(|t| parse_label(t.trim(), labels))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            ReachabilityQuery::new(parse_vertex(src), parse_vertex(dst), allowed)
                .map(Query::Reach)
                .map_err(|e| e.to_string())
        }
        other => Err(format!("unknown query kind {other:?}")),
    }
}

/// Parsed queries paired with their source text.
pub fn read_queries<R: BufRead>(reader: R, labels: Option<&LabelDictionary>) -> Result<Vec<(String, Query)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let q = parse_query(trimmed, labels).map_err(|message| SketchError::Parse { line: i + 1, message })?;
        out.push((trimmed.to_string(), q));
    }
    Ok(out)
}

fn label_text(label: u16, labels: Option<&LabelDictionary>) -> String {
    labels
        .and_then(|d| d.name_of(label))
        .map(str::to_string)
        .unwrap_or_else(|| label.to_string())
}

fn edge_text(e: &EdgeQuery, labels: Option<&LabelDictionary>) -> String {
    format!("{} {} {}", e.src, e.dst, label_text(e.label, labels))
}

pub fn format_query(q: &Query, labels: Option<&LabelDictionary>) -> String {
    match q {
        Query::Edge(e) => format!("E {}", edge_text(e, labels)),
        Query::Subgraph(g) => {
            let parts: Vec<String> = g.edges().iter().map(|e| edge_text(e, labels)).collect();
            format!("G {}", parts.join("; "))
        }
        Query::Reach(r) => {
            let ls: Vec<String> = r.labels().iter().map(|&l| label_text(l, labels)).collect();
            format!("R {} {} {}", r.src, r.dst, ls.join(","))
        }
    }
}

pub fn write_queries<W: Write>(out: &mut W, queries: &[Query], labels: Option<&LabelDictionary>) -> Result<()> {
    for q in queries {
        writeln!(out, "{}", format_query(q, labels))?;
    }
    Ok(())
}

/// Answers one query, with the exact answer when an oracle is given.
pub fn evaluate(sketch: &dyn GraphSketch, text: &str, q: &Query, oracle: Option<&ExactGraph>) -> Result<QueryResult> {
    let (estimate, exact) = match q {
        Query::Edge(e) => (Answer::Weight(sketch.estimate_edge(e)?), oracle.map(|o| Answer::Weight(o.edge_weight(e)))),
        Query::Subgraph(g) => (
            Answer::Weight(sketch.estimate_subgraph(g)?),
            oracle.map(|o| Answer::Weight(o.subgraph_weight(g))),
        ),
        Query::Reach(r) => (Answer::Reachable(sketch.estimate_reachable(r)?), oracle.map(|o| Answer::Reachable(o.reachable(r)))),
    };
    let relative_error = match (estimate, exact) {
        (Answer::Weight(est), Some(Answer::Weight(truth))) if truth > 0.0 => Some(relative_error(est, truth)?),
        _ => None,
    };
    Ok(QueryResult {
        query: text.to_string(),
        estimate,
        exact,
        relative_error,
    })
}
