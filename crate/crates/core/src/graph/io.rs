//! Edge-list and JSON graph files.
//!
//! Edge list: a header line `n m`, then `m` lines `u v`. JSON:
//! `{"n": n, "edges": [[u, v], ...]}`. Writers emit edges with `u < v` in
//! lexicographic order, so write-read-write is byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Graph, Vertex};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct JsonGraph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
}

pub fn to_edge_list(g: &Graph) -> String {
    let mut s = String::new();
    writeln!(s, "{} {}", g.n(), g.edge_count()).unwrap();
    for (u, v) in g.edges() {
        writeln!(s, "{u} {v}").unwrap();
    }
    s
}

fn parse_pair(line: &str, lineno: usize) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let mut next = |what: &str| -> Result<usize> {
        let tok = it.next().ok_or_else(|| Error::Parse { line: lineno, msg: format!("missing {what}") })?;
        tok.parse().map_err(|_| Error::Parse { line: lineno, msg: format!("bad {what} {tok:?}") })
    };
    let a = next("first field")?;
    let b = next("second field")?;
    if it.next().is_some() {
        return Err(Error::Parse { line: lineno, msg: "trailing fields".into() });
    }
    Ok((a, b))
}

/// Parses an edge list. Blank lines and lines starting with `#` are skipped.
pub fn from_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hl, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty graph file".into() })?;
    let (n, m) = parse_pair(header, hl)?;
    let mut edges = Vec::with_capacity(m);
    for (i, l) in lines {
        edges.push(parse_pair(l, i)?);
    }
    if edges.len() != m {
        return Err(Error::Parse {
            line: hl,
            msg: format!("header announces {m} edges but {} follow", edges.len()),
        });
    }
    Graph::from_edges(n, edges)
}

pub fn to_json(g: &Graph) -> String {
    serde_json::to_string(&JsonGraph { n: g.n(), edges: g.edges() }).expect("graph serializes")
}

pub fn from_json(text: &str) -> Result<Graph> {
    let j: JsonGraph = serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
    Graph::from_edges(j.n, j.edges)
}

/// Reads either format, choosing JSON when the first non-space byte is `{`.
pub fn read_graph(path: &Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        from_json(&text)
    } else {
        from_edge_list(&text)
    }
}
