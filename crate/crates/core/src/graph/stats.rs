use serde::{Deserialize, Serialize};

use super::{BitSet, Graph, Vertex};
use crate::error::{Error, Result};

/// The counting primitives the family and good-set conditions are stated in.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "query", rename_all = "snake_case")]
pub enum StatQuery {
    /// `deg_G(v, S)`.
    DegreeInto { v: Vertex, set: Vec<Vertex> },
    /// `|N(u, S) ∩ N(v, S)|`.
    CodegreeInto { u: Vertex, v: Vertex, set: Vec<Vertex> },
    /// `e_G(X, Y)` for disjoint `X`, `Y`.
    EdgesBetween { x: Vec<Vertex>, y: Vec<Vertex> },
    TrianglesAtVertex { v: Vertex },
    TrianglesOnEdge { u: Vertex, v: Vertex },
    /// `Σ_{ {u,v} ∈ P } |N(u, W') ∩ N(v, W')|` for pairs avoiding `W'`.
    PairFamilyTriangleSum { pairs: Vec<(Vertex, Vertex)>, set: Vec<Vertex> },
    /// `|⋃_{ {u,v} ∈ P } N(u, W) ∩ N(v, W)|` for edges avoiding `W`.
    PairFamilyCommonUnion { pairs: Vec<(Vertex, Vertex)>, set: Vec<Vertex> },
}

fn check(g: &Graph, v: Vertex) -> Result<()> {
    if v >= g.n() {
        Err(Error::VertexOutOfRange { vertex: v, n: g.n() })
    } else {
        Ok(())
    }
}

fn set_of(g: &Graph, vs: &[Vertex]) -> Result<BitSet> {
    for &v in vs {
        check(g, v)?;
    }
    Ok(BitSet::from_slice(g.n(), vs))
}

fn pairs_avoid(g: &Graph, pairs: &[(Vertex, Vertex)], set: &BitSet, need_edges: bool) -> Result<()> {
    for &(u, v) in pairs {
        check(g, u)?;
        check(g, v)?;
        if u == v {
            return Err(Error::Input(format!("pair ({u}, {v}) repeats a vertex")));
        }
        if set.contains(u) || set.contains(v) {
            return Err(Error::Input(format!("pair ({u}, {v}) meets the target set")));
        }
        if need_edges && !g.has_edge(u, v) {
            return Err(Error::MissingEdge(u, v));
        }
    }
    Ok(())
}

/// Exact evaluation of a [`StatQuery`].
pub fn graph_stat(g: &Graph, query: &StatQuery) -> Result<usize> {
    match query {
        StatQuery::DegreeInto { v, set } => {
            check(g, *v)?;
            Ok(set_of(g, set)?.count_in(g.row(*v)))
        }
        StatQuery::CodegreeInto { u, v, set } => {
            check(g, *u)?;
            check(g, *v)?;
            Ok(set_of(g, set)?.count_in2(g.row(*u), g.row(*v)))
        }
        StatQuery::EdgesBetween { x, y } => {
            set_of(g, x)?;
            let ys = set_of(g, y)?;
            if x.iter().any(|&v| ys.contains(v)) {
                return Err(Error::Input("edges_between needs disjoint sets".into()));
            }
            Ok(x.iter().map(|&v| ys.count_in(g.row(v))).sum())
        }
        StatQuery::TrianglesAtVertex { v } => {
            check(g, *v)?;
            Ok(g.triangles_at(*v))
        }
        StatQuery::TrianglesOnEdge { u, v } => {
            check(g, *u)?;
            check(g, *v)?;
            Ok(if g.has_edge(*u, *v) { g.codegree(*u, *v) } else { 0 })
        }
        StatQuery::PairFamilyTriangleSum { pairs, set } => {
            let s = set_of(g, set)?;
            pairs_avoid(g, pairs, &s, false)?;
            Ok(pairs.iter().map(|&(u, v)| s.count_in2(g.row(u), g.row(v))).sum())
        }
        StatQuery::PairFamilyCommonUnion { pairs, set } => {
            let s = set_of(g, set)?;
            pairs_avoid(g, pairs, &s, true)?;
            let mut union = BitSet::new(g.n());
            for &(u, v) in pairs {
                for w in s.members_in2(g.row(u), g.row(v)) {
                    union.insert(w);
                }
            }
            Ok(union.len())
        }
    }
}
