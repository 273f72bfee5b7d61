//! Template graphs: square-paths, pseudo-paths, backbone-paths, connecting
//! paths and single-vertex absorbers, with embeddings into host graphs.
//!
//! Labels are indices into [`AbstractGadget::labels`]; the string names are
//! for display and serialization only. Ports are ordered label pairs.

mod compose;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{input, Result};
use crate::graph::{Graph, Pair, Vertex};

pub use compose::{
    absorber_traversal, backbone_split, join_pseudo_paths_to_backbone, join_square_paths,
    BackboneSplit,
};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GadgetKind {
    SquarePath { ell: usize },
    PseudoPath { b: usize, ell: usize },
    Backbone { ell: usize },
    ConnectingPath { b: usize, ell: usize },
    /// `connectors[i]` is the number of vertices of the square-path `U_{i+1}`,
    /// ports included.
    AbsorberTemplate { ell: usize, connectors: Vec<usize> },
}

impl GadgetKind {
    /// Absorber template with every connector of the default length 4.
    pub fn absorber(ell: usize) -> GadgetKind {
        GadgetKind::AbsorberTemplate { ell, connectors: vec![4; ell.saturating_sub(1)] }
    }

    fn name(&self) -> &'static str {
        match self {
            GadgetKind::SquarePath { .. } => "square_path",
            GadgetKind::PseudoPath { .. } => "pseudo_path",
            GadgetKind::Backbone { .. } => "backbone",
            GadgetKind::ConnectingPath { .. } => "connecting_path",
            GadgetKind::AbsorberTemplate { .. } => "absorber_template",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ports {
    pub entry: Option<(usize, usize)>,
    pub exit: Option<(usize, usize)>,
    pub absorbee: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbstractGadget {
    pub kind: GadgetKind,
    pub labels: Vec<String>,
    /// Sorted, deduplicated label-index pairs `(i, j)` with `i < j`.
    pub edges: Vec<(usize, usize)>,
    pub ports: Ports,
}

fn norm(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Edges of the 4-square-path `(a, b, c, d)`.
fn sq4(set: &mut BTreeSet<(usize, usize)>, a: usize, b: usize, c: usize, d: usize) {
    for (x, y) in [(a, b), (a, c), (b, c), (b, d), (c, d)] {
        set.insert(norm(x, y));
    }
}

fn square_path_edges(set: &mut BTreeSet<(usize, usize)>, seq: &[usize]) {
    for i in 0..seq.len() {
        for j in i + 1..(i + 3).min(seq.len()) {
            set.insert(norm(seq[i], seq[j]));
        }
    }
}

/// Index of `w_{i,j}` (1-based `i`, `j`).
pub fn w(i: usize, j: usize) -> usize {
    4 * (i - 1) + (j - 1)
}

/// Pseudo-path edges in terms of positions `0..ell`. Position `k` stands for
/// `u_{k+1}`: consecutive pairs, `{u_{i-2}, u_i}` for odd `i ≥ 3` and
/// `{u_{i-1-b}, u_i}` for even `i ≥ 4`.
pub fn pseudo_path_position_edges(b: usize, ell: usize) -> Vec<(usize, usize)> {
    let mut out = BTreeSet::new();
    for i in 2..=ell {
        out.insert((i - 2, i - 1));
        if i >= 3 && i % 2 == 1 {
            out.insert((i - 3, i - 1));
        }
        if i >= 4 && i % 2 == 0 {
            out.insert((i - 2 - b, i - 1));
        }
    }
    out.into_iter().collect()
}

/// The positions an appended `u_i` (1-based) must be adjacent to.
pub(crate) fn pseudo_back_links(b: usize, i: usize) -> impl Iterator<Item = usize> {
    let mut v = Vec::with_capacity(2);
    if i >= 2 {
        v.push(i - 1);
    }
    if i >= 3 && i % 2 == 1 {
        v.push(i - 2);
    }
    if i >= 4 && i.is_multiple_of(2) {
        v.push(i - 1 - b);
    }
    v.into_iter()
}

fn backbone_edges(ell: usize) -> BTreeSet<(usize, usize)> {
    let mut e = BTreeSet::new();
    e.insert(norm(w(1, 1), w(1, 2)));
    e.insert(norm(w(1, 3), w(1, 4)));
    for i in 2..=ell {
        sq4(&mut e, w(i, 1), w(i, 2), w(i, 3), w(i, 4));
    }
    sq4(&mut e, w(1, 1), w(1, 2), w(2, 2), w(2, 1));
    for i in 1..=ell.saturating_sub(2) {
        sq4(&mut e, w(i, 4), w(i, 3), w(i + 2, 2), w(i + 2, 1));
    }
    sq4(&mut e, w(ell - 1, 4), w(ell - 1, 3), w(ell, 3), w(ell, 4));
    e
}

fn backbone_labels(ell: usize) -> Vec<String> {
    (1..=ell).flat_map(|i| (1..=4).map(move |j| format!("w{i},{j}"))).collect()
}

/// Builds the template of the given kind.
pub fn build_gadget(kind: &GadgetKind) -> Result<AbstractGadget> {
    let g = match *kind {
        GadgetKind::SquarePath { ell } => {
            if ell < 2 {
                return input(format!("square-path needs at least 2 vertices, got {ell}"));
            }
            let mut e = BTreeSet::new();
            square_path_edges(&mut e, &(0..ell).collect::<Vec<_>>());
            AbstractGadget {
                kind: kind.clone(),
                labels: (1..=ell).map(|i| format!("v{i}")).collect(),
                edges: e.into_iter().collect(),
                ports: Ports { entry: Some((0, 1)), exit: Some((ell - 2, ell - 1)), absorbee: None },
            }
        }
        GadgetKind::PseudoPath { b, ell } => {
            if ell < 2 || !(1..=2).contains(&b) {
                return input(format!("pseudo-path needs b in {{1, 2}} and ell >= 2, got ({b}, {ell})"));
            }
            AbstractGadget {
                kind: kind.clone(),
                labels: (1..=ell).map(|i| format!("u{i}")).collect(),
                edges: pseudo_path_position_edges(b, ell),
                ports: Ports { entry: Some((0, 1)), exit: Some((ell - 2, ell - 1)), absorbee: None },
            }
        }
        GadgetKind::Backbone { ell } => {
            if ell < 2 {
                return input(format!("backbone-path needs ell >= 2, got {ell}"));
            }
            AbstractGadget {
                kind: kind.clone(),
                labels: backbone_labels(ell),
                edges: backbone_edges(ell).into_iter().collect(),
                ports: Ports {
                    entry: Some((w(1, 2), w(1, 1))),
                    exit: Some((w(1, 4), w(1, 3))),
                    absorbee: None,
                },
            }
        }
        GadgetKind::ConnectingPath { b, ell } => {
            if ell % 4 != 0 || ell == 0 {
                return input(format!("connecting path length {ell} is not a positive multiple of 4"));
            }
            let inner = match b {
                1 => build_gadget(&GadgetKind::SquarePath { ell })?,
                2 => build_gadget(&GadgetKind::Backbone { ell: ell / 4 })?,
                _ => return input(format!("connecting path needs b in {{1, 2}}, got {b}")),
            };
            AbstractGadget { kind: kind.clone(), ..inner }
        }
        GadgetKind::AbsorberTemplate { ell, ref connectors } => {
            if ell < 2 {
                return input(format!("absorber template needs ell >= 2, got {ell}"));
            }
            if connectors.len() != ell - 1 {
                return input(format!("absorber template needs {} connector lengths, got {}", ell - 1, connectors.len()));
            }
            if let Some(c) = connectors.iter().find(|&&c| c < 4 || c % 2 != 0) {
                return input(format!("connector length {c} must be even and at least 4"));
            }
            let mut labels = backbone_labels(ell);
            let mut e = backbone_edges(ell);
            e.insert(norm(w(1, 2), w(1, 3)));
            let x = labels.len();
            labels.push("x".into());
            for j in 1..=4 {
                e.insert(norm(x, w(1, j)));
            }
            for (i, &c) in connectors.iter().enumerate() {
                let i = i + 1;
                let mut seq = vec![w(i, 3), w(i, 4)];
                for k in 1..=c - 4 {
                    seq.push(labels.len());
                    labels.push(format!("u{i},{k}"));
                }
                seq.extend([w(i + 1, 1), w(i + 1, 2)]);
                square_path_edges(&mut e, &seq);
            }
            AbstractGadget {
                kind: kind.clone(),
                labels,
                edges: e.into_iter().collect(),
                ports: Ports {
                    entry: Some((w(1, 1), w(1, 2))),
                    exit: Some((w(ell, 3), w(ell, 4))),
                    absorbee: Some(x),
                },
            }
        }
    };
    Ok(g)
}

impl AbstractGadget {
    pub fn label_count(&self) -> usize {
        self.labels.len()
    }

    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == name)
    }

    /// Interior labels of connector `U_i` (1-based) of an absorber template, in path order.
    pub fn connector_interior(&self, i: usize) -> Vec<usize> {
        let GadgetKind::AbsorberTemplate { ell, ref connectors } = self.kind else {
            return Vec::new();
        };
        if i == 0 || i >= ell {
            return Vec::new();
        }
        let start = 4 * ell + 1 + connectors[..i - 1].iter().map(|c| c - 4).sum::<usize>();
        (start..start + connectors[i - 1] - 4).collect()
    }

    /// `{kind, params, labels, edges, ports}` with edges and ports given by label names.
    pub fn to_json(&self) -> Value {
        let params = match &self.kind {
            GadgetKind::SquarePath { ell } | GadgetKind::Backbone { ell } => json!({ "ell": ell }),
            GadgetKind::PseudoPath { b, ell } | GadgetKind::ConnectingPath { b, ell } => {
                json!({ "b": b, "ell": ell })
            }
            GadgetKind::AbsorberTemplate { ell, connectors } => json!({ "ell": ell, "connectors": connectors }),
        };
        let name = |i: usize| self.labels[i].clone();
        let pair = |p: Option<(usize, usize)>| p.map(|(a, b)| vec![name(a), name(b)]);
        json!({
            "kind": self.kind.name(),
            "params": params,
            "labels": self.labels,
            "edges": self.edges.iter().map(|&(a, b)| [name(a), name(b)]).collect::<Vec<_>>(),
            "ports": {
                "entry": pair(self.ports.entry),
                "exit": pair(self.ports.exit),
                "absorbee": self.ports.absorbee.map(name),
            },
        })
    }
}

/// A label-to-host-vertex map for a gadget. Construction only checks the
/// length of the map; [`validate_embedding`] checks the rest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    pub gadget: AbstractGadget,
    pub map: Vec<Vertex>,
}

impl Embedding {
    pub fn new(gadget: AbstractGadget, map: Vec<Vertex>) -> Result<Embedding> {
        if gadget.labels.len() != map.len() {
            return input(format!(
                "gadget has {} labels but the map has {} entries",
                gadget.labels.len(),
                map.len()
            ));
        }
        Ok(Embedding { gadget, map })
    }

    /// The square-path whose vertex sequence is `seq`.
    pub fn square_path(seq: Vec<Vertex>) -> Result<Embedding> {
        let g = build_gadget(&GadgetKind::SquarePath { ell: seq.len() })?;
        Embedding::new(g, seq)
    }

    pub fn pseudo_path(b: usize, seq: Vec<Vertex>) -> Result<Embedding> {
        let g = build_gadget(&GadgetKind::PseudoPath { b, ell: seq.len() })?;
        Embedding::new(g, seq)
    }

    pub fn image(&self, label: usize) -> Vertex {
        self.map[label]
    }

    fn port(&self, p: Option<(usize, usize)>) -> Option<Pair> {
        p.map(|(a, b)| (self.map[a], self.map[b]))
    }

    pub fn entry(&self) -> Option<Pair> {
        self.port(self.gadget.ports.entry)
    }

    pub fn exit(&self) -> Option<Pair> {
        self.port(self.gadget.ports.exit)
    }

    pub fn absorbee(&self) -> Option<Vertex> {
        self.gadget.ports.absorbee.map(|x| self.map[x])
    }

    /// Host vertices other than the entry and exit ports.
    pub fn interior(&self) -> Vec<Vertex> {
        let mut ports = Vec::new();
        for (a, b) in [self.gadget.ports.entry, self.gadget.ports.exit].into_iter().flatten() {
            ports.extend([a, b]);
        }
        (0..self.map.len()).filter(|l| !ports.contains(l)).map(|l| self.map[l]).collect()
    }

    /// The same graph read in the other direction: a gadget connecting `a`
    /// to `b` connects `b̄` to `ā`. Path-like gadgets get their map reversed
    /// so that labels stay in path order; other gadgets swap their ports.
    pub fn reversed(&self) -> Embedding {
        match self.gadget.kind {
            GadgetKind::SquarePath { .. }
            | GadgetKind::PseudoPath { b: 1, .. }
            | GadgetKind::ConnectingPath { b: 1, .. } => {
                let mut map = self.map.clone();
                map.reverse();
                Embedding { gadget: self.gadget.clone(), map }
            }
            _ => {
                let mut gadget = self.gadget.clone();
                let p = gadget.ports;
                gadget.ports.entry = p.exit.map(|(a, b)| (b, a));
                gadget.ports.exit = p.entry.map(|(a, b)| (b, a));
                Embedding { gadget, map: self.map.clone() }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    WrongMapLength { labels: usize, map: usize },
    OutOfRange { label: String, vertex: Vertex },
    NotInjective { vertex: Vertex, labels: (String, String) },
    MissingEdge { labels: (String, String), vertices: Pair },
    MissingPort { port: String },
    PortMismatch { port: String, expected: Pair, found: Pair },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WrongMapLength { labels, map } => write!(f, "map has {map} entries for {labels} labels"),
            Violation::OutOfRange { label, vertex } => write!(f, "label {label} maps to out-of-range vertex {vertex}"),
            Violation::NotInjective { vertex, labels } => {
                write!(f, "labels {} and {} both map to vertex {vertex}", labels.0, labels.1)
            }
            Violation::MissingEdge { labels, vertices } => write!(
                f,
                "gadget edge {}-{} maps to non-edge {{{}, {}}}",
                labels.0, labels.1, vertices.0, vertices.1
            ),
            Violation::MissingPort { port } => write!(f, "gadget has no {port} port"),
            Violation::PortMismatch { port, expected, found } => {
                write!(f, "{port} port is {found:?}, expected {expected:?}")
            }
        }
    }
}

/// Checks injectivity, edge preservation, and (when given) the port pairs.
/// Returns the first violation found.
pub fn validate_embedding(
    g: &Graph,
    emb: &Embedding,
    connect_from: Option<Pair>,
    connect_to: Option<Pair>,
) -> std::result::Result<(), Violation> {
    let gad = &emb.gadget;
    if gad.labels.len() != emb.map.len() {
        return Err(Violation::WrongMapLength { labels: gad.labels.len(), map: emb.map.len() });
    }
    let mut owner = vec![usize::MAX; g.n()];
    for (l, &v) in emb.map.iter().enumerate() {
        if v >= g.n() {
            return Err(Violation::OutOfRange { label: gad.labels[l].clone(), vertex: v });
        }
        if owner[v] != usize::MAX {
            return Err(Violation::NotInjective {
                vertex: v,
                labels: (gad.labels[owner[v]].clone(), gad.labels[l].clone()),
            });
        }
        owner[v] = l;
    }
    for &(a, b) in &gad.edges {
        let (u, v) = (emb.map[a], emb.map[b]);
        if !g.has_edge(u, v) {
            return Err(Violation::MissingEdge {
                labels: (gad.labels[a].clone(), gad.labels[b].clone()),
                vertices: (u, v),
            });
        }
    }
    for (name, want, have) in [("entry", connect_from, emb.entry()), ("exit", connect_to, emb.exit())] {
        if let Some(want) = want {
            match have {
                None => return Err(Violation::MissingPort { port: name.into() }),
                Some(h) if h != want => {
                    return Err(Violation::PortMismatch { port: name.into(), expected: want, found: h })
                }
                _ => {}
            }
        }
    }
    Ok(())
}

/// Checks that `seq` is a square-path in `g`: distinct vertices, with
/// `seq[i]` adjacent to `seq[i+1]` and `seq[i+2]`.
pub fn check_square_path(g: &Graph, seq: &[Vertex]) -> std::result::Result<(), Violation> {
    if seq.len() < 2 {
        return match seq.iter().find(|&&v| v >= g.n()) {
            Some(&v) => Err(Violation::OutOfRange { label: "v1".into(), vertex: v }),
            None => Ok(()),
        };
    }
    validate_embedding(g, &Embedding::square_path(seq.to_vec()).expect("length >= 2"), None, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_path_counts() {
        assert_eq!(build_gadget(&GadgetKind::SquarePath { ell: 2 }).unwrap().edges, vec![(0, 1)]);
        assert_eq!(build_gadget(&GadgetKind::SquarePath { ell: 8 }).unwrap().edges.len(), 13);
        assert!(build_gadget(&GadgetKind::SquarePath { ell: 1 }).is_err());
    }

    #[test]
    fn pseudo_path_2_8() {
        let g = build_gadget(&GadgetKind::PseudoPath { b: 2, ell: 8 }).unwrap();
        let mut expected: Vec<(usize, usize)> = (0..7).map(|i| (i, i + 1)).collect();
        expected.extend([(0, 2), (2, 4), (4, 6), (0, 3), (2, 5), (4, 7)]);
        expected.sort_unstable();
        assert_eq!(g.edges, expected);
    }

    #[test]
    fn backbone_small() {
        let g = build_gadget(&GadgetKind::Backbone { ell: 2 }).unwrap();
        assert_eq!(g.labels.len(), 8);
        assert_eq!(g.edges.len(), 13);
        assert!(build_gadget(&GadgetKind::Backbone { ell: 1 }).is_err());
    }

    #[test]
    fn connecting_path_divisibility() {
        assert!(build_gadget(&GadgetKind::ConnectingPath { b: 1, ell: 6 }).is_err());
        let c = build_gadget(&GadgetKind::ConnectingPath { b: 2, ell: 12 }).unwrap();
        assert_eq!(c.edges, build_gadget(&GadgetKind::Backbone { ell: 3 }).unwrap().edges);
    }

    #[test]
    fn absorber_labels() {
        let g = build_gadget(&GadgetKind::AbsorberTemplate { ell: 3, connectors: vec![6, 4] }).unwrap();
        assert_eq!(g.labels.len(), 12 + 1 + 2);
        assert_eq!(g.connector_interior(1), vec![13, 14]);
        assert!(g.connector_interior(2).is_empty());
        assert_eq!(g.label_index("u1,2"), Some(14));
        assert!(build_gadget(&GadgetKind::AbsorberTemplate { ell: 3, connectors: vec![5, 4] }).is_err());
    }

    #[test]
    fn validation_reports_first_violation() {
        let p5 = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 2), (1, 3), (2, 4)]).unwrap();
        let e = Embedding::square_path(vec![0, 1, 2, 3, 4]).unwrap();
        assert_eq!(validate_embedding(&p5, &e, Some((0, 1)), Some((3, 4))), Ok(()));
        let cut = p5.without_edges(|u, v| (u, v) == (1, 3));
        assert!(matches!(
            validate_embedding(&cut, &e, None, None),
            Err(Violation::MissingEdge { vertices: (1, 3), .. })
        ));
        assert!(matches!(
            validate_embedding(&p5, &e, Some((1, 0)), None),
            Err(Violation::PortMismatch { .. })
        ));
        let dup = Embedding::square_path(vec![0, 1, 2, 3, 0]).unwrap();
        assert!(matches!(validate_embedding(&p5, &dup, None, None), Err(Violation::NotInjective { vertex: 0, .. })));
    }

    #[test]
    fn json_shape() {
        let j = build_gadget(&GadgetKind::SquarePath { ell: 3 }).unwrap().to_json();
        assert_eq!(j["kind"], "square_path");
        assert_eq!(j["ports"]["exit"], json!(["v2", "v3"]));
        assert_eq!(j["edges"].as_array().unwrap().len(), 3);
    }
}
