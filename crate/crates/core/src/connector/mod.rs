//! Connecting ordered pairs through a reservoir by square-paths (`b = 1`)
//! or backbone-paths (`b = 2`).
//!
//! A connection of length `ℓ` cuts `m = ℓ − 4` classes out of the free part
//! of the reservoir, grows a forward projection graph from `x` under the
//! identity permutation and a backward one from `ȳ` under a reversal, and
//! glues the two pseudo-paths extracted at a common middle edge.

mod expansion;
mod projection;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{input, Error, Result};
use crate::gadgets::{build_gadget, join_pseudo_paths_to_backbone, join_square_paths, validate_embedding, Embedding, GadgetKind};
use crate::graph::{random_partition, rev, BitSet, Graph, Pair, Vertex};
use crate::rng;

pub use expansion::{
    expansion_predicate, extend_edges, Condition, ExpansionOutcome, ExpansionParams, ExpansionStatus,
};
pub use projection::{build_projection_graph, expansion_stats, f_index, BlockFlag, ProjectionGraph, StepFlag, StepStats};

/// One ordered pair of ordered pairs `(x, y)` to be connected.
pub type Tuple = (Pair, Pair);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectRequest {
    pub pairs: Vec<Tuple>,
    pub reservoir: Vec<Vertex>,
    pub b: usize,
    pub ell: usize,
}

fn tuple_vertices(t: &Tuple) -> [Vertex; 4] {
    [t.0 .0, t.0 .1, t.1 .0, t.1 .1]
}

impl ConnectRequest {
    /// Request with pairwise disjoint tuples, all outside the reservoir.
    pub fn new(pairs: Vec<Tuple>, reservoir: Vec<Vertex>, b: usize, ell: usize) -> Result<Self> {
        let r = Self::relaxed(pairs, reservoir, b, ell)?;
        let mut all: Vec<Vertex> = r.pairs.iter().flat_map(tuple_vertices).collect();
        all.sort_unstable();
        if let Some(w) = all.windows(2).find(|w| w[0] == w[1]) {
            return input(format!("vertex {} appears in two tuples", w[0]));
        }
        Ok(r)
    }

    /// Request in which different tuples may share vertices (as when a chain
    /// of paths is closed into a cycle); each tuple still has four distinct
    /// vertices outside the reservoir.
    pub fn relaxed(pairs: Vec<Tuple>, reservoir: Vec<Vertex>, b: usize, ell: usize) -> Result<Self> {
        if !(1..=2).contains(&b) {
            return input(format!("b must be 1 or 2, got {b}"));
        }
        if !ell.is_multiple_of(4) || ell < 4 || (b == 2 && ell < 8) {
            return input(format!("connection length {ell} must be a multiple of 4, at least {}", 4 * b));
        }
        let mut res = reservoir.clone();
        res.sort_unstable();
        if res.windows(2).any(|w| w[0] == w[1]) {
            return input("reservoir lists a vertex twice");
        }
        for t in &pairs {
            let vs = tuple_vertices(t);
            for (i, v) in vs.iter().enumerate() {
                if vs[..i].contains(v) {
                    return input(format!("tuple {t:?} repeats vertex {v}"));
                }
                if res.binary_search(v).is_ok() {
                    return input(format!("tuple vertex {v} lies in the reservoir"));
                }
            }
        }
        Ok(ConnectRequest { pairs, reservoir: res, b, ell })
    }

    fn with_pairs(&self, pairs: Vec<Tuple>, ell: usize) -> ConnectRequest {
        ConnectRequest { pairs, reservoir: self.reservoir.clone(), b: self.b, ell }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectorConfig {
    /// Fresh random class partitions tried per pair before giving up.
    pub retries: usize,
    /// `t · (ℓ − 4) ≤ load_fraction · |W|` is required by `connect_all`.
    pub load_fraction: f64,
    /// Class size override; default `⌊|W \ X| / (m + 1)⌋`.
    pub class_size: Option<usize>,
    /// Threshold parameter for the expansion diagnostics.
    pub eps: f64,
}

impl Default for ConnectorConfig {
    fn default() -> Self {
        ConnectorConfig { retries: 6, load_fraction: 0.5, class_size: None, eps: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Connection {
    /// Index of the connected tuple in the request.
    pub index: usize,
    /// A `ConnectingPath(b, ℓ)` embedding from `x` to `y`.
    pub path: Embedding,
    pub interior: Vec<Vertex>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectFailure {
    pub stuck_pair: Option<Tuple>,
    pub reason: String,
    /// `(|forward middle|, |backward middle|)` per attempt.
    pub middle_counts: Vec<(usize, usize)>,
    /// Forward and backward step statistics of the last attempt.
    pub per_block_stats: Vec<StepStats>,
    pub config: Value,
}

impl ConnectFailure {
    pub fn to_json(&self) -> Value {
        json!({
            "stuck_pair": self.stuck_pair,
            "reason": self.reason,
            "middle_counts": self.middle_counts,
            "per_block_stats": self.per_block_stats,
            "config": self.config,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ConnectOutcome {
    Connected(Connection),
    Failed(ConnectFailure),
}

/// Reversal used by the backward projection. For `b = 1` it is
/// `π₂(i) = m − i + 1`. For `b = 2` consecutive pairs keep their internal
/// order, `π₂(2k − 1) = m − 2k + 1`, `π₂(2k) = m − 2k + 2`, so that the
/// backward pseudo-path ends at the middle edge in the same orientation as
/// the forward one, as the backbone gluing requires.
pub fn reversal_permutation(m: usize, b: usize) -> Vec<usize> {
    (1..=m)
        .map(|i| {
            if b == 1 {
                m - i + 1
            } else if i % 2 == 1 {
                m - i
            } else {
                m - i + 2
            }
        })
        .collect()
}

/// Forward and backward block counts `(j, k)` with `j + k = m/2 + 1`. The
/// forward pseudo-path has `2j + 2` vertices; for `b = 2` this has to be a
/// multiple of four, so `j` is odd.
pub fn meeting_blocks(m: usize, b: usize) -> (usize, usize) {
    let j0 = (m / 4).max(1);
    let j = if b == 1 || j0 % 2 == 1 {
        j0
    } else if j0 > 1 {
        j0 - 1
    } else {
        j0 + 1
    };
    (j, m / 2 + 1 - j)
}

fn config_json(req: &ConnectRequest, cfg: &ConnectorConfig, tilde_n: usize) -> Value {
    json!({
        "b": req.b,
        "ell": req.ell,
        "m": req.ell - 4,
        "tilde_n": tilde_n,
        "reservoir": req.reservoir.len(),
        "retries": cfg.retries,
        "load_fraction": cfg.load_fraction,
        "eps": cfg.eps,
    })
}

fn finish(g: &Graph, req: &ConnectRequest, t: &Tuple, emb: Embedding, free: &BitSet, idx: usize) -> Result<Connection> {
    let kind = GadgetKind::ConnectingPath { b: req.b, ell: req.ell };
    let path = Embedding::new(build_gadget(&kind)?, emb.map)?;
    validate_embedding(g, &path, Some(t.0), Some(t.1))
        .map_err(|v| Error::Composition(format!("connecting path fails validation: {v}")))?;
    let interior = path.interior();
    if let Some(v) = interior.iter().find(|&&v| !free.contains(v)) {
        return Err(Error::Composition(format!("connecting path uses vertex {v} outside W \\ X")));
    }
    Ok(Connection { index: idx, path, interior })
}

/// Connects one of the requested tuples by a `(b, ℓ)`-connecting-path whose
/// interior avoids `x`. Tuples are tried in order; the first that connects wins.
pub fn connect_one(
    g: &Graph,
    req: &ConnectRequest,
    x: &[Vertex],
    seed: u64,
    cfg: &ConnectorConfig,
) -> Result<ConnectOutcome> {
    for t in &req.pairs {
        for v in tuple_vertices(t) {
            if v >= g.n() {
                return Err(Error::VertexOutOfRange { vertex: v, n: g.n() });
            }
        }
        if !g.has_edge(t.0 .0, t.0 .1) || !g.has_edge(t.1 .0, t.1 .1) {
            return input(format!("tuple {t:?} has a port pair that is not an edge"));
        }
    }
    let xs = BitSet::from_slice(g.n(), x);
    let avail: Vec<Vertex> = req.reservoir.iter().copied().filter(|&v| !xs.contains(v)).collect();
    let free = BitSet::from_slice(g.n(), &avail);
    let m = req.ell - 4;
    let tilde_n = cfg.class_size.unwrap_or(avail.len() / (m + 1));
    let failure = |reason: String, counts, stats| {
        ConnectOutcome::Failed(ConnectFailure {
            stuck_pair: req.pairs.first().copied(),
            reason,
            middle_counts: counts,
            per_block_stats: stats,
            config: config_json(req, cfg, tilde_n),
        })
    };
    if req.pairs.is_empty() {
        return Ok(failure("no tuples to connect".into(), Vec::new(), Vec::new()));
    }
    if m == 0 {
        for (i, t) in req.pairs.iter().enumerate() {
            let seq = vec![t.0 .0, t.0 .1, t.1 .0, t.1 .1];
            let emb = Embedding::square_path(seq)?;
            if validate_embedding(g, &emb, None, None).is_ok() {
                return finish(g, req, t, emb, &free, i).map(ConnectOutcome::Connected);
            }
        }
        return Ok(failure("no tuple is directly a 4-square-path".into(), Vec::new(), Vec::new()));
    }
    if tilde_n == 0 || tilde_n * m > avail.len() {
        return Ok(failure(
            format!("{} free reservoir vertices cannot hold {m} classes of size {tilde_n}", avail.len()),
            Vec::new(),
            Vec::new(),
        ));
    }
    let identity: Vec<usize> = (1..=m).collect();
    let backward = reversal_permutation(m, req.b);
    let (j, k) = meeting_blocks(m, req.b);
    let mut counts = Vec::new();
    let mut stats = Vec::new();
    for attempt in 0..=cfg.retries {
        let part = random_partition(&avail, &vec![tilde_n; m], rng::derive(seed, attempt as u64))?;
        for (i, t) in req.pairs.iter().enumerate() {
            let fx = build_projection_graph(g, &[t.0], &identity, &part.classes, &[], req.b)?;
            let fy = build_projection_graph(g, &[rev(t.1)], &backward, &part.classes, &[], req.b)?;
            let fwd = &fx.steps[2 * j];
            let bwd: Vec<Pair> = if req.b == 1 {
                let mut v: Vec<Pair> = fy.steps[2 * k].iter().map(|&e| rev(e)).collect();
                v.sort_unstable();
                v
            } else {
                fy.steps[2 * k].clone()
            };
            counts.push((fwd.len(), bwd.len()));
            let meet = fwd.iter().find(|e| bwd.binary_search(e).is_ok()).copied();
            let Some(e) = meet else {
                stats = vec![expansion_stats(&fx, cfg.eps), expansion_stats(&fy, cfg.eps)];
                continue;
            };
            let (_, g1) = fx.extract_pseudo_path(g, j, e)?;
            let back_edge = if req.b == 1 { rev(e) } else { e };
            let (_, g2) = fy.extract_pseudo_path(g, k, back_edge)?;
            let joined = if req.b == 1 {
                join_square_paths(&g1, &g2.reversed())?
            } else {
                join_pseudo_paths_to_backbone(&g1, &g2)?
            };
            return finish(g, req, t, joined, &free, i).map(ConnectOutcome::Connected);
        }
    }
    Ok(failure("middle layers never intersect".into(), counts, stats))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ConnectAllOutcome {
    Connected { paths: Vec<Embedding> },
    Failed { index: usize, connected: Vec<Embedding>, failure: ConnectFailure },
}

fn check_load(req: &ConnectRequest, ell: usize, cfg: &ConnectorConfig) -> Result<()> {
    let need = req.pairs.len() * (ell - 4);
    if need as f64 > cfg.load_fraction * req.reservoir.len() as f64 + 1e-9 {
        return input(format!(
            "{} tuples of length {ell} need {need} interior vertices, above {} of the reservoir of {}",
            req.pairs.len(),
            cfg.load_fraction,
            req.reservoir.len()
        ));
    }
    Ok(())
}

/// Connects every tuple in order with internally disjoint connecting paths;
/// interiors used so far are excluded from later connections.
pub fn connect_all(g: &Graph, req: &ConnectRequest, seed: u64, cfg: &ConnectorConfig) -> Result<ConnectAllOutcome> {
    connect_all_with_ladder(g, req, &[req.ell], seed, cfg)
}

/// As [`connect_all`], but each tuple tries the lengths of `ladder` in order.
pub fn connect_all_with_ladder(
    g: &Graph,
    req: &ConnectRequest,
    ladder: &[usize],
    seed: u64,
    cfg: &ConnectorConfig,
) -> Result<ConnectAllOutcome> {
    if ladder.is_empty() {
        return input("length ladder is empty");
    }
    for &ell in ladder {
        ConnectRequest::relaxed(Vec::new(), Vec::new(), req.b, ell)?;
    }
    check_load(req, ladder[0], cfg)?;
    let mut used: Vec<Vertex> = Vec::new();
    let mut paths = Vec::with_capacity(req.pairs.len());
    for (i, t) in req.pairs.iter().enumerate() {
        let mut last = None;
        for (r, &ell) in ladder.iter().enumerate() {
            let sub = req.with_pairs(vec![*t], ell);
            match connect_one(g, &sub, &used, rng::derive(seed, (i * 64 + r) as u64), cfg)? {
                ConnectOutcome::Connected(c) => {
                    used.extend_from_slice(&c.interior);
                    paths.push(c.path);
                    last = None;
                    break;
                }
                ConnectOutcome::Failed(f) => last = Some(f),
            }
        }
        if let Some(failure) = last {
            return Ok(ConnectAllOutcome::Failed { index: i, connected: paths, failure });
        }
    }
    audit_disjoint(&paths)?;
    Ok(ConnectAllOutcome::Connected { paths })
}

fn audit_disjoint(paths: &[Embedding]) -> Result<()> {
    let mut all: Vec<Vertex> = paths.iter().flat_map(|p| p.interior()).collect();
    all.sort_unstable();
    if let Some(w) = all.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Composition(format!("vertex {} lies in two connecting-path interiors", w[0])));
    }
    Ok(())
}
