use std::collections::{BTreeSet, HashMap};
use std::sync::{Mutex, OnceLock};

use super::{backbone_edges, build_gadget, norm, pseudo_back_links, w, AbstractGadget, Embedding, GadgetKind};
use crate::error::{Error, Result};
use crate::graph::Vertex;

fn composition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Composition(msg.into()))
}

fn is_path_like(g: &AbstractGadget) -> bool {
    matches!(
        g.kind,
        GadgetKind::SquarePath { .. } | GadgetKind::PseudoPath { b: 1, .. } | GadgetKind::ConnectingPath { b: 1, .. }
    )
}

fn first_repeat(seq: &[Vertex]) -> Option<Vertex> {
    let mut seen = BTreeSet::new();
    seq.iter().copied().find(|&v| !seen.insert(v))
}

/// Concatenates a square-path `a → b` with a square-path `b → c`.
pub fn join_square_paths(p1: &Embedding, p2: &Embedding) -> Result<Embedding> {
    if !is_path_like(&p1.gadget) || !is_path_like(&p2.gadget) {
        return composition("join_square_paths needs two square-paths");
    }
    let (b1, b2) = (p1.exit().expect("square-path has ports"), p2.entry().expect("square-path has ports"));
    if b1 != b2 {
        return composition(format!("exit port {b1:?} of the first path differs from entry port {b2:?} of the second"));
    }
    let mut seq = p1.map.clone();
    seq.extend_from_slice(&p2.map[2..]);
    if let Some(v) = first_repeat(&seq) {
        return composition(format!("vertex {v} lies on both square-paths"));
    }
    Embedding::square_path(seq)
}

/// Label sequences of the two `(2, ·)`-pseudo-paths whose union is `B_L`:
/// `s1` starts at `w̄_1^a`, `s2` at `w_1^b`, and both end at the same pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BackboneSplit {
    pub s1: Vec<usize>,
    pub s2: Vec<usize>,
}

struct SplitSearch {
    adj: Vec<Vec<bool>>,
    used_label: Vec<bool>,
    used_edge: BTreeSet<(usize, usize)>,
    l1: usize,
    l2: usize,
    s1: Vec<usize>,
    s2: Vec<usize>,
}

impl SplitSearch {
    /// Edges that appending `x` at 1-based position `i` of `seq` would add.
    fn new_edges(&self, seq: &[usize], i: usize, x: usize) -> Option<Vec<(usize, usize)>> {
        let mut out = Vec::new();
        for back in pseudo_back_links(2, i) {
            let y = seq[back - 1];
            if !self.adj[x][y] {
                return None;
            }
            out.push(norm(x, y));
        }
        Some(out)
    }

    fn extend1(&mut self) -> bool {
        let i = self.s1.len() + 1;
        if i > self.l1 {
            return self.extend2();
        }
        for x in 0..self.adj.len() {
            if self.used_label[x] {
                continue;
            }
            let Some(es) = self.new_edges(&self.s1, i, x) else { continue };
            if es.iter().any(|e| self.used_edge.contains(e)) {
                continue;
            }
            self.used_label[x] = true;
            self.used_edge.extend(es.iter().copied());
            self.s1.push(x);
            if self.extend1() {
                return true;
            }
            self.s1.pop();
            for e in &es {
                self.used_edge.remove(e);
            }
            self.used_label[x] = false;
        }
        false
    }

    fn extend2(&mut self) -> bool {
        let i = self.s2.len() + 1;
        if i > self.l2 {
            return true;
        }
        let forced = if i + 1 == self.l2 {
            Some(self.s1[self.l1 - 2])
        } else if i == self.l2 {
            Some(self.s1[self.l1 - 1])
        } else {
            None
        };
        let shared = norm(self.s1[self.l1 - 2], self.s1[self.l1 - 1]);
        let candidates: Vec<usize> = match forced {
            Some(x) => vec![x],
            None => (0..self.adj.len()).filter(|&x| !self.used_label[x]).collect(),
        };
        for x in candidates {
            let Some(es) = self.new_edges(&self.s2, i, x) else { continue };
            if es.iter().any(|e| self.used_edge.contains(e) && *e != shared) {
                continue;
            }
            let fresh: Vec<_> = es.into_iter().filter(|e| *e != shared).collect();
            if forced.is_none() {
                self.used_label[x] = true;
            }
            self.used_edge.extend(fresh.iter().copied());
            self.s2.push(x);
            if self.extend2() {
                return true;
            }
            self.s2.pop();
            for e in &fresh {
                self.used_edge.remove(e);
            }
            if forced.is_none() {
                self.used_label[x] = false;
            }
        }
        false
    }
}

fn search_split(ell: usize, l1: usize) -> Option<BackboneSplit> {
    let nl = 4 * ell;
    if l1 < 2 || l1 > nl || ell < 2 {
        return None;
    }
    let l2 = nl + 2 - l1;
    let edges = backbone_edges(ell);
    let mut adj = vec![vec![false; nl]; nl];
    for &(a, b) in &edges {
        adj[a][b] = true;
        adj[b][a] = true;
    }
    let mut s = SplitSearch {
        adj,
        used_label: vec![false; nl],
        used_edge: BTreeSet::new(),
        l1,
        l2,
        s1: vec![w(1, 2), w(1, 1)],
        s2: vec![w(1, 3), w(1, 4)],
    };
    for x in [w(1, 1), w(1, 2), w(1, 3), w(1, 4)] {
        s.used_label[x] = true;
    }
    s.used_edge.insert(norm(w(1, 1), w(1, 2)));
    s.used_edge.insert(norm(w(1, 3), w(1, 4)));
    if !s.extend1() {
        return None;
    }
    // Edge budgets match exactly (2l1 - 3 + 2l2 - 3 = |E(B_L)| + 1), so the
    // union covers the backbone; checked here regardless.
    let mut union = BTreeSet::new();
    for seq in [&s.s1, &s.s2] {
        for i in 2..=seq.len() {
            for back in pseudo_back_links(2, i) {
                union.insert(norm(seq[i - 1], seq[back - 1]));
            }
        }
    }
    (union == edges).then_some(BackboneSplit { s1: s.s1, s2: s.s2 })
}

/// The split of `B_ell` into pseudo-paths of lengths `l1` and `4 ell + 2 − l1`,
/// if one exists. Results are cached.
pub fn backbone_split(ell: usize, l1: usize) -> Option<BackboneSplit> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Option<BackboneSplit>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().expect("split cache").get(&(ell, l1)) {
        return hit.clone();
    }
    let found = search_split(ell, l1);
    cache.lock().expect("split cache").insert((ell, l1), found.clone());
    found
}

fn pseudo_len(e: &Embedding) -> Option<usize> {
    match e.gadget.kind {
        GadgetKind::PseudoPath { b: 2, ell } => Some(ell),
        _ => None,
    }
}

/// Glues a `(2, ℓ₁)`-pseudo-path `a → b` and a `(2, ℓ₂)`-pseudo-path `c̄ → b`
/// into a backbone-path connecting `a` to `c`.
pub fn join_pseudo_paths_to_backbone(g1: &Embedding, g2: &Embedding) -> Result<Embedding> {
    let (Some(l1), Some(l2)) = (pseudo_len(g1), pseudo_len(g2)) else {
        return composition("backbone join needs two (2, ℓ)-pseudo-paths");
    };
    if l1 % 4 != 0 {
        return composition(format!("first pseudo-path length {l1} is not divisible by 4"));
    }
    if (l1 + l2 - 2) % 4 != 0 {
        return composition(format!("ℓ₁ + ℓ₂ − 2 = {} is not divisible by 4", l1 + l2 - 2));
    }
    let ell = (l1 + l2 - 2) / 4;
    if g1.exit() != g2.exit() {
        return composition(format!("pseudo-paths end at {:?} and {:?}", g1.exit(), g2.exit()));
    }
    let Some(split) = backbone_split(ell, l1) else {
        return composition(format!("no split of B_{ell} into pseudo-paths of lengths {l1} and {l2}"));
    };
    let mut map = vec![usize::MAX; 4 * ell];
    for (seq, emb) in [(&split.s1, g1), (&split.s2, g2)] {
        for (k, &label) in seq.iter().enumerate() {
            map[label] = emb.map[k];
        }
    }
    if let Some(v) = first_repeat(&map) {
        return composition(format!("vertex {v} is shared by the pseudo-paths outside their common end pair"));
    }
    Embedding::new(build_gadget(&GadgetKind::Backbone { ell })?, map)
}

/// The two square-path orderings of an absorber template: through `x`
/// (`include_x = true`) or around it.
pub fn absorber_traversal(emb: &Embedding, include_x: bool) -> Result<Vec<Vertex>> {
    let GadgetKind::AbsorberTemplate { ell, .. } = emb.gadget.kind else {
        return composition("absorber traversal needs an absorber template embedding");
    };
    let m = |l: usize| emb.map[l];
    let gadget = &emb.gadget;
    let mut seq = Vec::with_capacity(emb.map.len());
    if include_x {
        seq.extend([m(w(1, 1)), m(w(1, 2)), emb.absorbee().expect("template has x"), m(w(1, 3)), m(w(1, 4))]);
        for i in 1..ell {
            seq.extend(gadget.connector_interior(i).into_iter().map(m));
            seq.extend((1..=4).map(|j| m(w(i + 1, j))));
        }
    } else {
        seq.extend([m(w(1, 1)), m(w(1, 2))]);
        for r in 2..=ell {
            seq.extend([m(w(r, 2)), m(w(r, 1))]);
            seq.extend(gadget.connector_interior(r - 1).into_iter().rev().map(m));
            seq.extend([m(w(r - 1, 4)), m(w(r - 1, 3))]);
        }
        seq.extend([m(w(ell, 3)), m(w(ell, 4))]);
    }
    Ok(seq)
}
