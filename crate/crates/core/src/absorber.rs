//! Absorbers: structures with an entry pair `a`, an exit pair `b` and a set
//! `X` of absorbees such that for every `X' ⊆ X` there is a square-path from
//! `a` to `b` covering exactly the body minus `X'`.
//!
//! One absorber is built per vertex `x` from a five-vertex skeleton
//! `S_x = {x, u1, u2, v1, v2}` found by four Hall matchings, completed by a
//! backbone-path from `ū = (u2, u1)` to `v̄ = (v2, v1)` and square-paths
//! between consecutive backbone blocks, and the single absorbers are then
//! chained into one.

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::connector::{
    connect_all_with_ladder, ConnectAllOutcome, ConnectFailure, ConnectRequest, ConnectorConfig, Tuple,
};
use crate::error::{input, Error, Result};
use crate::gadgets::{
    absorber_traversal, build_gadget, check_square_path, validate_embedding, w, Embedding, GadgetKind, Violation,
};
use crate::graph::{BitSet, Graph, Pair, Vertex};
use crate::matching::{hall_saturating_matching, BipartiteInstance, Witness};
use crate::rng;

/// The vertices `x, u1, u2, v1, v2` of one skeleton `S_x`. The template
/// labels `w11, w12, w13, w14` map to `u1, u2, v1, v2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkeletonRecord {
    pub x: Vertex,
    pub u: Pair,
    pub v: Pair,
}

impl SkeletonRecord {
    fn vertices(&self) -> [Vertex; 5] {
        [self.x, self.u.0, self.u.1, self.v.0, self.v.1]
    }
}

/// A completed absorber for a single vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingleAbsorber {
    pub record: SkeletonRecord,
    /// `AbsorberTemplate` embedding with entry `(u1, u2)`.
    pub template: Embedding,
}

impl SingleAbsorber {
    pub fn entry(&self) -> Pair {
        self.template.entry().expect("template has an entry")
    }

    pub fn exit(&self) -> Pair {
        self.template.exit().expect("template has an exit")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Absorber {
    pub entry: Pair,
    pub exit: Pair,
    pub absorbees: Vec<Vertex>,
    /// Sorted vertex set of the whole structure.
    pub body: Vec<Vertex>,
    pub units: Vec<SingleAbsorber>,
    /// `links[i]` is the square-path from the exit of unit `i` to the entry of unit `i + 1`.
    pub links: Vec<Embedding>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbsorberStage {
    MatchW1,
    TrianglesW2,
    TrianglesW3,
    TrianglesW4,
    Backbones,
    BlockConnectors,
    Chain,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: AbsorberStage,
    pub reason: String,
    pub hall_witness: Option<Vec<Vertex>>,
    pub connector: Option<ConnectFailure>,
}

impl StageFailure {
    fn reason(stage: AbsorberStage, reason: impl Into<String>) -> Self {
        StageFailure { stage, reason: reason.into(), hall_witness: None, connector: None }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("serializable")
    }
}

/// Outcome of a stage that can fail on a valid input.
pub type Staged<T> = std::result::Result<T, StageFailure>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsorberConfig {
    /// Length of each backbone connection; the template has `backbone_ell / 4` blocks.
    pub backbone_ell: usize,
    /// Lengths tried for the square-paths joining consecutive blocks.
    pub block_ladder: Vec<usize>,
    /// Lengths tried for the square-paths chaining single absorbers.
    pub chain_ladder: Vec<usize>,
    pub connector: ConnectorConfig,
}

impl Default for AbsorberConfig {
    fn default() -> Self {
        AbsorberConfig {
            backbone_ell: 8,
            block_ladder: vec![4, 8, 12],
            chain_ladder: vec![4, 8, 12],
            connector: ConnectorConfig::default(),
        }
    }
}

/// Splits a reservoir into seven parts of size `⌊|W|/7⌋`; the remainder goes to the last.
pub fn split_reservoir(w: &[Vertex]) -> Vec<Vec<Vertex>> {
    let k = w.len() / 7;
    let mut parts: Vec<Vec<Vertex>> = (0..6).map(|i| w[i * k..(i + 1) * k].to_vec()).collect();
    parts.push(w[6 * k..].to_vec());
    parts
}

fn check_disjoint(n: usize, sets: &[(&str, &[Vertex])]) -> Result<()> {
    let mut owner: Vec<Option<&str>> = vec![None; n];
    for &(name, set) in sets {
        for &v in set {
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            if let Some(prev) = owner[v] {
                return input(format!("vertex {v} lies in both {prev} and {name}"));
            }
            owner[v] = Some(name);
        }
    }
    Ok(())
}

fn hall_stage(
    g: &Graph,
    stage: AbsorberStage,
    xs: &[Vertex],
    slice: &[Vertex],
    partner: impl Fn(usize) -> Vertex,
) -> Result<Staged<Vec<Vertex>>> {
    let mut edges = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        let p = partner(i);
        for &v in slice {
            if g.has_edge(x, v) && (p == x || g.has_edge(p, v)) {
                edges.push((x, v));
            }
        }
    }
    let res = hall_saturating_matching(&BipartiteInstance::new(xs.to_vec(), slice.to_vec(), edges)?)?;
    if !res.is_saturating() {
        let witness = match res.witness {
            Some(Witness::Hall(a)) => Some(a),
            _ => None,
        };
        let size = witness.as_ref().map_or(0, Vec::len);
        return Ok(Err(StageFailure {
            stage,
            reason: format!("Hall's condition fails on a set of {size} absorbees"),
            hall_witness: witness,
            connector: None,
        }));
    }
    Ok(Ok(res.matching.into_iter().map(|(_, v)| v).collect()))
}

/// Finds disjoint skeletons for every vertex of `x_set`: `u1 ∈ W1` adjacent
/// to `x`, then `u2 ∈ W2`, `v1 ∈ W3` and `v2 ∈ W4` each closing a triangle
/// with `x` and the previous vertex.
pub fn build_single_absorbers(
    g: &Graph,
    x_set: &[Vertex],
    slices: [&[Vertex]; 4],
) -> Result<Staged<Vec<SkeletonRecord>>> {
    check_disjoint(
        g.n(),
        &[("X", x_set), ("W1", slices[0]), ("W2", slices[1]), ("W3", slices[2]), ("W4", slices[3])],
    )?;
    if x_set.is_empty() {
        return Ok(Ok(Vec::new()));
    }
    let u1 = match hall_stage(g, AbsorberStage::MatchW1, x_set, slices[0], |i| x_set[i])? {
        Ok(m) => m,
        Err(f) => return Ok(Err(f)),
    };
    let u2 = match hall_stage(g, AbsorberStage::TrianglesW2, x_set, slices[1], |i| u1[i])? {
        Ok(m) => m,
        Err(f) => return Ok(Err(f)),
    };
    let v1 = match hall_stage(g, AbsorberStage::TrianglesW3, x_set, slices[2], |i| u2[i])? {
        Ok(m) => m,
        Err(f) => return Ok(Err(f)),
    };
    let v2 = match hall_stage(g, AbsorberStage::TrianglesW4, x_set, slices[3], |i| v1[i])? {
        Ok(m) => m,
        Err(f) => return Ok(Err(f)),
    };
    Ok(Ok((0..x_set.len())
        .map(|i| SkeletonRecord { x: x_set[i], u: (u1[i], u2[i]), v: (v1[i], v2[i]) })
        .collect()))
}

fn connect_stage(
    g: &Graph,
    stage: AbsorberStage,
    req: ConnectRequest,
    ladder: &[usize],
    seed: u64,
    cfg: &ConnectorConfig,
) -> Result<Staged<Vec<Embedding>>> {
    let need = req.pairs.len() * (ladder[0] - 4);
    if need as f64 > cfg.load_fraction * req.reservoir.len() as f64 + 1e-9 {
        return Ok(Err(StageFailure::reason(
            stage,
            format!("{} connections of length {} do not fit a reservoir of {}", req.pairs.len(), ladder[0], req.reservoir.len()),
        )));
    }
    match connect_all_with_ladder(g, &req, ladder, seed, cfg)? {
        ConnectAllOutcome::Connected { paths } => Ok(Ok(paths)),
        ConnectAllOutcome::Failed { index, failure, .. } => Ok(Err(StageFailure {
            stage,
            reason: format!("connection {index} of {} failed: {}", req.pairs.len(), failure.reason),
            hall_witness: None,
            connector: Some(failure),
        })),
    }
}

/// Completes each skeleton into a single-vertex absorber: a backbone-path
/// through `w5` and square-paths between consecutive blocks through `w6`.
pub fn complete_absorbers(
    g: &Graph,
    records: &[SkeletonRecord],
    w5: &[Vertex],
    w6: &[Vertex],
    cfg: &AbsorberConfig,
    seed: u64,
) -> Result<Staged<Vec<SingleAbsorber>>> {
    let skel: Vec<Vertex> = records.iter().flat_map(SkeletonRecord::vertices).collect();
    check_disjoint(g.n(), &[("the skeletons", &skel), ("W5", w5), ("W6", w6)])?;
    if cfg.block_ladder.is_empty() {
        return input("block connector ladder is empty");
    }
    if records.is_empty() {
        return Ok(Ok(Vec::new()));
    }
    let pairs: Vec<Tuple> = records.iter().map(|r| ((r.u.1, r.u.0), (r.v.1, r.v.0))).collect();
    let req = ConnectRequest::new(pairs, w5.to_vec(), 2, cfg.backbone_ell)?;
    let backbones = match connect_stage(g, AbsorberStage::Backbones, req, &[cfg.backbone_ell], rng::derive(seed, 5), &cfg.connector)? {
        Ok(p) => p,
        Err(f) => return Ok(Err(f)),
    };
    let blocks = cfg.backbone_ell / 4;
    let mut pairs = Vec::new();
    for bb in &backbones {
        let m = |l: usize| bb.map[l];
        for j in 1..blocks {
            pairs.push(((m(w(j, 3)), m(w(j, 4))), (m(w(j + 1, 1)), m(w(j + 1, 2)))));
        }
    }
    let req = ConnectRequest::new(pairs, w6.to_vec(), 1, cfg.block_ladder[0])?;
    let links = match connect_stage(
        g,
        AbsorberStage::BlockConnectors,
        req,
        &cfg.block_ladder,
        rng::derive(seed, 6),
        &cfg.connector,
    )? {
        Ok(p) => p,
        Err(f) => return Ok(Err(f)),
    };
    let mut out = Vec::with_capacity(records.len());
    for (i, (r, bb)) in records.iter().zip(&backbones).enumerate() {
        let paths = &links[i * (blocks - 1)..(i + 1) * (blocks - 1)];
        let connectors: Vec<usize> = paths.iter().map(|p| p.map.len()).collect();
        let gadget = build_gadget(&GadgetKind::AbsorberTemplate { ell: blocks, connectors })?;
        let mut map = bb.map.clone();
        map.push(r.x);
        for p in paths {
            map.extend_from_slice(&p.map[2..p.map.len() - 2]);
        }
        let template = Embedding::new(gadget, map)?;
        if let Err(v) = validate_embedding(g, &template, Some(r.u), None) {
            return Err(Error::Composition(format!("absorber for vertex {} does not embed: {v}", r.x)));
        }
        out.push(SingleAbsorber { record: *r, template });
    }
    Ok(Ok(out))
}

/// Chains single absorbers by square-paths through `w7` from each exit to
/// the next entry.
pub fn chain_absorbers(
    g: &Graph,
    units: Vec<SingleAbsorber>,
    w7: &[Vertex],
    cfg: &AbsorberConfig,
    seed: u64,
) -> Result<Staged<Absorber>> {
    if units.is_empty() {
        return input("no absorbers to chain");
    }
    if cfg.chain_ladder.is_empty() {
        return input("chain ladder is empty");
    }
    let bodies: Vec<Vertex> = units.iter().flat_map(|u| u.template.map.iter().copied()).collect();
    check_disjoint(g.n(), &[("the absorber bodies", &bodies), ("W7", w7)])?;
    let links = if units.len() == 1 {
        Vec::new()
    } else {
        let pairs: Vec<Tuple> = units.windows(2).map(|p| (p[0].exit(), p[1].entry())).collect();
        let req = ConnectRequest::new(pairs, w7.to_vec(), 1, cfg.chain_ladder[0])?;
        match connect_stage(g, AbsorberStage::Chain, req, &cfg.chain_ladder, rng::derive(seed, 7), &cfg.connector)? {
            Ok(p) => p,
            Err(f) => return Ok(Err(f)),
        }
    };
    let mut body = bodies;
    for l in &links {
        body.extend(l.interior());
    }
    body.sort_unstable();
    let absorber = Absorber {
        entry: units[0].entry(),
        exit: units[units.len() - 1].exit(),
        absorbees: units.iter().map(|u| u.record.x).collect(),
        body,
        units,
        links,
    };
    absorber.audit(g)?;
    Ok(Ok(absorber))
}

/// Builds an absorber for `x_set` in the reservoir `w`, split into seven
/// equal parts, and checks it with [`verify_absorber`] before returning.
pub fn build_absorber(
    g: &Graph,
    x_set: &[Vertex],
    w: &[Vertex],
    cfg: &AbsorberConfig,
    seed: u64,
) -> Result<Staged<Absorber>> {
    if x_set.is_empty() {
        return input("absorbee set is empty");
    }
    let parts = split_reservoir(w);
    let records = match build_single_absorbers(g, x_set, [&parts[0], &parts[1], &parts[2], &parts[3]])? {
        Ok(r) => r,
        Err(f) => return Ok(Err(f)),
    };
    let units = match complete_absorbers(g, &records, &parts[4], &parts[5], cfg, seed)? {
        Ok(u) => u,
        Err(f) => return Ok(Err(f)),
    };
    let absorber = match chain_absorbers(g, units, &parts[6], cfg, seed)? {
        Ok(a) => a,
        Err(f) => return Ok(Err(f)),
    };
    let report = verify_absorber(g, &absorber, VerifyMode::strongest(absorber.absorbees.len()), seed)?;
    if let Some(f) = report.failure {
        return Err(Error::Composition(format!("built absorber fails for X' = {:?}: {}", f.x_prime, f.reason)));
    }
    Ok(Ok(absorber))
}

impl Absorber {
    /// The square-path from `entry` to `exit` covering `body \ x_prime`.
    pub fn absorb(&self, x_prime: &[Vertex]) -> Result<Vec<Vertex>> {
        if let Some(v) = x_prime.iter().find(|v| !self.absorbees.contains(v)) {
            return input(format!("vertex {v} is not an absorbee"));
        }
        let mut seq: Vec<Vertex> = Vec::with_capacity(self.body.len());
        for (i, u) in self.units.iter().enumerate() {
            let p = absorber_traversal(&u.template, !x_prime.contains(&u.record.x))?;
            if i == 0 {
                seq = p;
            } else {
                seq.extend_from_slice(&self.links[i - 1].map[2..]);
                seq.extend_from_slice(&p[2..]);
            }
        }
        Ok(seq)
    }

    /// Validates every embedding and the disjointness of all parts.
    pub fn audit(&self, g: &Graph) -> Result<()> {
        if self.units.is_empty() || self.links.len() + 1 != self.units.len() {
            return Err(Error::Composition(format!(
                "{} units need {} links, found {}",
                self.units.len(),
                self.units.len().saturating_sub(1),
                self.links.len()
            )));
        }
        for u in &self.units {
            let GadgetKind::AbsorberTemplate { .. } = u.template.gadget.kind else {
                return Err(Error::Composition("unit is not an absorber template".into()));
            };
            if u.template.absorbee() != Some(u.record.x) {
                return Err(Error::Composition(format!("unit for {} has a different absorbee", u.record.x)));
            }
            if let Err(v) = validate_embedding(g, &u.template, Some(u.record.u), None) {
                return Err(Error::Composition(format!("absorber for vertex {}: {v}", u.record.x)));
            }
        }
        for (i, l) in self.links.iter().enumerate() {
            let from = self.units[i].exit();
            let to = self.units[i + 1].entry();
            if let Err(v) = validate_embedding(g, l, Some(from), Some(to)) {
                return Err(Error::Composition(format!("link {i}: {v}")));
            }
        }
        let mut all: Vec<Vertex> = self.units.iter().flat_map(|u| u.template.map.iter().copied()).collect();
        for l in &self.links {
            all.extend(l.interior());
        }
        all.sort_unstable();
        if let Some(p) = all.windows(2).find(|p| p[0] == p[1]) {
            return Err(Error::Composition(format!("vertex {} is used twice in the absorber", p[0])));
        }
        if all != self.body {
            return Err(Error::Composition("recorded body differs from the union of its parts".into()));
        }
        if self.entry != self.units[0].entry() || self.exit != self.units[self.units.len() - 1].exit() {
            return Err(Error::Composition("entry or exit differs from the chained units".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("serializable")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "samples", rename_all = "snake_case")]
pub enum VerifyMode {
    Exhaustive,
    Sampled(usize),
}

impl VerifyMode {
    /// Exhaustive up to 12 absorbees, 64 random subsets beyond.
    pub fn strongest(absorbees: usize) -> VerifyMode {
        if absorbees <= 12 {
            VerifyMode::Exhaustive
        } else {
            VerifyMode::Sampled(64)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyFailure {
    pub x_prime: Vec<Vertex>,
    pub reason: String,
    pub violation: Option<Violation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub mode: VerifyMode,
    pub pass: bool,
    pub checked: usize,
    /// The subsets drawn in sampled mode.
    pub samples: Vec<Vec<Vertex>>,
    pub failure: Option<VerifyFailure>,
}

fn check_subset(g: &Graph, a: &Absorber, x_prime: &[Vertex]) -> Result<Option<VerifyFailure>> {
    let fail = |reason: String, violation| Some(VerifyFailure { x_prime: x_prime.to_vec(), reason, violation });
    let seq = a.absorb(x_prime)?;
    if let Err(v) = check_square_path(g, &seq) {
        return Ok(fail(v.to_string(), Some(v)));
    }
    let n = seq.len();
    if n < 4 || (seq[0], seq[1]) != a.entry || (seq[n - 2], seq[n - 1]) != a.exit {
        return Ok(fail("path does not run from the entry to the exit".into(), None));
    }
    let drop = BitSet::from_slice(g.n(), x_prime);
    let mut want: Vec<Vertex> = a.body.iter().copied().filter(|&v| !drop.contains(v)).collect();
    let mut have = seq;
    want.sort_unstable();
    have.sort_unstable();
    if want != have {
        return Ok(fail(format!("path covers {} vertices, expected {}", have.len(), want.len()), None));
    }
    Ok(None)
}

/// Checks `absorb(a, X')` for every `X' ⊆ X` (exhaustive, `|X| ≤ 20`) or
/// for `k` uniformly random subsets.
pub fn verify_absorber(g: &Graph, a: &Absorber, mode: VerifyMode, seed: u64) -> Result<VerifyReport> {
    let xs = &a.absorbees;
    let mut report = VerifyReport { mode, pass: true, checked: 0, samples: Vec::new(), failure: None };
    let subset = |mask: u64| -> Vec<Vertex> {
        xs.iter().enumerate().filter(|&(i, _)| mask >> i & 1 == 1).map(|(_, &x)| x).collect()
    };
    match mode {
        VerifyMode::Exhaustive => {
            if xs.len() > 20 {
                return input(format!("exhaustive verification needs at most 20 absorbees, got {}", xs.len()));
            }
            for mask in 0..1u64 << xs.len() {
                report.checked += 1;
                if let Some(f) = check_subset(g, a, &subset(mask))? {
                    report.failure = Some(f);
                    break;
                }
            }
        }
        VerifyMode::Sampled(k) => {
            let mut r = rng::stream(seed);
            for _ in 0..k {
                let s: Vec<Vertex> = xs.iter().copied().filter(|_| r.gen_bool(0.5)).collect();
                report.checked += 1;
                report.samples.push(s.clone());
                if let Some(f) = check_subset(g, a, &s)? {
                    report.failure = Some(f);
                    break;
                }
            }
        }
    }
    report.pass = report.failure.is_none();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gnp_generate;

    fn complete_absorber(n: usize, xs: &[Vertex]) -> (Graph, Absorber) {
        let g = Graph::complete(n);
        let w: Vec<Vertex> = (0..n).filter(|v| !xs.contains(v)).collect();
        let a = build_absorber(&g, xs, &w, &AbsorberConfig::default(), 3).unwrap().unwrap();
        (g, a)
    }

    #[test]
    fn skeletons_in_complete_host() {
        let g = Graph::complete(50);
        let xs = [0, 1, 2];
        let s: Vec<Vec<Vertex>> = (0..4).map(|i| (3 + 10 * i..13 + 10 * i).collect()).collect();
        let recs = build_single_absorbers(&g, &xs, [&s[0], &s[1], &s[2], &s[3]]).unwrap().unwrap();
        assert_eq!(recs.len(), 3);
        let mut all: Vec<Vertex> = recs.iter().flat_map(|r| r.vertices()).collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 15);
        for r in &recs {
            assert!(s[0].contains(&r.u.0) && s[1].contains(&r.u.1));
            assert!(s[2].contains(&r.v.0) && s[3].contains(&r.v.1));
        }
        let none = build_single_absorbers(&g, &[], [&s[0], &s[1], &s[2], &s[3]]).unwrap().unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn emptied_slice_fails_at_step_two() {
        let g = Graph::complete(30);
        let s: Vec<Vec<Vertex>> = vec![(3..8).collect(), vec![], (8..13).collect(), (13..18).collect()];
        let f = build_single_absorbers(&g, &[0, 1, 2], [&s[0], &s[1], &s[2], &s[3]]).unwrap().unwrap_err();
        assert_eq!(f.stage, AbsorberStage::TrianglesW2);
        assert!(!f.hall_witness.unwrap().is_empty());
    }

    #[test]
    fn overlapping_slices_rejected() {
        let g = Graph::complete(30);
        let s: Vec<Vertex> = (3..8).collect();
        assert!(build_single_absorbers(&g, &[0], [&s, &s, &s, &s]).is_err());
    }

    #[test]
    fn chained_absorber_all_subsets() {
        let (g, a) = complete_absorber(300, &[0, 1, 2]);
        assert_eq!(a.units.len(), 3);
        assert_eq!(a.links.len(), 2);
        let r = verify_absorber(&g, &a, VerifyMode::Exhaustive, 0).unwrap();
        assert!(r.pass);
        assert_eq!(r.checked, 8);
        let only = a.absorb(&[1]).unwrap();
        assert_eq!(only.len(), a.body.len() - 1);
        assert!(!only.contains(&1) && only.contains(&0) && only.contains(&2));
    }

    #[test]
    fn single_absorber_is_unchained() {
        let (g, a) = complete_absorber(200, &[7]);
        assert!(a.links.is_empty());
        assert_eq!(a.entry, a.units[0].entry());
        assert_eq!(a.absorb(&[]).unwrap().len(), a.body.len());
        assert_eq!(a.absorb(&[7]).unwrap().len(), a.body.len() - 1);
        assert!(verify_absorber(&g, &a, VerifyMode::Exhaustive, 0).unwrap().pass);
    }

    #[test]
    fn deleted_edge_is_reported() {
        let (g, a) = complete_absorber(300, &[0, 1, 2]);
        let seq = a.absorb(&[]).unwrap();
        let (s, t) = (seq[5], seq[6]);
        let h = g.without_edges(|u, v| (u, v) == (s, t) || (v, u) == (s, t));
        let r = verify_absorber(&h, &a, VerifyMode::Exhaustive, 0).unwrap();
        let f = r.failure.unwrap();
        assert!(f.x_prime.is_empty());
        assert!(matches!(f.violation, Some(Violation::MissingEdge { .. })));
    }

    #[test]
    fn sampled_mode_records_subsets() {
        let xs: Vec<Vertex> = (0..30).collect();
        let (g, a) = complete_absorber(2000, &xs);
        let r = verify_absorber(&g, &a, VerifyMode::Sampled(64), 9).unwrap();
        assert!(r.pass);
        assert_eq!(r.samples.len(), 64);
        assert!(verify_absorber(&g, &a, VerifyMode::Exhaustive, 0).is_err());
    }

    #[test]
    fn serializes_round_trip() {
        let (_, a) = complete_absorber(200, &[4, 5]);
        let back: Absorber = serde_json::from_value(a.to_json()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn random_host_absorbers_verify() {
        let g = gnp_generate(600, 0.5, 11);
        let xs: Vec<Vertex> = (0..3).collect();
        let w: Vec<Vertex> = (3..600).collect();
        match build_absorber(&g, &xs, &w, &AbsorberConfig::default(), 2).unwrap() {
            Ok(a) => assert!(verify_absorber(&g, &a, VerifyMode::Exhaustive, 0).unwrap().pass),
            Err(f) => panic!("absorber failed at {:?}: {}", f.stage, f.reason),
        }
    }
}
