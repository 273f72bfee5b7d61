//! Squares of Hamilton cycles: certificate checking, a brute-force oracle,
//! and the absorbing pipeline.
//!
//! The pipeline splits `V = X ∪ W ∪ U`, builds an absorber for `X` inside
//! `W`, covers `U' = U ∪ (W \ A)` by square-paths, matches the uncovered
//! vertices into `X1 ⊆ X`, joins everything through `X2 = X \ X1` into one
//! cycle and lets the absorber swallow the `X`-vertices that were used.

mod cover;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::absorber::{build_absorber, Absorber, AbsorberConfig};
use crate::connector::{connect_all_with_ladder, ConnectAllOutcome, ConnectRequest, Tuple};
use crate::error::{input, Error, Result};
use crate::graph::{random_subset, BitSet, Graph, Pair, Vertex};
use crate::rng;

pub use cover::{
    almost_spanning_square_path, bootstrap_rounds, cover_with_square_paths, match_leftover, square_cycle_search,
    Cover, SpanningPath,
};

/// A cyclic order of all vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub order: Vec<Vertex>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub pass: bool,
    /// First cyclic index `i` whose edge to `i + 1` or `i + 2` is missing.
    pub index: Option<usize>,
    pub missing: Option<Pair>,
}

/// Checks that `{c_i, c_{i+1}}` and `{c_i, c_{i+2}}` are edges for every cyclic index `i`.
pub fn verify_certificate(g: &Graph, c: &Certificate) -> Result<CertificateCheck> {
    let n = g.n();
    if c.order.len() != n {
        return input(format!("order has {} entries for {n} vertices", c.order.len()));
    }
    let mut seen = vec![false; n];
    for &v in &c.order {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return input(format!("order is not a permutation (vertex {v})"));
        }
    }
    if n < 3 {
        return Ok(CertificateCheck { pass: false, index: None, missing: None });
    }
    for i in 0..n {
        for d in [1, 2] {
            let (u, v) = (c.order[i], c.order[(i + d) % n]);
            if !g.has_edge(u, v) {
                return Ok(CertificateCheck { pass: false, index: Some(i), missing: Some((u, v)) });
            }
        }
    }
    Ok(CertificateCheck { pass: true, index: None, missing: None })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", content = "certificate", rename_all = "snake_case")]
pub enum OracleResult {
    Found(Certificate),
    NoneExists,
    Unknown,
}

/// Exhaustive search over cyclic orders starting at vertex 0, one direction
/// per cycle (`c_1 < c_{n−1}`), within `budget` search nodes.
pub fn brute_force_square_ham(g: &Graph, budget: u64) -> OracleResult {
    let n = g.n();
    if n < 3 {
        return OracleResult::NoneExists;
    }
    let mut order = vec![0];
    let mut used = vec![false; n];
    used[0] = true;
    let mut nodes = 0u64;
    match brute_extend(g, &mut order, &mut used, &mut nodes, budget) {
        Some(true) => OracleResult::Found(Certificate { order }),
        Some(false) => OracleResult::NoneExists,
        None => OracleResult::Unknown,
    }
}

fn brute_extend(g: &Graph, order: &mut Vec<Vertex>, used: &mut [bool], nodes: &mut u64, budget: u64) -> Option<bool> {
    let n = g.n();
    let k = order.len();
    if k == n {
        let ok = order[1] < order[n - 1]
            && g.has_edge(order[n - 1], order[0])
            && g.has_edge(order[n - 1], order[1])
            && g.has_edge(order[n - 2], order[0]);
        return Some(ok);
    }
    for v in 0..n {
        if used[v] || !g.has_edge(order[k - 1], v) || (k >= 2 && !g.has_edge(order[k - 2], v)) {
            continue;
        }
        *nodes += 1;
        if *nodes > budget {
            return None;
        }
        order.push(v);
        used[v] = true;
        let r = brute_extend(g, order, used, nodes, budget);
        if r != Some(false) {
            return r;
        }
        order.pop();
        used[v] = false;
    }
    Some(false)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub alpha: f64,
    /// `|W| = ⌊eps·n⌋`.
    pub eps: f64,
    /// `|X| = ⌊eps·n / (10·c1·ln² n)⌋` unless `x_size` is set.
    pub c1: f64,
    pub x_size: Option<usize>,
    /// `|X1| = ⌈x1_fraction·|X|⌉`.
    pub x1_fraction: f64,
    /// Lengths tried for each connection through `X2`.
    pub connect_ladder: Vec<usize>,
    /// Smallest bootstrap class; `None` covers `U'` in one round.
    pub cover_floor: Option<usize>,
    /// Search nodes per square-path search.
    pub cover_budget: u64,
    /// Fresh attempts at covering and connecting after the absorber is built.
    pub retries: usize,
    /// Search nodes for the brute-force fallback on fewer than 5 vertices.
    pub oracle_budget: u64,
    pub absorber: AbsorberConfig,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            alpha: 0.1,
            eps: 0.1,
            c1: 1.0,
            x_size: None,
            x1_fraction: 0.5,
            connect_ladder: vec![4, 8],
            cover_floor: None,
            cover_budget: 200_000,
            retries: 4,
            oracle_budget: 1_000_000,
            absorber: AbsorberConfig::default(),
            seed: 0,
        }
    }
}

/// `⌈n / ln³ n⌉`, the smallest bootstrap class of the covering argument.
pub fn log_cube_floor(n: usize) -> usize {
    let l = (n.max(3) as f64).ln();
    (n as f64 / (l * l * l)).ceil() as usize
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("eps", self.eps), ("x1_fraction", self.x1_fraction)] {
            if !(v > 0.0 && v < 1.0) {
                return input(format!("{name} must lie in (0, 1), got {v}"));
            }
        }
        if !(self.c1 > 0.0) {
            return input(format!("c1 must be positive, got {}", self.c1));
        }
        if self.connect_ladder.is_empty() || self.connect_ladder.iter().any(|&l| l < 4 || l % 4 != 0) {
            return input(format!("connection lengths {:?} must be positive multiples of 4", self.connect_ladder));
        }
        if !self.absorber.backbone_ell.is_multiple_of(4) || self.absorber.backbone_ell < 8 {
            return input(format!("backbone length {} must be a multiple of 4, at least 8", self.absorber.backbone_ell));
        }
        Ok(())
    }

    pub fn x_size_for(&self, n: usize) -> usize {
        self.x_size.unwrap_or_else(|| {
            if n < 3 {
                return 0;
            }
            let l = (n as f64).ln();
            (self.eps * n as f64 / (10.0 * self.c1 * l * l) + 1e-9).floor() as usize
        })
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("serializable")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Partition,
    Absorber,
    Covering,
    LeftoverMatching,
    Connecting,
    Absorption,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureReport {
    pub stage: Stage,
    pub diagnostics: Value,
    pub config: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum PipelineOutcome {
    Found { certificate: Certificate, log: Value },
    Failed(FailureReport),
}

impl PipelineOutcome {
    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            PipelineOutcome::Found { certificate, .. } => Some(certificate),
            PipelineOutcome::Failed(_) => None,
        }
    }
}

/// One stretch of the cycle between two connections.
enum Piece {
    Absorber,
    Path(Vec<Vertex>),
    Edge(Pair),
}

impl Piece {
    fn ends(&self, a: Option<&Absorber>) -> (Pair, Pair) {
        match self {
            Piece::Absorber => {
                let a = a.expect("absorber piece needs an absorber");
                (a.entry, a.exit)
            }
            Piece::Path(s) => ((s[0], s[1]), (s[s.len() - 2], s[s.len() - 1])),
            Piece::Edge(e) => (*e, *e),
        }
    }
}

struct Attempt {
    order: Vec<Vertex>,
    log: Value,
}

/// Runs the pipeline. A returned certificate has passed [`verify_certificate`].
pub fn find_square_ham(g: &Graph, gamma_host: Option<&Graph>, cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    cfg.validate()?;
    if let Some(h) = gamma_host {
        g.check_subgraph_of(h)?;
    }
    let n = g.n();
    let fail = |stage, diagnostics: Value| Ok(PipelineOutcome::Failed(FailureReport { stage, diagnostics, config: cfg.to_json() }));
    if n < 5 {
        return match brute_force_square_ham(g, cfg.oracle_budget) {
            OracleResult::Found(certificate) => {
                let log = json!({ "n": n, "method": "brute_force" });
                finish(g, certificate.order, log)
            }
            other => fail(Stage::Covering, json!({ "n": n, "method": "brute_force", "oracle": other })),
        };
    }
    let xs = cfg.x_size_for(n);
    let ws = if xs == 0 { 0 } else { (cfg.eps * n as f64 + 1e-9).floor() as usize };
    if xs + ws > n || (xs > 0 && ws == 0) {
        return fail(Stage::Partition, json!({ "n": n, "x": xs, "w": ws, "reason": "X and W do not fit" }));
    }
    let mut perm: Vec<Vertex> = (0..n).collect();
    perm.shuffle(&mut rng::stream(rng::derive(cfg.seed, 1)));
    let x_set = perm[..xs].to_vec();
    let w_set = perm[xs..xs + ws].to_vec();
    let mut u_prime = perm[xs + ws..].to_vec();
    let mut absorber = None;
    let (mut x1, mut x2) = (Vec::new(), Vec::new());
    if xs > 0 {
        let a = match build_absorber(g, &x_set, &w_set, &cfg.absorber, rng::derive(cfg.seed, 2))? {
            Ok(a) => a,
            Err(f) => return fail(Stage::Absorber, f.to_json()),
        };
        let body = BitSet::from_slice(n, &a.body);
        u_prime.extend(w_set.iter().copied().filter(|&v| !body.contains(v)));
        let k1 = ((cfg.x1_fraction * xs as f64) - 1e-9).ceil() as usize;
        x1 = random_subset(&x_set, k1.min(xs), rng::derive(cfg.seed, 3))?;
        let in1 = BitSet::from_slice(n, &x1);
        x2 = x_set.iter().copied().filter(|&v| !in1.contains(v)).collect();
        absorber = Some(a);
    }
    u_prime.sort_unstable();
    let sizes = json!({ "n": n, "x": xs, "w": ws, "u_prime": u_prime.len(), "x1": x1.len(), "x2": x2.len() });
    let mut last = None;
    for attempt in 0..=cfg.retries {
        let seed = rng::derive(cfg.seed, 100 + attempt as u64);
        match attempt_cycle(g, cfg, absorber.as_ref(), &u_prime, &x1, &x2, seed)? {
            Ok(done) => {
                let mut log = sizes.clone();
                log["attempts"] = json!(attempt + 1);
                log["method"] = json!("pipeline");
                log["stages"] = done.log;
                return finish(g, done.order, log);
            }
            Err(f) => last = Some(f),
        }
    }
    let (stage, mut diag) = last.expect("at least one attempt");
    diag["sizes"] = sizes;
    fail(stage, diag)
}

fn finish(g: &Graph, order: Vec<Vertex>, log: Value) -> Result<PipelineOutcome> {
    let certificate = Certificate { order };
    let check = verify_certificate(g, &certificate)
        .map_err(|e| Error::Composition(format!("assembled order is malformed: {e}")))?;
    if !check.pass {
        return Err(Error::Composition(format!("assembled cycle misses edge {:?}", check.missing)));
    }
    Ok(PipelineOutcome::Found { certificate, log })
}

fn attempt_cycle(
    g: &Graph,
    cfg: &PipelineConfig,
    absorber: Option<&Absorber>,
    u_prime: &[Vertex],
    x1: &[Vertex],
    x2: &[Vertex],
    seed: u64,
) -> Result<std::result::Result<Attempt, (Stage, Value)>> {
    let cover = if absorber.is_none() && cfg.cover_floor.is_none() {
        match square_cycle_search(g, u_prime, rng::derive(seed, 1), cfg.cover_budget)? {
            Some(c) => Cover { paths: vec![c], leftover: Vec::new(), classes: vec![u_prime.len()], leftover_trace: vec![0] },
            None => {
                return Ok(Err((Stage::Covering, json!({ "reason": "no closed square cycle found within budget", "budget": cfg.cover_budget }))))
            }
        }
    } else {
        cover_with_square_paths(g, u_prime, 0.0, cfg.cover_floor, rng::derive(seed, 1), cfg.cover_budget)?
    };
    if absorber.is_none() && !cover.leftover.is_empty() {
        return Ok(Err((
            Stage::Covering,
            json!({ "reason": "uncovered vertices and no absorbees to match them to", "leftover": cover.leftover, "classes": cover.classes }),
        )));
    }
    let m = match_leftover(g, &cover.leftover, x1)?;
    if !m.is_saturating() {
        return Ok(Err((
            Stage::LeftoverMatching,
            json!({ "leftover": cover.leftover, "witness": m.witness, "x1": x1.len() }),
        )));
    }
    let mut pieces = Vec::new();
    if absorber.is_some() {
        pieces.push(Piece::Absorber);
    }
    pieces.extend(cover.paths.iter().cloned().map(Piece::Path));
    pieces.extend(m.matching.iter().map(|&(q, x)| Piece::Edge((q, x))));
    let k = pieces.len();
    let tuples: Vec<Tuple> = (0..k).map(|i| (pieces[i].ends(absorber).1, pieces[(i + 1) % k].ends(absorber).0)).collect();
    if let Some(t) = tuples.iter().find(|t| {
        let v = [t.0 .0, t.0 .1, t.1 .0, t.1 .1];
        (0..4).any(|i| v[..i].contains(&v[i]))
    }) {
        return Ok(Err((Stage::Connecting, json!({ "reason": "a connection would repeat a vertex", "tuple": t }))));
    }
    let req = ConnectRequest::relaxed(tuples, x2.to_vec(), 1, cfg.connect_ladder[0])?;
    let conns = match connect_all_with_ladder(g, &req, &cfg.connect_ladder, rng::derive(seed, 2), &cfg.absorber.connector)? {
        ConnectAllOutcome::Connected { paths } => paths,
        ConnectAllOutcome::Failed { index, failure, .. } => {
            return Ok(Err((Stage::Connecting, json!({ "index": index, "of": k, "failure": failure.to_json() }))))
        }
    };
    let absorbed_seq = match absorber {
        Some(a) => {
            let mut used: Vec<Vertex> = m.matching.iter().map(|&(_, x)| x).collect();
            used.extend(conns.iter().flat_map(|c| c.interior()));
            used.sort_unstable();
            match a.absorb(&used) {
                Ok(s) => s,
                Err(e) => return Ok(Err((Stage::Absorption, json!({ "reason": e.to_string(), "x_prime": used })))),
            }
        }
        None => Vec::new(),
    };
    let seq_of = |p: &Piece| -> Vec<Vertex> {
        match p {
            Piece::Absorber => absorbed_seq.clone(),
            Piece::Path(s) => s.clone(),
            Piece::Edge(e) => vec![e.0, e.1],
        }
    };
    let mut order = seq_of(&pieces[0]);
    for i in 0..k {
        order.extend_from_slice(&conns[i].map[2..]);
        if i + 1 < k {
            order.extend_from_slice(&seq_of(&pieces[i + 1])[2..]);
        }
    }
    let close = order.len() - 2;
    if order[close..] != order[..2] {
        return Err(Error::Composition("last connection does not return to the start".into()));
    }
    order.truncate(close);
    let log = json!({
        "paths": cover.paths.iter().map(Vec::len).collect::<Vec<_>>(),
        "classes": cover.classes,
        "leftover": cover.leftover.len(),
        "connections": conns.iter().map(|c| c.map.len()).collect::<Vec<_>>(),
        "absorber_body": absorber.map(|a| a.body.len()),
    });
    Ok(Ok(Attempt { order, log }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gnp_generate;

    fn cert(order: Vec<Vertex>) -> Certificate {
        Certificate { order }
    }

    #[test]
    fn k5_and_c5() {
        let k5 = Graph::complete(5);
        assert!(verify_certificate(&k5, &cert((0..5).collect())).unwrap().pass);
        let c5 = Graph::from_edges(5, (0..5).map(|i| (i, (i + 1) % 5))).unwrap();
        let r = verify_certificate(&c5, &cert((0..5).collect())).unwrap();
        assert!(!r.pass);
        assert_eq!(r.missing, Some((0, 2)));
        assert!(verify_certificate(&k5, &cert(vec![0, 1, 2, 3, 3])).is_err());
    }

    #[test]
    fn oracle_small_cases() {
        assert!(matches!(brute_force_square_ham(&Graph::complete(5), 1000), OracleResult::Found(_)));
        let k5e = Graph::complete(5).without_edges(|u, v| (u, v) == (0, 1));
        assert_eq!(brute_force_square_ham(&k5e, 1000), OracleResult::NoneExists);
        assert!(matches!(brute_force_square_ham(&Graph::complete(3), 10), OracleResult::Found(_)));
        assert_eq!(brute_force_square_ham(&Graph::complete(12), 3), OracleResult::Unknown);
    }

    #[test]
    fn complete_graphs_succeed() {
        for n in [3, 4, 10, 30] {
            let out = find_square_ham(&Graph::complete(n), None, &PipelineConfig::default()).unwrap();
            assert!(out.certificate().is_some(), "K_{n}");
        }
    }

    #[test]
    fn isolated_vertex_fails_at_covering() {
        let g = Graph::complete(20).without_edges(|u, _| u == 0);
        let cfg = PipelineConfig { cover_budget: 20_000, retries: 1, ..Default::default() };
        let PipelineOutcome::Failed(f) = find_square_ham(&g, None, &cfg).unwrap() else { panic!("succeeded") };
        assert_eq!(f.stage, Stage::Covering);
    }

    #[test]
    fn full_pipeline_with_absorber() {
        let g = Graph::complete(400);
        let cfg = PipelineConfig { x_size: Some(4), eps: 0.6, cover_floor: Some(40), ..Default::default() };
        let out = find_square_ham(&g, None, &cfg).unwrap();
        let PipelineOutcome::Found { certificate, log } = out else { panic!("{out:?}") };
        assert_eq!(certificate.order.len(), 400);
        assert!(log["stages"]["absorber_body"].as_u64().unwrap() > 0);
    }

    #[test]
    fn random_desk_instance() {
        let g = gnp_generate(100, 0.6, 1);
        let out = find_square_ham(&g, None, &PipelineConfig::default()).unwrap();
        if let Some(c) = out.certificate() {
            assert!(verify_certificate(&g, c).unwrap().pass);
        }
    }

    #[test]
    fn host_must_contain_graph() {
        let g = Graph::complete(6);
        let h = Graph::complete(6).without_edges(|u, v| (u, v) == (0, 1));
        assert!(find_square_ham(&g, Some(&h), &PipelineConfig::default()).is_err());
    }
}
