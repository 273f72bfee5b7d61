//! Membership in the family 𝒢(Γ, n, α, p) and the good-set properties.
//!
//! Per-vertex and per-edge quantifiers are evaluated exactly. Quantifiers over
//! subsets and pair families are evaluated on seeded random admissible
//! witnesses plus any witnesses supplied by the caller; every evaluated
//! witness is kept in the report together with its margin.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{BitSet, Graph, Pair, Vertex};
use crate::error::{input, Result};
use crate::rng;

/// Default absolute slack used when comparing measured counts to real thresholds.
pub const DEFAULT_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub alpha: f64,
    pub p: f64,
    pub n: usize,
}

impl FamilyParams {
    pub fn new(alpha: f64, p: f64, n: usize) -> Result<FamilyParams> {
        if !(p > 0.0 && p <= 1.0) {
            return input(format!("p = {p} must lie in (0, 1]"));
        }
        if !(alpha > 0.0) {
            return input(format!("alpha = {alpha} must be positive"));
        }
        Ok(FamilyParams { alpha, p, n })
    }

    /// `(2/3 + α) n p`.
    pub fn degree_threshold(&self) -> f64 {
        (2.0 / 3.0 + self.alpha) * self.n as f64 * self.p
    }

    /// `α n p²`.
    pub fn codegree_threshold(&self) -> f64 {
        self.alpha * self.n as f64 * self.p * self.p
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub pass: bool,
    pub degree_threshold: f64,
    pub codegree_threshold: f64,
    /// Vertex of minimum degree and its degree.
    pub worst_vertex: Option<(Vertex, usize)>,
    /// Edge of minimum codegree and its codegree.
    pub worst_edge: Option<(Pair, usize)>,
}

/// Decides `g ∈ 𝒢(Γ, n, α, p)`: every vertex has degree at least
/// `(2/3 + α)np` and every edge lies on at least `αnp²` triangles.
pub fn check_family_membership(
    gamma: &Graph,
    g: &Graph,
    params: FamilyParams,
    slack: f64,
) -> Result<MembershipReport> {
    g.check_subgraph_of(gamma)?;
    let dt = params.degree_threshold();
    let ct = params.codegree_threshold();
    let worst_vertex = (0..g.n()).map(|v| (v, g.degree(v))).min_by_key(|&(v, d)| (d, v));
    let worst_edge = g
        .edges()
        .into_iter()
        .map(|(u, v)| ((u, v), g.codegree(u, v)))
        .min_by_key(|&(e, c)| (c, e));
    let deg_ok = worst_vertex.is_none_or(|(_, d)| d as f64 >= dt - slack);
    let codeg_ok = worst_edge.is_none_or(|(_, c)| c as f64 >= ct - slack);
    Ok(MembershipReport {
        pass: deg_ok && codeg_ok,
        degree_threshold: dt,
        codegree_threshold: ct,
        worst_vertex,
        worst_edge,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodSetConfig {
    pub alpha: f64,
    pub eps: f64,
    pub p: f64,
    pub sample_budget: usize,
    pub seed: u64,
    pub slack: f64,
}

impl GoodSetConfig {
    pub fn new(alpha: f64, eps: f64, p: f64, sample_budget: usize, seed: u64) -> GoodSetConfig {
        GoodSetConfig { alpha, eps, p, sample_budget, seed, slack: DEFAULT_SLACK }
    }
}

/// Caller-supplied witnesses for the sampled properties.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodSetWitnesses {
    /// `(X, Y)` with `X ⊆ W` for G1.
    pub g1: Vec<(Vec<Vertex>, Vec<Vertex>)>,
    /// `(W', P)` for G6.
    pub g6: Vec<(Vec<Vertex>, Vec<Pair>)>,
    /// Edge families `P` for G7.
    pub g7: Vec<Vec<Pair>>,
    /// Subsets `S ⊆ W` for G8.
    pub g8: Vec<Vec<Vertex>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyStatus {
    Pass,
    PassVacuous,
    Fail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessSource {
    Exact,
    Sampled,
    Supplied,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub source: WitnessSource,
    /// Primary set (`X`, `W'`, `S`, or the worst vertex/edge for exact checks).
    pub set: Vec<Vertex>,
    /// Secondary set (`Y` for G1).
    pub other: Vec<Vertex>,
    pub pairs: Vec<Pair>,
    pub measured: f64,
    pub threshold: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub id: String,
    pub statement: String,
    pub status: PropertyStatus,
    /// Minimum of `measured − threshold` over evaluated instances; `None` when vacuous.
    pub margin: Option<f64>,
    pub samples: usize,
    pub witnesses: Vec<WitnessRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodSetReport {
    pub config: GoodSetConfig,
    pub w_size: usize,
    pub properties: Vec<PropertyCheck>,
}

impl GoodSetReport {
    pub fn all_pass(&self) -> bool {
        self.properties.iter().all(|p| p.status != PropertyStatus::Fail)
    }

    pub fn get(&self, id: &str) -> Option<&PropertyCheck> {
        self.properties.iter().find(|p| p.id == id)
    }
}

fn ln_n(n: usize) -> f64 {
    (n.max(1) as f64).ln()
}

/// Two-sided margin of `x ∈ (1 ± eps) t`.
fn two_sided(x: f64, t: f64, eps: f64) -> (f64, f64) {
    let lo = x - (1.0 - eps) * t;
    let hi = (1.0 + eps) * t - x;
    if lo <= hi {
        (lo, (1.0 - eps) * t)
    } else {
        (hi, (1.0 + eps) * t)
    }
}

struct Collector {
    id: &'static str,
    statement: String,
    samples: usize,
    witnesses: Vec<WitnessRecord>,
}

impl Collector {
    fn new(id: &'static str, statement: impl Into<String>) -> Collector {
        Collector { id, statement: statement.into(), samples: 0, witnesses: Vec::new() }
    }

    fn push(&mut self, w: WitnessRecord) {
        if w.source != WitnessSource::Exact {
            self.samples += 1;
        }
        self.witnesses.push(w);
    }

    fn finish(self, slack: f64) -> PropertyCheck {
        let margin = self.witnesses.iter().map(|w| w.margin).fold(None, |acc: Option<f64>, m| {
            Some(acc.map_or(m, |a| a.min(m)))
        });
        let status = match margin {
            None => PropertyStatus::PassVacuous,
            Some(m) if m >= -slack => PropertyStatus::Pass,
            Some(_) => PropertyStatus::Fail,
        };
        PropertyCheck {
            id: self.id.to_string(),
            statement: self.statement,
            status,
            margin,
            samples: self.samples,
            witnesses: self.witnesses,
        }
    }
}

fn exact(set: Vec<Vertex>, measured: f64, threshold: f64, margin: f64) -> WitnessRecord {
    WitnessRecord {
        source: WitnessSource::Exact,
        set,
        other: Vec::new(),
        pairs: Vec::new(),
        measured,
        threshold,
        margin,
    }
}

/// Worst-case record of a per-vertex or per-edge check, or `None` if the
/// quantifier ranges over nothing.
fn worst<I>(items: I) -> Option<WitnessRecord>
where
    I: Iterator<Item = WitnessRecord>,
{
    items.fold(None, |acc: Option<WitnessRecord>, w| match acc {
        Some(a) if a.margin <= w.margin => Some(a),
        _ => Some(w),
    })
}

/// The four exactly checked properties G2–G5 of `w`.
fn exact_checks(
    gamma: &Graph,
    g: &Graph,
    w: &[Vertex],
    alpha: f64,
    eps: f64,
    p: f64,
) -> [Option<WitnessRecord>; 4] {
    let n = gamma.n();
    let ws = BitSet::from_slice(n, w);
    let wlen = w.len() as f64;
    let g2 = worst((0..n).map(|v| {
        let d = ws.count_in(gamma.row(v)) as f64;
        let (m, t) = two_sided(d, wlen * p, eps);
        exact(vec![v], d, t, m)
    }));
    let g3 = worst((0..n).map(|v| {
        let d = ws.count_in(g.row(v)) as f64;
        let target = g.degree(v) as f64 * wlen / n as f64;
        let (m, t) = two_sided(d, target, eps);
        exact(vec![v], d, t, m)
    }));
    let g4 = worst((0..n).map(|v| {
        let d = ws.count_in(g.row(v)) as f64;
        let t = (2.0 / 3.0 + alpha) * wlen * p;
        exact(vec![v], d, t, d - t)
    }));
    let g5 = worst(g.edges().into_iter().map(|(u, v)| {
        let c = ws.count_in2(g.row(u), g.row(v)) as f64;
        let t = alpha * wlen * p * p;
        exact(vec![u, v], c, t, c - t)
    }));
    [g2, g3, g4, g5]
}

/// Pair family on `pool` in which no vertex lies in more than `cap` pairs:
/// concatenated random perfect matchings of `pool`, deduplicated, truncated.
fn capped_pair_family(pool: &[Vertex], cap: usize, size: usize, r: &mut rng::Rng) -> Vec<Pair> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for _ in 0..cap {
        let mut order = pool.to_vec();
        order.shuffle(r);
        for ch in order.chunks_exact(2) {
            let e = (ch[0].min(ch[1]), ch[0].max(ch[1]));
            if out.len() < size && seen.insert(e) {
                out.push(e);
            }
        }
    }
    out
}

fn max_multiplicity(pairs: &[Pair], n: usize) -> usize {
    let mut count = vec![0usize; n];
    for &(u, v) in pairs {
        count[u] += 1;
        count[v] += 1;
    }
    count.into_iter().max().unwrap_or(0)
}

/// Evaluates the eight good-set properties of `w`.
///
/// * G1: `e_Γ(X, Y) = (1 ± ε)|X||Y|p` for disjoint `X ⊆ W`, `Y` of size at least `ε⁻³ log n / p` (sampled).
/// * G2: `deg_Γ(v, W) = (1 ± ε)|W|p` for every vertex.
/// * G3: `deg_G(v, W) = (1 ± ε) deg_G(v)|W|/n` for every vertex.
/// * G4: `deg_G(v, W) ≥ (2/3 + α)|W|p` for every vertex.
/// * G5: `|N_G(u, W) ∩ N_G(v, W)| ≥ α|W|p²` for every edge.
/// * G6: triangle sums over pair families outside `W` into `W' ⊆ W` are at most `(1 + ε)|P||W'|p²` (sampled).
/// * G7: common neighborhoods in `W` of sparse edge families outside `W` cover at least `α|P||W|p²` vertices (sampled).
/// * G8: random subsets `S ⊆ W` with `|S| ≥ |W|/2` satisfy G2–G5 with `(α/2, 2ε)` (sampled).
pub fn check_good_set(
    gamma: &Graph,
    g: &Graph,
    w: &[Vertex],
    cfg: GoodSetConfig,
    supplied: &GoodSetWitnesses,
) -> Result<GoodSetReport> {
    g.check_subgraph_of(gamma)?;
    super::check_vertex_list(gamma.n(), w, "good-set candidate")?;
    if cfg.sample_budget == 0 {
        return input("sample_budget must be at least 1");
    }
    if !(cfg.p > 0.0 && cfg.p <= 1.0) || !(cfg.eps > 0.0) {
        return input("good-set check needs p in (0, 1] and eps > 0");
    }
    let n = gamma.n();
    let (alpha, eps, p) = (cfg.alpha, cfg.eps, cfg.p);
    let logn = ln_n(n);
    let mut r = rng::stream(cfg.seed);
    let ws = BitSet::from_slice(n, w);
    let mut w_sorted = w.to_vec();
    w_sorted.sort_unstable();
    let outside: Vec<Vertex> = (0..n).filter(|&v| !ws.contains(v)).collect();

    // G1
    let mut g1 = Collector::new("G1", "e_Γ(X,Y) = (1±ε)|X||Y|p for disjoint X ⊆ W, Y with |X|,|Y| ≥ ε⁻³ log n / p");
    let floor1 = (eps.powi(-3) * logn / p).ceil().max(1.0) as usize;
    let eval_g1 = |x: &[Vertex], y: &[Vertex], source: WitnessSource, c: &mut Collector| {
        let ys = BitSet::from_slice(n, y);
        let e: usize = x.iter().map(|&v| ys.count_in(gamma.row(v))).sum();
        let (m, t) = two_sided(e as f64, (x.len() * y.len()) as f64 * p, eps);
        c.push(WitnessRecord {
            source,
            set: x.to_vec(),
            other: y.to_vec(),
            pairs: Vec::new(),
            measured: e as f64,
            threshold: t,
            margin: m,
        });
    };
    if w.len() >= floor1 && n >= 2 * floor1 {
        for _ in 0..cfg.sample_budget {
            let xs = r.gen_range(floor1..=w.len().min(n - floor1));
            let mut wpool = w_sorted.clone();
            wpool.shuffle(&mut r);
            let mut x = wpool[..xs].to_vec();
            x.sort_unstable();
            let xset = BitSet::from_slice(n, &x);
            let mut rest: Vec<Vertex> = (0..n).filter(|&v| !xset.contains(v)).collect();
            let ys = r.gen_range(floor1..=rest.len());
            rest.shuffle(&mut r);
            let mut y = rest[..ys].to_vec();
            y.sort_unstable();
            eval_g1(&x, &y, WitnessSource::Sampled, &mut g1);
        }
    }
    for (x, y) in &supplied.g1 {
        let xs = BitSet::from_slice(n, x);
        let admissible = x.len() >= floor1
            && y.len() >= floor1
            && x.iter().all(|&v| ws.contains(v))
            && y.iter().all(|&v| v < n && !xs.contains(v));
        if admissible {
            eval_g1(x, y, WitnessSource::Supplied, &mut g1);
        }
    }

    // G2–G5
    let [e2, e3, e4, e5] = exact_checks(gamma, g, w, alpha, eps, p);
    let mut g2 = Collector::new("G2", "deg_Γ(v,W) = (1±ε)|W|p for every v");
    let mut g3 = Collector::new("G3", "deg_G(v,W) = (1±ε)deg_G(v)|W|/n for every v");
    let mut g4 = Collector::new("G4", "deg_G(v,W) ≥ (2/3+α)|W|p for every v");
    let mut g5 = Collector::new("G5", "|N_G(u,W) ∩ N_G(v,W)| ≥ α|W|p² for every edge uv");
    for (c, e) in [(&mut g2, e2), (&mut g3, e3), (&mut g4, e4), (&mut g5, e5)] {
        if let Some(e) = e {
            c.push(e);
        }
    }

    // G6
    let mut g6 = Collector::new(
        "G6",
        "Σ_P |N(u,W') ∩ N(v,W')| ≤ (1+ε)|P||W'|p² for |W'| ≥ ε|W|, |P| ≥ ε⁻¹⁰ log n / p², multiplicity ≤ 1 + 1/p",
    );
    let floor6 = (eps.powi(-10) * logn / (p * p)).ceil().max(1.0) as usize;
    let cap6 = (1.0 + 1.0 / p).floor() as usize;
    let max_pairs6 = (cap6 * outside.len() / 2).min(outside.len() * outside.len().saturating_sub(1) / 2);
    let floor_w6 = ((eps * w.len() as f64).ceil() as usize).max(1);
    let eval_g6 = |wp: &[Vertex], pairs: &[Pair], source: WitnessSource, c: &mut Collector| {
        let s = BitSet::from_slice(n, wp);
        let sum: usize = pairs.iter().map(|&(u, v)| s.count_in2(g.row(u), g.row(v))).sum();
        let t = (1.0 + eps) * pairs.len() as f64 * wp.len() as f64 * p * p;
        c.push(WitnessRecord {
            source,
            set: wp.to_vec(),
            other: Vec::new(),
            pairs: pairs.to_vec(),
            measured: sum as f64,
            threshold: t,
            margin: t - sum as f64,
        });
    };
    if floor6 <= max_pairs6 && floor_w6 <= w.len() {
        for _ in 0..cfg.sample_budget {
            let k = r.gen_range(floor_w6..=w.len());
            let mut wpool = w_sorted.clone();
            wpool.shuffle(&mut r);
            let mut wp = wpool[..k].to_vec();
            wp.sort_unstable();
            let size = r.gen_range(floor6..=max_pairs6);
            let pairs = capped_pair_family(&outside, cap6, size, &mut r);
            if pairs.len() >= floor6 {
                eval_g6(&wp, &pairs, WitnessSource::Sampled, &mut g6);
            }
        }
    }
    for (wp, pairs) in &supplied.g6 {
        let admissible = wp.len() >= floor_w6
            && wp.iter().all(|&v| ws.contains(v))
            && pairs.len() >= floor6
            && pairs.iter().all(|&(u, v)| u < n && v < n && u != v && !ws.contains(u) && !ws.contains(v))
            && max_multiplicity(pairs, n) <= cap6;
        if admissible {
            eval_g6(wp, pairs, WitnessSource::Supplied, &mut g6);
        }
    }

    // G7
    let mut g7 = Collector::new(
        "G7",
        "|⋃_P N(u,W) ∩ N(v,W)| ≥ α|P||W|p² for edge sets P avoiding W with multiplicity ≤ 1 + ε/p and |P| ≤ 1 + ε/p²",
    );
    let cap7 = (1.0 + eps / p).floor() as usize;
    let max7 = (1.0 + eps / (p * p)).floor() as usize;
    let outside_edges: Vec<Pair> =
        g.edges().into_iter().filter(|&(u, v)| !ws.contains(u) && !ws.contains(v)).collect();
    let eval_g7 = |pairs: &[Pair], source: WitnessSource, c: &mut Collector| {
        let mut union = BitSet::new(n);
        for &(u, v) in pairs {
            for x in ws.members_in2(g.row(u), g.row(v)) {
                union.insert(x);
            }
        }
        let t = alpha * pairs.len() as f64 * w.len() as f64 * p * p;
        let got = union.len() as f64;
        c.push(WitnessRecord {
            source,
            set: Vec::new(),
            other: Vec::new(),
            pairs: pairs.to_vec(),
            measured: got,
            threshold: t,
            margin: got - t,
        });
    };
    if !outside_edges.is_empty() && max7 >= 1 && cap7 >= 1 {
        for _ in 0..cfg.sample_budget {
            let size = r.gen_range(1..=max7.min(outside_edges.len()));
            let mut pool = outside_edges.clone();
            pool.shuffle(&mut r);
            let mut mult = vec![0usize; n];
            let mut pairs = Vec::new();
            for (u, v) in pool {
                if pairs.len() == size {
                    break;
                }
                if mult[u] < cap7 && mult[v] < cap7 {
                    mult[u] += 1;
                    mult[v] += 1;
                    pairs.push((u, v));
                }
            }
            pairs.sort_unstable();
            eval_g7(&pairs, WitnessSource::Sampled, &mut g7);
        }
    }
    for pairs in &supplied.g7 {
        let admissible = !pairs.is_empty()
            && pairs.len() <= max7
            && pairs.iter().all(|&(u, v)| g.has_edge(u, v) && !ws.contains(u) && !ws.contains(v))
            && max_multiplicity(pairs, n) <= cap7;
        if admissible {
            eval_g7(pairs, WitnessSource::Supplied, &mut g7);
        }
    }

    // G8
    let mut g8 = Collector::new(
        "G8",
        "subsets S ⊆ W with |S| ≥ |W|/2 satisfy G2–G5 with parameters (α/2, 2ε)",
    );
    let floor8 = w.len().div_ceil(2).max(1);
    let eval_g8 = |s: &[Vertex], source: WitnessSource, c: &mut Collector| {
        let checks = exact_checks(gamma, g, s, alpha / 2.0, 2.0 * eps, p);
        if let Some(worst) = worst(checks.into_iter().flatten()) {
            c.push(WitnessRecord {
                source,
                set: s.to_vec(),
                other: worst.set,
                pairs: Vec::new(),
                measured: worst.measured,
                threshold: worst.threshold,
                margin: worst.margin,
            });
        }
    };
    if !w.is_empty() {
        for _ in 0..cfg.sample_budget {
            let k = r.gen_range(floor8..=w.len());
            let mut wpool = w_sorted.clone();
            wpool.shuffle(&mut r);
            let mut s = wpool[..k].to_vec();
            s.sort_unstable();
            eval_g8(&s, WitnessSource::Sampled, &mut g8);
        }
    }
    for s in &supplied.g8 {
        if s.len() >= floor8 && s.iter().all(|&v| ws.contains(v)) && super::check_vertex_list(n, s, "").is_ok() {
            eval_g8(s, WitnessSource::Supplied, &mut g8);
        }
    }

    let properties = [g1, g2, g3, g4, g5, g6, g7, g8].into_iter().map(|c| c.finish(cfg.slack)).collect();
    Ok(GoodSetReport { config: cfg, w_size: w.len(), properties })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn k30_membership() {
        let k = Graph::complete(30);
        let rep = check_family_membership(&k, &k, FamilyParams::new(0.1, 1.0, 30).unwrap(), DEFAULT_SLACK).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.worst_vertex, Some((0, 29)));
        assert_eq!(rep.worst_edge.map(|e| e.1), Some(28));
        assert!((rep.degree_threshold - 23.0).abs() < 1e-9);
    }

    #[test]
    fn edgeless_fails_on_degree() {
        let gamma = Graph::complete(12);
        let g = Graph::empty(12);
        let rep = check_family_membership(&gamma, &g, FamilyParams::new(0.1, 0.5, 12).unwrap(), DEFAULT_SLACK).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.worst_vertex, Some((0, 0)));
        assert_eq!(rep.worst_edge, None);
    }

    #[test]
    fn not_a_subgraph() {
        let gamma = Graph::from_edges(3, [(0, 1)]).unwrap();
        let g = Graph::from_edges(3, [(1, 2)]).unwrap();
        let err = check_family_membership(&gamma, &g, FamilyParams::new(0.1, 0.5, 3).unwrap(), 0.0);
        assert_eq!(err, Err(Error::MissingEdge(1, 2)));
    }

    #[test]
    fn complete_graph_is_good() {
        let k = Graph::complete(40);
        let w: Vec<_> = (0..40).collect();
        let rep = check_good_set(&k, &k, &w, GoodSetConfig::new(0.05, 0.1, 1.0, 4, 1), &Default::default()).unwrap();
        assert_eq!(rep.properties.len(), 8);
        assert!(rep.all_pass(), "{:#?}", rep.properties.iter().map(|p| (&p.id, p.status, p.margin)).collect::<Vec<_>>());
    }

    #[test]
    fn edgeless_g4_margin() {
        let gamma = Graph::complete(20);
        let g = Graph::empty(20);
        let w: Vec<_> = (0..10).collect();
        let rep = check_good_set(&gamma, &g, &w, GoodSetConfig::new(0.1, 0.1, 0.5, 2, 3), &Default::default()).unwrap();
        let g4 = rep.get("G4").unwrap();
        assert_eq!(g4.status, PropertyStatus::Fail);
        let expected = -(2.0 / 3.0 + 0.1) * 10.0 * 0.5;
        assert!((g4.margin.unwrap() - expected).abs() < 1e-9);
    }
}
