//! The triangle-resilience adversary: delete every edge inside a random set
//! `V1` of about `(1/3 + 2γ/3)n` vertices. Every surviving triangle then has
//! at least two vertices in `V2`, so no more than `(3/2)|V2|/3` vertex-disjoint
//! triangles fit, while each vertex keeps roughly `(|V2|/n)²` of its triangles.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{input, Error, Result};
use crate::graph::{gnp_generate, BitSet, Graph, Vertex};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttackResult {
    pub v1: Vec<Vertex>,
    pub v2: Vec<Vertex>,
    #[serde(skip)]
    pub attacked: Graph,
    pub removed_edge_count: usize,
}

/// `⌈(1/3 + 2γ/3)·n⌉`.
pub fn v1_size(n: usize, gamma: f64) -> usize {
    (((1.0 + 2.0 * gamma) / 3.0) * n as f64 - 1e-9).ceil().max(0.0) as usize
}

pub fn k3_attack(g: &Graph, gamma: f64, seed: u64) -> Result<AttackResult> {
    if !(0.0..0.5).contains(&gamma) {
        return input(format!("gamma must lie in [0, 1/2), got {gamma}"));
    }
    let n = g.n();
    let mut perm: Vec<Vertex> = (0..n).collect();
    perm.shuffle(&mut rng::stream(seed));
    let k = v1_size(n, gamma).min(n);
    let mut v1 = perm[..k].to_vec();
    let mut v2 = perm[k..].to_vec();
    v1.sort_unstable();
    v2.sort_unstable();
    let inside = BitSet::from_slice(n, &v1);
    let attacked = g.without_edges(|u, v| inside.contains(u) && inside.contains(v));
    let removed_edge_count = g.edge_count() - attacked.edge_count();
    let res = AttackResult { v1, v2, attacked, removed_edge_count };
    let bad = triangles_meeting_twice(&res.attacked, &res.v1);
    if bad != 0 {
        return Err(Error::Composition(format!("{bad} triangles keep two vertices in V1")));
    }
    Ok(res)
}

/// Number of triangles of `g` with at least two vertices in `set`, by direct enumeration.
pub fn triangles_meeting_twice(g: &Graph, set: &[Vertex]) -> usize {
    let s = BitSet::from_slice(g.n(), set);
    let mut count = 0;
    for u in 0..g.n() {
        for &v in g.neighbors(u).iter().filter(|&&v| v > u) {
            for w in g.common_neighbors(u, v) {
                if w > v && [u, v, w].iter().filter(|&&x| s.contains(x)).count() >= 2 {
                    count += 1;
                }
            }
        }
    }
    count
}

pub fn binom2(k: usize) -> f64 {
    (k as f64) * (k as f64 - 1.0) / 2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetentionProfile {
    pub before: Vec<usize>,
    pub after: Vec<usize>,
    /// `after / before` per vertex (1 where `before = 0`).
    pub retained: Vec<f64>,
    pub min_retained: f64,
    pub mean_retained: f64,
    /// `C(n, 2)·p³`, when `p` is given.
    pub reference: Option<f64>,
    /// Vertices with at least `(4/9 − γ)·reference` triangles after.
    pub above_lower: Option<usize>,
    /// Vertices with at most `(4/9 + γ)·reference` triangles after.
    pub below_upper: Option<usize>,
}

pub fn triangle_retention_profile(
    before: &Graph,
    after: &Graph,
    p_hint: Option<f64>,
    gamma: Option<f64>,
) -> Result<RetentionProfile> {
    after.check_subgraph_of(before)?;
    let n = before.n();
    let b: Vec<usize> = (0..n).map(|v| before.triangles_at(v)).collect();
    let a: Vec<usize> = (0..n).map(|v| after.triangles_at(v)).collect();
    let retained: Vec<f64> = b.iter().zip(&a).map(|(&b, &a)| if b == 0 { 1.0 } else { a as f64 / b as f64 }).collect();
    let min_retained = retained.iter().copied().fold(1.0, f64::min);
    let mean_retained = if n == 0 { 1.0 } else { retained.iter().sum::<f64>() / n as f64 };
    let reference = p_hint.map(|p| binom2(n) * p * p * p);
    let (above_lower, below_upper) = match (reference, gamma) {
        (Some(r), Some(g)) => (
            Some(a.iter().filter(|&&t| t as f64 >= (4.0 / 9.0 - g) * r - 1e-9).count()),
            Some(a.iter().filter(|&&t| t as f64 <= (4.0 / 9.0 + g) * r + 1e-9).count()),
        ),
        _ => (None, None),
    };
    Ok(RetentionProfile { before: b, after: a, retained, min_retained, mean_retained, reference, above_lower, below_upper })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackingResult {
    /// Size of the best packing found.
    pub lower: usize,
    /// Proven upper bound; equals `lower` when `exact`.
    pub upper: usize,
    pub exact: bool,
    pub packing: Vec<[Vertex; 3]>,
    /// `⌊⌊(3/2)|V2|⌋ / 3⌋` when `V1` is given.
    pub structural_bound: Option<usize>,
    /// Packed triangles with two or more vertices in `V1`.
    pub v1_violations: Option<usize>,
}

struct Packer<'a> {
    rows: Vec<u64>,
    best: Vec<[Vertex; 3]>,
    cur: Vec<[Vertex; 3]>,
    nodes: u64,
    budget: u64,
    g: &'a Graph,
}

impl Packer<'_> {
    fn triangles_of(&self, v: usize, mask: u64) -> Vec<(usize, usize)> {
        let nv = self.rows[v] & mask;
        let mut out = Vec::new();
        let mut it = nv;
        while it != 0 {
            let a = it.trailing_zeros() as usize;
            it &= it - 1;
            let mut jt = nv & self.rows[a] & !((2u64 << a) - 1);
            while jt != 0 {
                let b = jt.trailing_zeros() as usize;
                jt &= jt - 1;
                out.push((a, b));
            }
        }
        out
    }

    /// Vertices of `mask` lying on a triangle inside `mask`.
    fn live(&self, mask: u64) -> u64 {
        let mut live = 0u64;
        let mut it = mask;
        while it != 0 {
            let v = it.trailing_zeros() as usize;
            it &= it - 1;
            if live >> v & 1 == 1 {
                continue;
            }
            let nv = self.rows[v] & mask;
            let mut at = nv;
            while at != 0 {
                let a = at.trailing_zeros() as usize;
                at &= at - 1;
                let common = nv & self.rows[a];
                if common != 0 {
                    live |= (1 << v) | (1 << a) | (1 << common.trailing_zeros());
                    break;
                }
            }
        }
        live
    }

    /// `min(⌊|R|/3⌋, ⌊|R \ I|/2⌋)` for a greedy independent set `I` of `G[R]`:
    /// every triangle has at most one vertex in `I`.
    fn bound(&self, live: u64) -> usize {
        let r = live.count_ones() as usize;
        let mut order: Vec<usize> = (0..64).filter(|&v| live >> v & 1 == 1).collect();
        order.sort_by_key(|&v| (self.rows[v] & live).count_ones());
        let mut indep = 0u64;
        let mut blocked = 0u64;
        for v in order {
            if blocked >> v & 1 == 0 {
                indep |= 1 << v;
                blocked |= (1 << v) | self.rows[v];
            }
        }
        (r / 3).min((r - indep.count_ones() as usize) / 2)
    }

    fn search(&mut self, mask: u64) -> bool {
        let live = self.live(mask);
        if self.cur.len() > self.best.len() {
            self.best = self.cur.clone();
        }
        if live == 0 || self.cur.len() + self.bound(live) <= self.best.len() {
            return true;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return false;
        }
        let v = live.trailing_zeros() as usize;
        for (a, b) in self.triangles_of(v, live) {
            self.cur.push([v, a, b]);
            let ok = self.search(live & !(1 << v | 1 << a | 1 << b));
            self.cur.pop();
            if !ok {
                return false;
            }
        }
        self.search(live & !(1 << v))
    }
}

fn greedy_packing(g: &Graph) -> Vec<[Vertex; 3]> {
    let mut free = BitSet::from_slice(g.n(), &(0..g.n()).collect::<Vec<_>>());
    let mut out = Vec::new();
    for u in 0..g.n() {
        if !free.contains(u) {
            continue;
        }
        'v: for &v in g.neighbors(u) {
            if !free.contains(v) {
                continue;
            }
            for w in g.common_neighbors(u, v) {
                if free.contains(w) {
                    out.push([u, v, w]);
                    for x in [u, v, w] {
                        free.remove(x);
                    }
                    break 'v;
                }
            }
        }
    }
    out
}

/// Maximum vertex-disjoint triangle packing by branch and bound (graphs on
/// at most 64 vertices), or a greedy lower bound with `⌊n/3⌋` above it
/// when the graph is larger or the node budget runs out.
pub fn max_triangle_packing(g: &Graph, v1: Option<&[Vertex]>, budget: u64) -> Result<PackingResult> {
    let n = g.n();
    let (structural_bound, in_v1) = match v1 {
        Some(s) => {
            crate::graph::check_vertex_list(n, s, "V1")?;
            let v2 = n - s.len();
            (Some((3 * v2 / 2) / 3), Some(BitSet::from_slice(n, s)))
        }
        None => (None, None),
    };
    let (lower_packing, upper, exact) = if n <= 64 {
        let rows: Vec<u64> = (0..n).map(|v| g.row(v).first().copied().unwrap_or(0)).collect();
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mut p = Packer { rows, best: Vec::new(), cur: Vec::new(), nodes: 0, budget, g };
        let greedy = greedy_packing(p.g);
        p.best = greedy;
        let done = p.search(full);
        let upper = if done { p.best.len() } else { p.bound(p.live(full)) };
        let exact = done;
        (p.best, upper, exact)
    } else {
        let greedy = greedy_packing(g);
        (greedy, n / 3, false)
    };
    let v1_violations =
        in_v1.map(|s| lower_packing.iter().filter(|t| t.iter().filter(|&&x| s.contains(x)).count() >= 2).count());
    Ok(PackingResult {
        lower: lower_packing.len(),
        upper: if exact { lower_packing.len() } else { upper.max(lower_packing.len()) },
        exact,
        packing: lower_packing,
        structural_bound,
        v1_violations,
    })
}

/// Removes every edge lying on fewer than `threshold` triangles of `g`,
/// counted once in `g` (no iteration).
pub fn prune_triangle_poor_edges(g: &Graph, threshold: f64) -> Result<Graph> {
    if !(threshold >= 0.0) {
        return input(format!("threshold must be non-negative, got {threshold}"));
    }
    Ok(g.without_edges(|u, v| (g.codegree(u, v) as f64) < threshold))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodCheck {
    pub checked: usize,
    pub passed: usize,
    /// Largest `e(S) / (C(|S|, 2)·p)` seen.
    pub max_ratio: f64,
}

/// For sampled vertices `v`, tests `e(S) ≤ (1 + eps)·C(|S|, 2)·p` for
/// `S = N(v)` and `k` random subsets of `N(v)` of size `⌈(2/3)np⌉`.
pub fn neighborhood_density_check(
    g: &Graph,
    p: f64,
    eps: f64,
    vertices: &[Vertex],
    k: usize,
    seed: u64,
) -> Result<NeighborhoodCheck> {
    crate::graph::check_vertex_list(g.n(), vertices, "sampled vertices")?;
    let mut r = rng::stream(seed);
    let size = ((2.0 / 3.0) * g.n() as f64 * p - 1e-9).ceil() as usize;
    let mut out = NeighborhoodCheck { checked: 0, passed: 0, max_ratio: 0.0 };
    let test = |s: &[Vertex], out: &mut NeighborhoodCheck| {
        if s.len() < 2 || s.len() < size {
            return;
        }
        let set = BitSet::from_slice(g.n(), s);
        let e: usize = s.iter().map(|&u| set.count_in(g.row(u))).sum::<usize>() / 2;
        let expect = binom2(s.len()) * p;
        let ratio = e as f64 / expect;
        out.checked += 1;
        if ratio <= 1.0 + eps + 1e-9 {
            out.passed += 1;
        }
        out.max_ratio = out.max_ratio.max(ratio);
    };
    for &v in vertices {
        let nb = g.neighbors(v).to_vec();
        test(&nb, &mut out);
        if nb.len() >= size {
            for _ in 0..k {
                let s: Vec<Vertex> = nb.choose_multiple(&mut r, size).copied().collect();
                test(&s, &mut out);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentParams {
    pub n: usize,
    pub p: f64,
    pub gamma: f64,
    pub seeds: Vec<u64>,
    /// Pruning threshold is `prune_eps·n·p²`.
    pub prune_eps: f64,
    /// Vertices sampled for the neighbourhood density check.
    pub density_vertices: usize,
    /// Random subsets per sampled vertex.
    pub density_subsets: usize,
    pub density_eps: f64,
    /// Node budget for exact packing; used only when `n ≤ 30`.
    pub packing_budget: u64,
    pub jobs: usize,
}

impl ExperimentParams {
    pub fn new(n: usize, p: f64, gamma: f64, seeds: Vec<u64>) -> Self {
        ExperimentParams {
            n,
            p,
            gamma,
            seeds,
            prune_eps: 0.1,
            density_vertices: 8,
            density_subsets: 4,
            density_eps: 0.1,
            packing_budget: 200_000,
            jobs: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Percentiles {
    pub min: f64,
    pub p10: f64,
    pub median: f64,
    pub p90: f64,
    pub max: f64,
}

pub fn percentiles(values: &[f64]) -> Option<Percentiles> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let at = |q: f64| v[((q * (v.len() - 1) as f64).round() as usize).min(v.len() - 1)];
    let k = v.len();
    let median = if k % 2 == 1 { v[k / 2] } else { (v[k / 2 - 1] + v[k / 2]) / 2.0 };
    Some(Percentiles { min: v[0], p10: at(0.1), median, p90: at(0.9), max: v[k - 1] })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: u64,
    pub v1_size: usize,
    pub removed_edges: usize,
    pub bad_triangles: usize,
    pub min_retained_fraction: f64,
    pub mean_retained_fraction: f64,
    /// Per-vertex destroyed fraction `1 − after/before` over `V1`.
    pub destroyed_v1: Percentiles,
    pub destroyed_v2: Option<Percentiles>,
    pub above_lower: usize,
    pub prune_threshold: f64,
    pub min_degree_after_prune: usize,
    pub degree_target: f64,
    pub packing: PackingResult,
    pub packing_limit: f64,
    pub density: NeighborhoodCheck,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub params: ExperimentParams,
    pub per_seed: Vec<SeedReport>,
    pub aggregates: Value,
}

fn run_seed(params: &ExperimentParams, seed: u64) -> Result<SeedReport> {
    let (n, p, gamma) = (params.n, params.p, params.gamma);
    let gamma_graph = gnp_generate(n, p, rng::derive(seed, 0));
    let atk = k3_attack(&gamma_graph, gamma, rng::derive(seed, 1))?;
    let prof = triangle_retention_profile(&gamma_graph, &atk.attacked, Some(p), Some(gamma))?;
    let destroyed = |set: &[Vertex]| percentiles(&set.iter().map(|&v| 1.0 - prof.retained[v]).collect::<Vec<_>>());
    let prune_threshold = params.prune_eps * n as f64 * p * p;
    let pruned = prune_triangle_poor_edges(&atk.attacked, prune_threshold)?;
    let budget = if n <= 30 { params.packing_budget } else { 0 };
    let packing = max_triangle_packing(&atk.attacked, Some(&atk.v1), budget)?;
    let mut sample: Vec<Vertex> = (0..n).collect();
    sample.shuffle(&mut rng::stream(rng::derive(seed, 2)));
    sample.truncate(params.density_vertices);
    let density = neighborhood_density_check(
        &gamma_graph,
        p,
        params.density_eps,
        &sample,
        params.density_subsets,
        rng::derive(seed, 3),
    )?;
    Ok(SeedReport {
        seed,
        v1_size: atk.v1.len(),
        removed_edges: atk.removed_edge_count,
        bad_triangles: triangles_meeting_twice(&atk.attacked, &atk.v1),
        min_retained_fraction: prof.min_retained,
        mean_retained_fraction: prof.mean_retained,
        destroyed_v1: destroyed(&atk.v1).unwrap_or(Percentiles { min: 0.0, p10: 0.0, median: 0.0, p90: 0.0, max: 0.0 }),
        destroyed_v2: destroyed(&atk.v2),
        above_lower: prof.above_lower.unwrap_or(0),
        prune_threshold,
        min_degree_after_prune: pruned.min_degree(),
        degree_target: (2.0 / 3.0 + gamma / 4.0) * n as f64 * p,
        packing,
        packing_limit: (1.0 - gamma) * n as f64 / 3.0,
        density,
    })
}

/// Runs the attack on `G(n, p)` for every seed (in parallel over `jobs`
/// threads) and aggregates the measurements. Output is independent of `jobs`.
pub fn resilience_experiment(params: &ExperimentParams) -> Result<ExperimentReport> {
    if !(0.0..=1.0).contains(&params.p) {
        return input(format!("p must lie in [0, 1], got {}", params.p));
    }
    if !(0.0..0.5).contains(&params.gamma) {
        return input(format!("gamma must lie in [0, 1/2), got {}", params.gamma));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(params.jobs.max(1))
        .build()
        .map_err(|e| Error::Input(format!("thread pool: {e}")))?;
    let per_seed: Vec<SeedReport> =
        pool.install(|| params.seeds.par_iter().map(|&s| run_seed(params, s)).collect::<Result<Vec<_>>>())?;
    let aggregates = aggregate(&per_seed);
    Ok(ExperimentReport { params: params.clone(), per_seed, aggregates })
}

fn aggregate(rows: &[SeedReport]) -> Value {
    if rows.is_empty() {
        return json!({ "seeds": 0 });
    }
    let k = rows.len() as f64;
    let frac = |f: &dyn Fn(&SeedReport) -> bool| rows.iter().filter(|r| f(r)).count() as f64 / k;
    let col = |f: &dyn Fn(&SeedReport) -> f64| percentiles(&rows.iter().map(f).collect::<Vec<_>>());
    json!({
        "seeds": rows.len(),
        "min_retained_fraction": col(&|r| r.min_retained_fraction),
        "median_destroyed_v1": col(&|r| r.destroyed_v1.median),
        "min_retained_within_4_9": frac(&|r| (r.min_retained_fraction - 4.0 / 9.0).abs() <= 0.10),
        "median_destroyed_within_5_9": frac(&|r| (r.destroyed_v1.median - 5.0 / 9.0).abs() <= 0.05),
        "structural_ok": frac(&|r| r.bad_triangles == 0),
        "packing_within_limit": frac(&|r| r.packing.upper as f64 <= r.packing_limit + 1e-9
            || r.packing.structural_bound.is_some_and(|b| b as f64 <= r.packing_limit + 1e-9)),
        "min_degree_after_prune": col(&|r| r.min_degree_after_prune as f64),
        "density_pass_fraction": frac(&|r| r.density.passed == r.density.checked),
    })
}

impl ExperimentReport {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("serializable")
    }

    /// One row per seed.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "seed,v1_size,removed_edges,bad_triangles,min_retained_fraction,mean_retained_fraction,\
             destroyed_v1_median,above_lower,min_degree_after_prune,degree_target,packing_lower,packing_upper,\
             packing_exact,structural_bound,packing_limit,density_checked,density_passed,density_max_ratio\n",
        );
        for r in &self.per_seed {
            s.push_str(&format!(
                "{},{},{},{},{:.6},{:.6},{:.6},{},{},{:.3},{},{},{},{},{:.3},{},{},{:.6}\n",
                r.seed,
                r.v1_size,
                r.removed_edges,
                r.bad_triangles,
                r.min_retained_fraction,
                r.mean_retained_fraction,
                r.destroyed_v1.median,
                r.above_lower,
                r.min_degree_after_prune,
                r.degree_target,
                r.packing.lower,
                r.packing.upper,
                r.packing.exact,
                r.packing.structural_bound.map_or(String::new(), |b| b.to_string()),
                r.packing_limit,
                r.density.checked,
                r.density.passed,
                r.density.max_ratio,
            ));
        }
        s
    }
}
