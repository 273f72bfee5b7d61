//! Triangle extension of edge sets and the nine edge-expansion statements,
//! evaluated on concrete instances.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::graph::{check_vertex_list, BitSet, Graph, Pair, Vertex};
use crate::matching::{star_matching, BipartiteInstance};

/// `F₂₃ = { {w₂, w₃} ∈ E_G(W₂, W₃ \ X) : ∃ w₁, {w₁, w₂} ∈ F₁₂, {w₁, w₃} ∈ E(G) }`,
/// returned as sorted `(w₂, w₃)` pairs. Edges of `f12` may be given in either orientation.
pub fn extend_edges(
    g: &Graph,
    w1: &[Vertex],
    w2: &[Vertex],
    w3: &[Vertex],
    f12: &[Pair],
    x: &[Vertex],
) -> Result<Vec<Pair>> {
    let sets = disjoint_sets(g, [w1, w2, w3])?;
    let oriented = orient(g, &sets[0], &sets[1], f12)?;
    let xs = BitSet::from_slice(g.n(), x);
    let target = BitSet::from_slice(g.n(), &w3.iter().copied().filter(|&v| !xs.contains(v)).collect::<Vec<_>>());
    let mut out = Vec::new();
    for &(a, b) in &oriented {
        for c in target.members_in2(g.row(a), g.row(b)) {
            out.push((b, c));
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn disjoint_sets<const K: usize>(g: &Graph, sets: [&[Vertex]; K]) -> Result<[BitSet; K]> {
    let mut all = Vec::new();
    for s in sets {
        all.extend_from_slice(s);
    }
    check_vertex_list(g.n(), &all, "vertex classes")?;
    Ok(sets.map(|s| BitSet::from_slice(g.n(), s)))
}

/// Orients `f12` as `(w₁, w₂)` and checks it lies in `E_G(W₁, W₂)`.
fn orient(g: &Graph, s1: &BitSet, s2: &BitSet, f12: &[Pair]) -> Result<Vec<Pair>> {
    let mut out = Vec::with_capacity(f12.len());
    for &(u, v) in f12 {
        let e = if s1.contains(u) && s2.contains(v) {
            (u, v)
        } else if s1.contains(v) && s2.contains(u) {
            (v, u)
        } else {
            return input(format!("edge ({u}, {v}) of F12 does not run between W1 and W2"));
        };
        if !g.has_edge(e.0, e.1) {
            return Err(Error::MissingEdge(e.0, e.1));
        }
        out.push(e);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionParams {
    pub alpha: f64,
    pub eps: f64,
    pub p: f64,
    /// `n` in `log n`.
    pub n: usize,
    pub tilde_n: usize,
    /// For statement 8; defaults to the midpoint of `(32ε/α, 1)`.
    pub mu: Option<f64>,
}

impl ExpansionParams {
    fn mu(&self) -> f64 {
        self.mu.unwrap_or((32.0 * self.eps / self.alpha + 1.0) / 2.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionOutcome {
    pub statement: u8,
    pub status: ExpansionStatus,
    /// The statement's own hypotheses; these decide applicability.
    pub hypotheses: Vec<Condition>,
    /// Global assumptions (class sizes, `|X|`), reported only.
    pub global_assumptions: Vec<Condition>,
    /// One `measured − required` entry per conclusion; empty when not applicable.
    pub margins: Vec<f64>,
}

fn cond(name: &str, holds: bool) -> Condition {
    Condition { name: name.into(), holds }
}

/// Evaluates edge-expansion statement `stmt` (1–9) on the given
/// instance. `U` is the set of `W₂`-endpoints of `F₁₂`.
#[allow(clippy::too_many_arguments)]
pub fn expansion_predicate(
    g: &Graph,
    stmt: u8,
    w1: &[Vertex],
    w2: &[Vertex],
    w3: &[Vertex],
    f12: &[Pair],
    x: &[Vertex],
    params: ExpansionParams,
) -> Result<ExpansionOutcome> {
    if !(1..=9).contains(&stmt) {
        return input(format!("statement {stmt} outside 1..=9"));
    }
    let sets = disjoint_sets(g, [w1, w2, w3])?;
    if x.iter().any(|&v| !sets[2].contains(v)) {
        return input("X must be a subset of W3");
    }
    let f12 = orient(g, &sets[0], &sets[1], f12)?;
    let f23 = extend_edges(g, w1, w2, w3, &f12, x)?;
    let ExpansionParams { alpha, eps, p, n, tilde_n, .. } = params;
    let nt = tilde_n as f64;
    let logn = (n.max(1) as f64).ln();
    let n12 = f12.len() as f64;
    let n23 = f23.len() as f64;

    let mut u: Vec<Vertex> = f12.iter().map(|e| e.1).collect();
    u.sort_unstable();
    u.dedup();
    let deg12 = |v: Vertex| f12.iter().filter(|e| e.1 == v).count() as f64;
    let deg12_any = |v: Vertex| f12.iter().filter(|e| e.0 == v || e.1 == v).count() as f64;
    let deg23_w2 = |v: Vertex| f23.iter().filter(|e| e.1 == v).count() as f64;
    let deg23_u = |v: Vertex| f23.iter().filter(|e| e.0 == v).count() as f64;
    let w3_mask = &sets[2];
    let deg_g_w3 = |v: Vertex| w3_mask.count_in(g.row(v)) as f64;
    let low = eps.powi(-4) * logn / p;
    let mid = nt * p / 3.0;

    let global = vec![
        cond("all classes have size ñ", [w1, w2, w3].iter().all(|s| s.len() == tilde_n)),
        cond("ñ ≥ ε⁻²² log² n / p²", nt >= eps.powi(-22) * logn * logn / (p * p)),
        cond("|X| ≤ ε⁴ ñ", x.len() as f64 <= eps.powi(4) * nt),
    ];

    let (hyps, margins): (Vec<Condition>, Box<dyn Fn() -> Vec<f64>>) = match stmt {
        1 => {
            let bound = eps / p;
            let hyps = vec![
                cond("|U| ≥ |X| / log n", u.len() as f64 >= x.len() as f64 / logn),
                cond(
                    "deg_F12(v) ≤ ε/p on W1 ∪ W2",
                    w1.iter().chain(w2).all(|&v| deg12_any(v) <= bound + 1e-9),
                ),
            ];
            let r = ((alpha * nt * p * p / 2.0).ceil() as usize).max(1);
            let target = ((1.0 - eps) * (u.len() as f64).min(eps / (p * p))).floor();
            let f23c = f23.clone();
            let uc = u.clone();
            (hyps, Box::new(move || vec![greedy_star_saturable(&uc, &f23c, r) as f64 - target]))
        }
        2 => (
            vec![
                cond("|F12| ≥ ε⁻¹⁷ ñ log² n", n12 >= eps.powi(-17) * nt * logn * logn),
                cond("deg_F12(v, W1) ≤ ε⁻⁴ log n / p on U", u.iter().all(|&v| deg12(v) <= low)),
            ],
            Box::new(move || vec![n23 - eps.powi(-4) * n12]),
        ),
        3 => {
            let ul = u.len() as f64;
            (
                vec![
                    cond("|F12| ≥ ε⁻⁵ ñ log n", n12 >= eps.powi(-5) * nt * logn),
                    cond("deg_F12(v, W1) ≥ ε⁻⁴ log n / p on U", u.iter().all(|&v| deg12(v) >= low)),
                ],
                Box::new(move || vec![n23 - alpha * nt * p / 4.0 * ul]),
            )
        }
        4 => (
            vec![
                cond("|F12| ≥ ε⁻⁵ ñ log n / p", n12 >= eps.powi(-5) * logn / p * nt),
                cond(
                    "ε⁻⁴ log n / p ≤ deg_F12(v, W1) ≤ ñp/3 on U",
                    u.iter().all(|&v| deg12(v) >= low && deg12(v) <= mid),
                ),
            ],
            Box::new(move || vec![n23 - (1.0 + alpha / 4.0) * n12]),
        ),
        5 => {
            let e_u_w3: f64 = u.iter().map(|&v| deg_g_w3(v)).sum();
            let good = u.iter().filter(|&&v| deg23_u(v) >= (1.0 - 2.0 * eps.powi(3)) * deg_g_w3(v)).count() as f64;
            let ul = u.len() as f64;
            (
                vec![
                    cond("|F12| ≥ ε⁻¹⁰ ñ log n / p", n12 >= eps.powi(-10) * logn / p * nt),
                    cond("deg_F12(v, W1) ≥ ñp/3 on U", u.iter().all(|&v| deg12(v) >= mid)),
                ],
                Box::new(move || {
                    vec![n23 - (1.0 - eps * eps) * e_u_w3, good - (1.0 - 3.0 * eps.powi(3)) * ul]
                }),
            )
        }
        6 => {
            let xs = BitSet::from_slice(g.n(), x);
            let l = w3
                .iter()
                .filter(|&&v| !xs.contains(v) && deg23_w2(v) >= (1.0 / 3.0 + alpha / 2.0) * nt * p)
                .count() as f64;
            (
                vec![
                    cond("|U| ≥ 2ñ/3", u.len() as f64 >= 2.0 * nt / 3.0),
                    cond("deg_F12(v, W1) ≥ ñp/3 on U", u.iter().all(|&v| deg12(v) >= mid)),
                ],
                Box::new(move || vec![l - (1.0 - eps) * nt]),
            )
        }
        7 => {
            let mass: f64 = u.iter().map(|&v| deg12(v)).filter(|&d| d >= low).sum();
            (
                vec![
                    cond("|F12| ≥ ε⁻¹⁸ ñ log² n", n12 >= eps.powi(-18) * nt * logn * logn),
                    cond("e_F23(W2, W3 \\ X) < ε⁻³ |F12|", n23 < eps.powi(-3) * n12),
                ],
                Box::new(move || vec![mass - (1.0 - eps) * n12]),
            )
        }
        8 => {
            let mu = params.mu();
            let mass: f64 = u.iter().map(|&v| deg12(v)).filter(|&d| d > mid).sum();
            (
                vec![
                    cond("|F12| ≥ ε ñ² p", n12 >= eps * nt * nt * p),
                    cond("e_F23(W2, W3 \\ X) < (1 + μα/8) |F12|", n23 < (1.0 + mu * alpha / 8.0) * n12),
                    cond("μ ∈ (32ε/α, 1)", mu > 32.0 * eps / alpha && mu < 1.0),
                ],
                Box::new(move || vec![mass - (1.0 - mu) * n12]),
            )
        }
        _ => (
            vec![cond("|F12| ≥ ε ñ² p", n12 >= eps * nt * nt * p)],
            Box::new(move || vec![n23 - (1.0 - eps.sqrt()) * n12]),
        ),
    };
    let applicable = hyps.iter().all(|c| c.holds);
    let margins = if applicable { margins() } else { Vec::new() };
    let status = if !applicable {
        ExpansionStatus::NotApplicable
    } else if margins.iter().all(|&m| m >= -1e-9) {
        ExpansionStatus::Pass
    } else {
        ExpansionStatus::Fail
    };
    Ok(ExpansionOutcome { statement: stmt, status, hypotheses: hyps, global_assumptions: global, margins })
}

/// Size of a greedily grown subset of `u` that admits an `r`-star-matching in `f23`.
fn greedy_star_saturable(u: &[Vertex], f23: &[Pair], r: usize) -> usize {
    let side_b: Vec<Vertex> = {
        let mut b: Vec<Vertex> = f23.iter().map(|e| e.1).collect();
        b.sort_unstable();
        b.dedup();
        b
    };
    let mut chosen: Vec<Vertex> = Vec::new();
    for &v in u {
        let mut trial = chosen.clone();
        trial.push(v);
        let edges = f23.iter().copied().filter(|e| trial.contains(&e.0)).collect();
        let inst = BipartiteInstance { side_a: trial.clone(), side_b: side_b.clone(), edges };
        if star_matching(&inst, r).is_ok_and(|res| res.is_saturating()) {
            chosen = trial;
        }
    }
    chosen.len()
}
