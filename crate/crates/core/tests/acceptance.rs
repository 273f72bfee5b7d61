//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Exact criteria make the process exit non-zero when they fail. Monte Carlo
//! targets (6a, 9a, 9b) print FAIL without changing the exit code unless
//! `ACCEPTANCE_STRICT=1` is set.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use sqcycle::adversary::{
    binom2, k3_attack, max_triangle_packing, resilience_experiment, triangle_retention_profile,
    triangles_meeting_twice, ExperimentParams,
};
use sqcycle::cli::run_command;
use sqcycle::connector::{build_projection_graph, connect_one, ConnectOutcome, ConnectRequest, ConnectorConfig};
use sqcycle::gadgets::{absorber_traversal, build_gadget, check_square_path, validate_embedding, Embedding, GadgetKind};
use sqcycle::graph::gnp_generate;
use sqcycle::hamiltonian::{brute_force_square_ham, find_square_ham, verify_certificate, OracleResult, PipelineConfig, PipelineOutcome};
use sqcycle::matching::{hall_saturating_matching, hall_witness_holds, star_matching, Witness};
use sqcycle::{Graph, Vertex};

const RETAINED_TARGET: f64 = 4.0 / 9.0;
const RETAINED_TOL: f64 = 0.10;
const DESTROYED_TARGET: f64 = 5.0 / 9.0;
const DESTROYED_TOL: f64 = 0.05;
const SEED_FRACTION: f64 = 0.95;
const CONNECT_RATE: f64 = 0.90;
const FIND_RATE: f64 = 0.80;

struct Line {
    id: &'static str,
    pass: bool,
    hard: bool,
    detail: String,
    secs: f64,
}

fn timed(id: &'static str, hard: bool, f: impl FnOnce() -> (bool, String)) -> Line {
    let t = Instant::now();
    let (pass, detail) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(_) => (false, "panicked".to_string()),
    };
    let line = Line { id, pass, hard, detail, secs: t.elapsed().as_secs_f64() };
    println!(
        "criterion {:<3} {}  {} ({:.1}s)",
        line.id,
        if line.pass { "PASS" } else { "FAIL" },
        line.detail,
        line.secs
    );
    line
}

fn c1_gadgets() -> (bool, String) {
    let mut ok = true;
    for ell in 2..=32 {
        let sq = build_gadget(&GadgetKind::SquarePath { ell }).unwrap();
        let ps = build_gadget(&GadgetKind::PseudoPath { b: 1, ell }).unwrap();
        ok &= sq.edges.len() == 2 * ell - 3 && ps.edges == sq.edges;
    }
    let p28 = build_gadget(&GadgetKind::PseudoPath { b: 2, ell: 8 }).unwrap();
    let mut expect: BTreeSet<(usize, usize)> = (0..7).map(|i| (i, i + 1)).collect();
    expect.extend([(0, 2), (2, 4), (4, 6), (0, 3), (2, 5), (4, 7)]);
    let got: BTreeSet<(usize, usize)> = p28.edges.iter().copied().collect();
    ok &= got == expect && got.len() == 13;
    (ok, format!("ell 2..=32 give 2ell-3 edges, PseudoPath(2,8) has {} edges", got.len()))
}

fn c2_traversals() -> (bool, String) {
    let mut checked = 0;
    let mut ok = true;
    for ell in 2..=6 {
        for len in [4usize, 8] {
            let t = build_gadget(&GadgetKind::AbsorberTemplate { ell, connectors: vec![len; ell - 1] }).unwrap();
            let n = t.labels.len();
            let g = Graph::from_edges(n, t.edges.iter().copied()).unwrap();
            let e = Embedding::new(t.clone(), (0..n).collect()).unwrap();
            ok &= validate_embedding(&g, &e, None, None).is_ok();
            let x = e.absorbee().unwrap();
            let inc = absorber_traversal(&e, true).unwrap();
            let exc = absorber_traversal(&e, false).unwrap();
            let all: BTreeSet<Vertex> = (0..n).collect();
            let minus: BTreeSet<Vertex> = all.iter().copied().filter(|&v| v != x).collect();
            ok &= check_square_path(&g, &inc).is_ok() && check_square_path(&g, &exc).is_ok();
            ok &= inc.len() == n && inc.iter().copied().collect::<BTreeSet<_>>() == all;
            ok &= exc.len() == n - 1 && exc.iter().copied().collect::<BTreeSet<_>>() == minus;
            ok &= (inc[0], inc[1]) == (exc[0], exc[1]) && inc[n - 2..] == exc[n - 3..];
            checked += 1;
        }
    }
    (ok, format!("{checked} templates, both traversals exact"))
}

fn c3_matching() -> (bool, String) {
    let mut rng = common::rng(3);
    let mut disagree = 0;
    let mut bad_witness = 0;
    for _ in 0..10_000 {
        let (a, b, p) = (rng.gen_range(0..=6), rng.gen_range(0..=6), rng.gen_range(0.0..1.0));
        let inst = common::random_bipartite(&mut rng, a, b, p);
        let r = hall_saturating_matching(&inst).unwrap();
        disagree += usize::from(r.is_saturating() != common::exhaustive_saturating(&inst));
        match &r.witness {
            Some(Witness::Hall(w)) => {
                let direct = inst.neighborhood(w).len() < w.len();
                bad_witness += usize::from(!(direct && hall_witness_holds(&inst, w, 1)));
            }
            Some(_) => bad_witness += 1,
            None => {}
        }
    }
    let mut star_disagree = 0;
    for _ in 0..1_000 {
        let (a, b, p) = (rng.gen_range(0..=6), rng.gen_range(0..=6), rng.gen_range(0.0..1.0));
        let inst = common::random_bipartite(&mut rng, a, b, p);
        let h = hall_saturating_matching(&inst).unwrap();
        let s = star_matching(&inst, 1).unwrap();
        star_disagree += usize::from(h.is_saturating() != s.is_saturating());
        if let Some(Witness::Hall(w)) = &s.witness {
            bad_witness += usize::from(inst.neighborhood(w).len() >= w.len());
        }
    }
    let ok = disagree == 0 && star_disagree == 0 && bad_witness == 0;
    (ok, format!("Hall disagreements {disagree}/10000, star r=1 disagreements {star_disagree}/1000, bad witnesses {bad_witness}"))
}

fn c4_projection() -> (bool, String) {
    let (mut checked, mut failed) = (0, 0);
    for inst in 0..20u64 {
        let g = gnp_generate(600, 0.3, 4_000 + inst);
        let mut rng = common::rng(inst);
        let mut perm: Vec<Vertex> = (0..600).collect();
        perm.shuffle(&mut rng);
        let b = 1 + (inst as usize % 2);
        let m = 8;
        let pool = &perm[..200];
        let mut used = BTreeSet::new();
        let seeds: Vec<(Vertex, Vertex)> = g
            .edges()
            .into_iter()
            .filter(|&(u, v)| !pool.contains(&u) && !pool.contains(&v))
            .filter(|&(u, v)| !used.contains(&u) && !used.contains(&v) && used.insert(u) && used.insert(v))
            .take(10)
            .collect();
        let classes: Vec<Vec<Vertex>> = (0..m).map(|i| {
            let mut c = pool[i * 22..(i + 1) * 22].to_vec();
            c.sort_unstable();
            c
        }).collect();
        let excluded: Vec<Vertex> = classes.iter().map(|c| c[0]).collect();
        let pi: Vec<usize> = (1..=m).collect();
        let f = build_projection_graph(&g, &seeds, &pi, &classes, &excluded, b).unwrap();
        let blocks: Vec<usize> = (1..=m / 2).filter(|&j| !f.steps[2 * j].is_empty()).collect();
        if blocks.is_empty() {
            failed += 1;
            continue;
        }
        for _ in 0..100 {
            let j = *blocks.choose(&mut rng).unwrap();
            let edge = *f.steps[2 * j].choose(&mut rng).unwrap();
            checked += 1;
            let Ok((idx, emb)) = f.extract_pseudo_path(&g, j, edge) else {
                failed += 1;
                continue;
            };
            let seq = &emb.map;
            let mut ok = validate_embedding(&g, &emb, Some(seeds[idx]), Some(edge)).is_ok();
            ok &= seq.len() == 2 * j + 2 && (seq[0], seq[1]) == seeds[idx];
            ok &= seq.iter().collect::<BTreeSet<_>>().len() == seq.len();
            for (k, v) in seq[2..].iter().enumerate() {
                ok &= classes[pi[k] - 1].contains(v) && !excluded.contains(v);
            }
            failed += usize::from(!ok);
        }
    }
    (failed == 0 && checked == 2000, format!("{}/{} sampled layer edges extracted and validated", checked - failed, 2000))
}

fn c5_adversary(big: &[(Graph, f64)]) -> (bool, String) {
    let mut ok = true;
    let mut exact = 0;
    for s in 0..60u64 {
        let n = 6 + (s as usize % 25);
        let p = [0.5, 0.8, 1.0][s as usize % 3];
        let gamma = [0.0, 0.05, 0.25][(s / 3) as usize % 3];
        let g = gnp_generate(n, p, s);
        let a = k3_attack(&g, gamma, s).unwrap();
        ok &= triangles_meeting_twice(&a.attacked, &a.v1) == 0;
        let r = max_triangle_packing(&a.attacked, Some(&a.v1), 5_000_000).unwrap();
        ok &= r.exact && r.lower <= r.structural_bound.unwrap();
        ok &= r.lower as f64 <= (1.0 - gamma) * n as f64 / 3.0 + 1e-9;
        exact += usize::from(r.exact);
    }
    for (g, gamma) in big {
        let a = k3_attack(g, *gamma, 1).unwrap();
        ok &= triangles_meeting_twice(&a.attacked, &a.v1) == 0;
        let r = max_triangle_packing(&a.attacked, Some(&a.v1), 0).unwrap();
        ok &= r.structural_bound.unwrap() as f64 <= (1.0 - gamma) * g.n() as f64 / 3.0 + 1e-9;
        ok &= r.lower <= r.structural_bound.unwrap();
    }
    (ok, format!("60 instances n <= 30 exact ({exact} exact), {} structural at n >= 300", big.len()))
}

fn c6_closed_form() -> (bool, String) {
    let mut ok = true;
    for n in [9usize, 30, 90] {
        let g = Graph::complete(n);
        let a = k3_attack(&g, 0.0, n as u64).unwrap();
        let prof = triangle_retention_profile(&g, &a.attacked, Some(1.0), Some(0.0)).unwrap();
        let total = binom2(n - 1);
        let in_v1 = 1.0 - binom2(a.v2.len()) / total;
        let in_v2 = binom2(a.v1.len()) / total;
        for v in 0..n {
            let d = 1.0 - prof.retained[v];
            let want = if a.v1.contains(&v) { in_v1 } else { in_v2 };
            ok &= (d - want).abs() < 1e-12;
        }
    }
    (ok, "K9/K30/K90 per-vertex destroyed fractions equal the closed form".to_string())
}

fn c6_experiment() -> (bool, String) {
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut params = ExperimentParams::new(800, 0.25, 0.05, (0..100).collect());
    params.jobs = jobs;
    let rep = resilience_experiment(&params).unwrap();
    let k = rep.per_seed.len() as f64;
    let retained_ok = rep.per_seed.iter().filter(|s| (s.min_retained_fraction - RETAINED_TARGET).abs() <= RETAINED_TOL).count();
    let destroyed_ok = rep.per_seed.iter().filter(|s| (s.destroyed_v1.median - DESTROYED_TARGET).abs() <= DESTROYED_TOL).count();
    let mut mins: Vec<f64> = rep.per_seed.iter().map(|s| s.min_retained_fraction).collect();
    mins.sort_by(f64::total_cmp);
    let pass = retained_ok as f64 >= SEED_FRACTION * k && destroyed_ok as f64 >= SEED_FRACTION * k;
    (
        pass,
        format!(
            "min retained within 4/9±0.10 in {retained_ok}/100 seeds (median of minima {:.3}), median destroyed within 5/9±0.05 in {destroyed_ok}/100",
            mins[mins.len() / 2]
        ),
    )
}

fn c7_soundness(certs: &[(Graph, Vec<Vertex>)]) -> (bool, String) {
    let mut ok = true;
    let mut mutations = 0;
    for (g, order) in certs {
        let c = sqcycle::hamiltonian::Certificate { order: order.clone() };
        ok &= verify_certificate(g, &c).unwrap().pass && common::is_square_cycle(g, order);
        let n = order.len();
        let mut used = BTreeSet::new();
        for i in 0..n {
            for d in [1, 2] {
                let (u, v) = (order[i], order[(i + d) % n]);
                used.insert((u.min(v), u.max(v)));
            }
        }
        for &(u, v) in used.iter().take(60) {
            let h = g.without_edges(|a, b| (a, b) == (u, v));
            let r = verify_certificate(&h, &c).unwrap();
            ok &= !r.pass && r.missing.map(|(a, b)| (a.min(b), a.max(b))) == Some((u, v));
            mutations += 1;
        }
    }
    (ok, format!("{} certificates verified, {mutations} single-edge deletions all detected", certs.len()))
}

fn run_find(g: &Graph, seed: u64) -> Result<PipelineOutcome, String> {
    let cfg = PipelineConfig { seed, ..Default::default() };
    catch_unwind(AssertUnwindSafe(|| find_square_ham(g, None, &cfg)))
        .map_err(|_| "panic".to_string())?
        .map_err(|e| e.to_string())
}

fn c8_oracle(certs: &mut Vec<(Graph, Vec<Vertex>)>) -> (bool, String) {
    let mut rng = common::rng(8);
    let (mut found, mut unconfirmed, mut errors) = (0, 0, 0);
    for i in 0..500u64 {
        let n = rng.gen_range(5..=12);
        let p = rng.gen_range(0.6..1.0);
        let g = common::random_graph(&mut rng, n, p);
        match run_find(&g, i) {
            Ok(PipelineOutcome::Found { certificate, .. }) => {
                found += 1;
                if !matches!(brute_force_square_ham(&g, 50_000_000), OracleResult::Found(_)) {
                    unconfirmed += 1;
                }
                certs.push((g, certificate.order));
            }
            Ok(PipelineOutcome::Failed(_)) => {}
            Err(_) => errors += 1,
        }
    }
    let mut kn_ok = 0;
    for n in 5..=30 {
        let g = Graph::complete(n);
        if let Ok(PipelineOutcome::Found { certificate, .. }) = run_find(&g, n as u64) {
            kn_ok += 1;
            certs.push((g, certificate.order));
        }
    }
    let ok = unconfirmed == 0 && errors == 0 && kn_ok == 26;
    (ok, format!("{found}/500 corpus successes, {unconfirmed} unconfirmed by the oracle, {errors} errors; K_n for n in 5..=30: {kn_ok}/26"))
}

fn c9_connect() -> (bool, String) {
    let cfg = ConnectorConfig::default();
    let mut rates = Vec::new();
    for b in [1usize, 2] {
        let mut ok = 0;
        for s in 0..50u64 {
            let g = gnp_generate(800, 0.35, 9_000 + s);
            let mut perm: Vec<Vertex> = (0..800).collect();
            perm.shuffle(&mut common::rng(s));
            let w: Vec<Vertex> = perm[..200].to_vec();
            let rest = &perm[200..];
            let edge_from = |skip: &[Vertex]| {
                rest.iter()
                    .flat_map(|&u| rest.iter().map(move |&v| (u, v)))
                    .find(|&(u, v)| u != v && g.has_edge(u, v) && !skip.contains(&u) && !skip.contains(&v))
                    .unwrap()
            };
            let x = edge_from(&[]);
            let y = edge_from(&[x.0, x.1]);
            let req = ConnectRequest::new(vec![(x, y)], w, b, 8).unwrap();
            let run = catch_unwind(AssertUnwindSafe(|| connect_one(&g, &req, &[], s, &cfg)));
            if let Ok(Ok(ConnectOutcome::Connected(c))) = run {
                let valid = validate_embedding(&g, &c.path, Some(x), Some(y)).is_ok()
                    && c.interior.iter().all(|v| req.reservoir.contains(v));
                ok += usize::from(valid);
            }
        }
        rates.push(ok);
    }
    let pass = rates.iter().all(|&r| r as f64 >= CONNECT_RATE * 50.0);
    (pass, format!("connect_one on G(800, 0.35), |W| = 200, ell = 8: b=1 {}/50, b=2 {}/50", rates[0], rates[1]))
}

fn c9_find(certs: &mut Vec<(Graph, Vec<Vertex>)>) -> (bool, String) {
    let (mut found, mut named, mut errors) = (0, 0, 0);
    for s in 0..50u64 {
        let g = gnp_generate(100, 0.6, 10_000 + s);
        match run_find(&g, s) {
            Ok(PipelineOutcome::Found { certificate, .. }) => {
                found += 1;
                certs.push((g, certificate.order));
            }
            Ok(PipelineOutcome::Failed(f)) => {
                named += usize::from(serde_json::to_value(f.stage).is_ok() && !f.diagnostics.is_null());
            }
            Err(_) => errors += 1,
        }
    }
    let pass = found as f64 >= FIND_RATE * 50.0 && errors == 0 && named == 50 - found;
    (pass, format!("find on G(100, 0.6): {found}/50, {named} stage-named failures, {errors} errors or panics"))
}

fn c10_determinism() -> (bool, String) {
    let mut ok = true;
    ok &= gnp_generate(500, 0.3, 5) == gnp_generate(500, 0.3, 5);
    let g = gnp_generate(120, 0.7, 6);
    let a = run_find(&g, 3).map(|o| serde_json::to_string(&o).unwrap());
    ok &= a.is_ok() && a == run_find(&g, 3).map(|o| serde_json::to_string(&o).unwrap());
    let mut p = ExperimentParams::new(60, 0.5, 0.05, (0..4).collect());
    let r1 = resilience_experiment(&p).unwrap();
    p.jobs = 3;
    let r3 = resilience_experiment(&p).unwrap();
    ok &= r1.per_seed == r3.per_seed && r1.aggregates == r3.aggregates;

    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap().to_string();
    let gfile = format!("{d}/g.txt");
    run_command(["sqcycle", "generate", "-n", "200", "-p", "0.6", "--seed", "9", "--out", &gfile]);
    let cmds: Vec<Vec<String>> = [
        vec!["generate", "-n", "200", "-p", "0.6", "--seed", "9"],
        vec!["attack", "--graph", &gfile, "--seed", "2"],
        vec!["find", "--graph", &gfile, "--seed", "4"],
        vec!["cover", "--graph", &gfile, "--seed", "4"],
        vec!["experiment", "-n", "40", "-p", "0.5", "--seeds", "2"],
        vec!["gadget", "--kind", "absorber", "--ell", "3"],
    ]
    .iter()
    .map(|c| c.iter().map(|s| s.to_string()).collect())
    .collect();
    let mut compared = 0;
    for (i, c) in cmds.iter().enumerate() {
        let mut out = Vec::new();
        for r in 0..2 {
            let path = format!("{d}/out{i}_{r}");
            let mut argv = vec!["sqcycle".to_string()];
            argv.extend(c.iter().cloned());
            argv.extend(["--out".to_string(), path.clone()]);
            let code = run_command(argv);
            ok &= code <= 1;
            out.push(std::fs::read(&path).unwrap_or_default());
        }
        ok &= !out[0].is_empty() && out[0] == out[1];
        compared += 1;
    }
    (ok, format!("library calls and {compared} CLI commands byte-identical across two runs"))
}

fn main() {
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut lines = Vec::new();
    let mut certs: Vec<(Graph, Vec<Vertex>)> = Vec::new();
    lines.push(timed("1", true, c1_gadgets));
    lines.push(timed("2", true, c2_traversals));
    lines.push(timed("3", true, c3_matching));
    lines.push(timed("4", true, c4_projection));
    let big: Vec<(Graph, f64)> = (0..3).map(|s| (gnp_generate(300 + 250 * s as usize, 0.25, s), 0.05)).collect();
    lines.push(timed("5", true, || c5_adversary(&big)));
    lines.push(timed("6a", false, c6_experiment));
    lines.push(timed("6b", true, c6_closed_form));
    lines.push(timed("8", true, || c8_oracle(&mut certs)));
    lines.push(timed("9a", false, c9_connect));
    lines.push(timed("9b", false, || c9_find(&mut certs)));
    let g = gnp_generate(60, 0.9, 1);
    if let Ok(PipelineOutcome::Found { certificate, .. }) = run_find(&g, 1) {
        certs.push((g, certificate.order));
    }
    lines.push(timed("7", true, || c7_soundness(&certs)));
    lines.push(timed("10", true, c10_determinism));

    let failed: Vec<&Line> = lines.iter().filter(|l| !l.pass).collect();
    let hard_failed = failed.iter().any(|l| l.hard);
    println!(
        "acceptance: {} passed, {} failed ({})",
        lines.len() - failed.len(),
        failed.len(),
        if failed.is_empty() { "all".to_string() } else { failed.iter().map(|l| l.id).collect::<Vec<_>>().join(", ") }
    );
    if hard_failed || (strict && !failed.is_empty()) {
        std::process::exit(1);
    }
}
