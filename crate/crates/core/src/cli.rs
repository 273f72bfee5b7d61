//! Command-line front end. Every command writes its artifact to `--out`
//! (or stdout) and a run manifest next to it (or to stderr).
//!
//! Exit codes: 0 success, 1 algorithmic failure, 2 usage error, 3 I/O error.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::absorber::{build_absorber, verify_absorber, Absorber, VerifyMode};
use crate::adversary::{k3_attack, resilience_experiment, triangle_retention_profile, ExperimentParams};
use crate::connector::{connect_all_with_ladder, ConnectAllOutcome, ConnectRequest, Tuple};
use crate::error::Error;
use crate::gadgets::{build_gadget, GadgetKind};
use crate::graph::io::{read_graph, to_edge_list, to_json};
use crate::graph::{gnp_generate, Graph, Vertex};
use crate::hamiltonian::{
    cover_with_square_paths, find_square_ham, verify_certificate, Certificate, PipelineConfig, PipelineOutcome,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Edgelist,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GadgetName {
    SquarePath,
    PseudoPath,
    Backbone,
    ConnectingPath,
    Absorber,
}

#[derive(Parser, Debug)]
#[command(name = "sqcycle", version, about = "Square Hamilton cycles, absorbers and the triangle-resilience adversary")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Flat `key = value` file overriding pipeline defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Sample G(n, p).
    Generate {
        #[arg(short = 'n')]
        n: usize,
        #[arg(short = 'p')]
        p: f64,
    },
    /// Remove all edges inside a random V1 of size ⌈(1/3 + 2γ/3)n⌉.
    Attack {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        gamma: f64,
    },
    /// Per-vertex triangle retention between two graphs.
    Profile {
        #[arg(long)]
        before: PathBuf,
        #[arg(long)]
        after: PathBuf,
        #[arg(short = 'p')]
        p: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Search the square of a Hamilton cycle.
    Find {
        #[arg(long)]
        graph: PathBuf,
        /// Host graph the input must be a subgraph of.
        #[arg(long)]
        host: Option<PathBuf>,
    },
    /// Check a certificate `{"order": [...]}`.
    Verify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        certificate: PathBuf,
    },
    /// Connect ordered pairs of pairs through a reservoir.
    Connect {
        #[arg(long)]
        graph: PathBuf,
        /// `a,b,c,d` connects `(a, b)` to `(c, d)`; repeatable.
        #[arg(long = "pair", required = true)]
        pairs: Vec<String>,
        /// Vertex list such as `10-99,120`; default all vertices outside the pairs.
        #[arg(long)]
        reservoir: Option<String>,
        #[arg(long, default_value_t = 1)]
        b: usize,
        #[arg(long, default_value_t = 8)]
        ell: usize,
    },
    /// Build or verify absorbers.
    Absorber {
        #[command(subcommand)]
        action: AbsorberCmd,
    },
    /// Dump a template graph.
    Gadget {
        #[arg(long, value_enum)]
        kind: GadgetName,
        #[arg(long)]
        ell: usize,
        #[arg(long, default_value_t = 1)]
        b: usize,
        /// Connector lengths for absorber templates, such as `4,8`.
        #[arg(long)]
        connectors: Option<String>,
    },
    /// Attack G(n, p) over a range of seeds and aggregate.
    Experiment {
        #[arg(short = 'n')]
        n: usize,
        #[arg(short = 'p')]
        p: f64,
        #[arg(long, default_value_t = 0.05)]
        gamma: f64,
        /// Number of seeds, starting at `--seed`.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run the covering stage alone on the whole graph.
    Cover {
        #[arg(long)]
        graph: PathBuf,
        /// Smallest bootstrap class, or `all` for one round.
        #[arg(long)]
        floor: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
enum AbsorberCmd {
    Build {
        #[arg(long)]
        graph: PathBuf,
        /// Absorbee list such as `0,1,2`.
        #[arg(long)]
        x: String,
        #[arg(long)]
        reservoir: Option<String>,
    },
    Verify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        absorber: PathBuf,
        /// Sampled mode with this many subsets; exhaustive when absent.
        #[arg(long)]
        samples: Option<usize>,
    },
}

#[derive(Debug)]
struct Failure {
    code: i32,
    msg: String,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: 2, msg: msg.into() }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) => 3,
            Error::Composition(_) => 1,
            _ => 2,
        };
        Failure { code, msg: e.to_string() }
    }
}

/// Text written to the output and the exit code it carries.
struct Artifact {
    text: String,
    code: i32,
    note: Option<String>,
}

impl Artifact {
    fn ok(text: String) -> Self {
        Artifact { text, code: 0, note: None }
    }

    fn json(v: &Value) -> Self {
        Artifact::ok(pretty(v))
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Parses a flat `key = value` config; `#` starts a comment.
pub fn parse_config(text: &str) -> std::result::Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(format!("line {}: expected key = value", i + 1));
        };
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("bad value {v:?} for {key}"))
}

fn parse_list(key: &str, v: &str) -> std::result::Result<Vec<usize>, String> {
    v.split(',').map(|s| parse_num(key, s.trim())).collect()
}

/// Applies config overrides to the pipeline defaults.
pub fn apply_config(cfg: &mut PipelineConfig, kv: &BTreeMap<String, String>) -> std::result::Result<(), String> {
    for (k, v) in kv {
        let k = k.as_str();
        match k {
            "alpha" => cfg.alpha = parse_num(k, v)?,
            "eps" => cfg.eps = parse_num(k, v)?,
            "c1" => cfg.c1 = parse_num(k, v)?,
            "x_size" => cfg.x_size = if v == "auto" { None } else { Some(parse_num(k, v)?) },
            "x1_fraction" => cfg.x1_fraction = parse_num(k, v)?,
            "connect_ladder" => cfg.connect_ladder = parse_list(k, v)?,
            "cover_floor" => cfg.cover_floor = if v == "all" { None } else { Some(parse_num(k, v)?) },
            "cover_budget" => cfg.cover_budget = parse_num(k, v)?,
            "retries" => cfg.retries = parse_num(k, v)?,
            "oracle_budget" => cfg.oracle_budget = parse_num(k, v)?,
            "seed" => cfg.seed = parse_num(k, v)?,
            "backbone_ell" => cfg.absorber.backbone_ell = parse_num(k, v)?,
            "block_ladder" => cfg.absorber.block_ladder = parse_list(k, v)?,
            "chain_ladder" => cfg.absorber.chain_ladder = parse_list(k, v)?,
            "connector.retries" => cfg.absorber.connector.retries = parse_num(k, v)?,
            "connector.load_fraction" => cfg.absorber.connector.load_fraction = parse_num(k, v)?,
            "connector.class_size" => {
                cfg.absorber.connector.class_size = if v == "auto" { None } else { Some(parse_num(k, v)?) }
            }
            "connector.eps" => cfg.absorber.connector.eps = parse_num(k, v)?,
            _ => return Err(format!("unknown config key {k:?}")),
        }
    }
    Ok(())
}

/// Parses `0,3,5-9` into a vertex list.
pub fn parse_vertices(s: &str) -> std::result::Result<Vec<Vertex>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (parse_num("range", a.trim())?, parse_num("range", b.trim())?);
                if a > b {
                    return Err(format!("empty range {part}"));
                }
                out.extend(a..=b);
            }
            None => out.push(parse_num("vertex", part)?),
        }
    }
    Ok(out)
}

fn load(path: &Path) -> std::result::Result<Graph, Failure> {
    Ok(read_graph(path)?)
}

fn read_text(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure { code: 3, msg: format!("{}: {e}", path.display()) })
}

fn graph_artifact(g: &Graph, fmt: Format) -> std::result::Result<Artifact, Failure> {
    match fmt {
        Format::Edgelist => Ok(Artifact::ok(to_edge_list(g))),
        Format::Json => Ok(Artifact::ok(to_json(g) + "\n")),
        Format::Csv => Err(usage("graphs are written as edgelist or json")),
    }
}

fn only_json(fmt: Format, what: &str) -> std::result::Result<(), Failure> {
    if fmt != Format::Json {
        return Err(usage(format!("{what} output is json only")));
    }
    Ok(())
}

fn dispatch(cli: &Cli, cfg: &PipelineConfig) -> std::result::Result<Artifact, Failure> {
    let seed = cli.seed;
    match &cli.cmd {
        Cmd::Generate { n, p } => {
            if !(0.0..=1.0).contains(p) {
                return Err(usage(format!("p must lie in [0, 1], got {p}")));
            }
            graph_artifact(&gnp_generate(*n, *p, seed), cli.format.unwrap_or(Format::Edgelist))
        }
        Cmd::Attack { graph, gamma } => {
            let g = load(graph)?;
            let a = k3_attack(&g, *gamma, seed)?;
            match cli.format.unwrap_or(Format::Edgelist) {
                Format::Json => {
                    let gj: Value = serde_json::from_str(&to_json(&a.attacked)).expect("graph json");
                    Ok(Artifact::json(&json!({
                        "v1": a.v1,
                        "v2": a.v2,
                        "removed_edge_count": a.removed_edge_count,
                        "graph": gj,
                    })))
                }
                f => graph_artifact(&a.attacked, f),
            }
        }
        Cmd::Profile { before, after, p, gamma } => {
            let prof = triangle_retention_profile(&load(before)?, &load(after)?, *p, *gamma)?;
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => Ok(Artifact::json(&serde_json::to_value(&prof).expect("serializable"))),
                Format::Csv => {
                    let mut s = String::from("vertex,before,after,retained\n");
                    for v in 0..prof.before.len() {
                        s.push_str(&format!("{v},{},{},{:.6}\n", prof.before[v], prof.after[v], prof.retained[v]));
                    }
                    Ok(Artifact::ok(s))
                }
                Format::Edgelist => Err(usage("profile output is json or csv")),
            }
        }
        Cmd::Find { graph, host } => {
            only_json(cli.format.unwrap_or(Format::Json), "find")?;
            let g = load(graph)?;
            let h = host.as_deref().map(load).transpose()?;
            match find_square_ham(&g, h.as_ref(), cfg)? {
                PipelineOutcome::Found { certificate, .. } => {
                    Ok(Artifact::json(&serde_json::to_value(&certificate).expect("serializable")))
                }
                PipelineOutcome::Failed(f) => {
                    let stage = serde_json::to_value(f.stage).expect("serializable");
                    Ok(Artifact {
                        text: pretty(&serde_json::to_value(&f).expect("serializable")),
                        code: 1,
                        note: Some(format!("pipeline failed at stage {stage}")),
                    })
                }
            }
        }
        Cmd::Verify { graph, certificate } => {
            only_json(cli.format.unwrap_or(Format::Json), "verify")?;
            let g = load(graph)?;
            let c: Certificate = serde_json::from_str(&read_text(certificate)?)
                .map_err(|e| usage(format!("certificate is not {{\"order\": [...]}}: {e}")))?;
            let check = verify_certificate(&g, &c)?;
            let text = pretty(&serde_json::to_value(&check).expect("serializable"));
            if check.pass {
                Ok(Artifact::ok(text))
            } else {
                let note = match check.missing {
                    Some((u, v)) => format!("missing edge {{{u}, {v}}}"),
                    None => "fewer than 3 vertices".to_string(),
                };
                Ok(Artifact { text, code: 1, note: Some(note) })
            }
        }
        Cmd::Connect { graph, pairs, reservoir, b, ell } => {
            only_json(cli.format.unwrap_or(Format::Json), "connect")?;
            let g = load(graph)?;
            let tuples = pairs
                .iter()
                .map(|s| {
                    let v = parse_vertices(s).map_err(usage)?;
                    match v[..] {
                        [a, b, c, d] => Ok(((a, b), (c, d))),
                        _ => Err(usage(format!("pair {s:?} needs four vertices a,b,c,d"))),
                    }
                })
                .collect::<std::result::Result<Vec<Tuple>, Failure>>()?;
            let res = match reservoir {
                Some(r) => parse_vertices(r).map_err(usage)?,
                None => {
                    let used: Vec<Vertex> = tuples.iter().flat_map(|t| [t.0 .0, t.0 .1, t.1 .0, t.1 .1]).collect();
                    (0..g.n()).filter(|v| !used.contains(v)).collect()
                }
            };
            let req = ConnectRequest::new(tuples, res, *b, *ell)?;
            let out = connect_all_with_ladder(&g, &req, &[*ell], seed, &cfg.absorber.connector)?;
            let code = i32::from(matches!(out, ConnectAllOutcome::Failed { .. }));
            Ok(Artifact { text: pretty(&serde_json::to_value(&out).expect("serializable")), code, note: None })
        }
        Cmd::Absorber { action } => {
            only_json(cli.format.unwrap_or(Format::Json), "absorber")?;
            match action {
                AbsorberCmd::Build { graph, x, reservoir } => {
                    let g = load(graph)?;
                    let xs = parse_vertices(x).map_err(usage)?;
                    let w = match reservoir {
                        Some(r) => parse_vertices(r).map_err(usage)?,
                        None => (0..g.n()).filter(|v| !xs.contains(v)).collect(),
                    };
                    match build_absorber(&g, &xs, &w, &cfg.absorber, seed)? {
                        Ok(a) => Ok(Artifact::json(&a.to_json())),
                        Err(f) => Ok(Artifact { text: pretty(&f.to_json()), code: 1, note: Some(f.reason.clone()) }),
                    }
                }
                AbsorberCmd::Verify { graph, absorber, samples } => {
                    let g = load(graph)?;
                    let a: Absorber = serde_json::from_str(&read_text(absorber)?)
                        .map_err(|e| usage(format!("not an absorber: {e}")))?;
                    let mode = samples.map_or(VerifyMode::Exhaustive, VerifyMode::Sampled);
                    let r = verify_absorber(&g, &a, mode, seed)?;
                    let code = i32::from(!r.pass);
                    let note = r.failure.as_ref().map(|f| format!("fails for X' = {:?}: {}", f.x_prime, f.reason));
                    Ok(Artifact { text: pretty(&serde_json::to_value(&r).expect("serializable")), code, note })
                }
            }
        }
        Cmd::Gadget { kind, ell, b, connectors } => {
            only_json(cli.format.unwrap_or(Format::Json), "gadget")?;
            let (ell, b) = (*ell, *b);
            let k = match kind {
                GadgetName::SquarePath => GadgetKind::SquarePath { ell },
                GadgetName::PseudoPath => GadgetKind::PseudoPath { b, ell },
                GadgetName::Backbone => GadgetKind::Backbone { ell },
                GadgetName::ConnectingPath => GadgetKind::ConnectingPath { b, ell },
                GadgetName::Absorber => match connectors {
                    Some(c) => GadgetKind::AbsorberTemplate { ell, connectors: parse_vertices(c).map_err(usage)? },
                    None => GadgetKind::absorber(ell),
                },
            };
            Ok(Artifact::json(&build_gadget(&k)?.to_json()))
        }
        Cmd::Experiment { n, p, gamma, seeds, jobs } => {
            let mut params = ExperimentParams::new(*n, *p, *gamma, (seed..seed + seeds).collect());
            params.jobs = *jobs;
            let r = resilience_experiment(&params)?;
            // the thread count does not affect results, so it is left out of the artifact
            let mut out = r.clone();
            out.params.jobs = 0;
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => Ok(Artifact::json(&out.to_json())),
                Format::Csv => Ok(Artifact::ok(out.to_csv())),
                Format::Edgelist => Err(usage("experiment output is json or csv")),
            }
        }
        Cmd::Cover { graph, floor } => {
            only_json(cli.format.unwrap_or(Format::Json), "cover")?;
            let g = load(graph)?;
            let floor = match floor.as_deref() {
                None => cfg.cover_floor,
                Some("all") => None,
                Some(f) => Some(parse_num("floor", f).map_err(usage)?),
            };
            let all: Vec<Vertex> = (0..g.n()).collect();
            let c = cover_with_square_paths(&g, &all, 0.0, floor, seed, cfg.cover_budget)?;
            Ok(Artifact::json(&serde_json::to_value(&c).expect("serializable")))
        }
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Runs one command line (including the program name) and returns the exit code.
pub fn run_command<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let start = Instant::now();
    let mut cfg = PipelineConfig { seed: cli.seed, ..Default::default() };
    if let Some(path) = &cli.config {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return 3;
            }
        };
        if let Err(msg) = parse_config(&text).and_then(|kv| apply_config(&mut cfg, &kv)) {
            eprintln!("error: config {}: {msg}", path.display());
            return 2;
        }
    }
    let result = dispatch(&cli, &cfg);
    let (code, text, note) = match result {
        Ok(a) => (a.code, Some(a.text), a.note),
        Err(f) => (f.code, None, Some(f.msg)),
    };
    if let Some(note) = &note {
        eprintln!("{}: {note}", if code == 0 { "note" } else { "error" });
    }
    let mut outputs = Vec::new();
    if let Some(text) = &text {
        match &cli.out {
            Some(path) => {
                if let Err(e) = fs::write(path, text) {
                    eprintln!("error: {}: {e}", path.display());
                    return 3;
                }
                outputs.push(path.display().to_string());
            }
            None => print!("{text}"),
        }
    }
    let manifest = json!({
        "command": args.get(1..).unwrap_or(&[]),
        "config": cfg.to_json(),
        "seed": cli.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "wall_clock_ms": start.elapsed().as_millis() as u64,
        "outputs": outputs,
        "exit_code": code,
    });
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(manifest_path(path), pretty(&manifest)) {
                eprintln!("error: manifest: {e}");
                return 3;
            }
        }
        None => eprintln!("manifest: {manifest}"),
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let kv = parse_config("eps = 0.2 # comment\n\ncover_floor=all\nconnect_ladder = 4,8,12\n").unwrap();
        let mut cfg = PipelineConfig::default();
        apply_config(&mut cfg, &kv).unwrap();
        assert_eq!(cfg.eps, 0.2);
        assert_eq!(cfg.cover_floor, None);
        assert_eq!(cfg.connect_ladder, vec![4, 8, 12]);
        assert!(parse_config("eps 0.2").is_err());
        let bad = parse_config("nope = 1").unwrap();
        assert!(apply_config(&mut cfg, &bad).is_err());
    }

    #[test]
    fn vertex_lists() {
        assert_eq!(parse_vertices("0,3,5-7").unwrap(), vec![0, 3, 5, 6, 7]);
        assert!(parse_vertices("7-5").is_err());
        assert!(parse_vertices("a").is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_command(["sqcycle", "bogus"]), 2);
        assert_eq!(run_command(["sqcycle", "generate", "-n", "5"]), 2);
    }
}
