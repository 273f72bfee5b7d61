use std::fs;
use std::path::Path;

use sqcycle::cli::run_command;
use sqcycle::graph::io::to_edge_list;
use sqcycle::Graph;

fn run(dir: &Path, args: &[&str]) -> i32 {
    let mut argv = vec!["sqcycle".to_string()];
    argv.extend(args.iter().map(|a| a.replace("{}", dir.to_str().unwrap())));
    run_command(argv)
}

#[test]
fn generate_is_byte_identical_and_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(d, &["generate", "-n", "100", "-p", "0.5", "--seed", "7", "--out", "{}/a.txt"]), 0);
    assert_eq!(run(d, &["generate", "-n", "100", "-p", "0.5", "--seed", "7", "--out", "{}/b.txt"]), 0);
    assert_eq!(fs::read(d.join("a.txt")).unwrap(), fs::read(d.join("b.txt")).unwrap());
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("a.txt.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 7);
    assert_eq!(m["exit_code"], 0);
    assert!(m["config"]["eps"].is_number());
    assert!(m["version"].is_string());
}

#[test]
fn find_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("k20.txt"), to_edge_list(&Graph::complete(20))).unwrap();
    assert_eq!(run(d, &["find", "--graph", "{}/k20.txt", "--out", "{}/c.json"]), 0);
    assert_eq!(run(d, &["verify", "--graph", "{}/k20.txt", "--certificate", "{}/c.json", "--out", "{}/v.json"]), 0);
    for seed in ["1", "2", "3"] {
        assert_eq!(run(d, &["generate", "-n", "60", "-p", "0.9", "--seed", seed, "--out", "{}/g.txt"]), 0);
        let code = run(d, &["find", "--graph", "{}/g.txt", "--seed", seed, "--out", "{}/c.json"]);
        if code == 0 {
            assert_eq!(run(d, &["verify", "--graph", "{}/g.txt", "--certificate", "{}/c.json"]), 0);
        } else {
            assert_eq!(code, 1);
            let f: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("c.json")).unwrap()).unwrap();
            assert!(f["stage"].is_string());
        }
    }
}

#[test]
fn corrupted_certificate_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let g = Graph::complete(8).without_edges(|u, v| (u, v) == (0, 1));
    fs::write(d.join("g.txt"), to_edge_list(&g)).unwrap();
    fs::write(d.join("c.json"), r#"{"order":[0,1,2,3,4,5,6,7]}"#).unwrap();
    assert_eq!(run(d, &["verify", "--graph", "{}/g.txt", "--certificate", "{}/c.json", "--out", "{}/v.json"]), 1);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("v.json")).unwrap()).unwrap();
    assert_eq!(v["pass"], false);
    assert!(v["missing"].is_array());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(d, &["no-such-command"]), 2);
    assert_eq!(run(d, &["find", "--graph", "{}/missing.txt"]), 3);
    fs::write(d.join("bad.txt"), "3 1\n0 7\n").unwrap();
    assert_eq!(run(d, &["find", "--graph", "{}/bad.txt"]), 2);
    fs::write(d.join("bad.cfg"), "nonsense = 1\n").unwrap();
    assert_eq!(run(d, &["gadget", "--kind", "square-path", "--ell", "4", "--config", "{}/bad.cfg"]), 2);
    fs::write(d.join("iso.txt"), to_edge_list(&Graph::complete(30).without_edges(|u, _| u == 0))).unwrap();
    assert_eq!(run(d, &["find", "--graph", "{}/iso.txt", "--out", "{}/f.json"]), 1);
}

#[test]
fn config_overrides_reach_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("run.cfg"), "eps = 0.25\nretries = 2\n").unwrap();
    assert_eq!(run(d, &["gadget", "--kind", "backbone", "--ell", "3", "--config", "{}/run.cfg", "--out", "{}/b.json"]), 0);
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("b.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["eps"], 0.25);
    assert_eq!(m["config"]["retries"], 2);
    let g: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("b.json")).unwrap()).unwrap();
    assert_eq!(g["kind"], "backbone");
}

#[test]
fn seeded_commands_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(d, &["generate", "-n", "300", "-p", "0.5", "--seed", "4", "--out", "{}/g.txt"]), 0);
    let g = sqcycle::graph::io::read_graph(&d.join("g.txt")).unwrap();
    let (a, b) = g.edges().into_iter().find(|&(u, _)| u == 0).unwrap();
    let (c, e) = g.edges().into_iter().find(|&(u, v)| u > b && v > b).unwrap();
    let pair = format!("{a},{b},{c},{e}");
    let cmds: Vec<Vec<&str>> = vec![
        vec!["attack", "--graph", "{}/g.txt", "--seed", "5"],
        vec!["attack", "--graph", "{}/g.txt", "--seed", "5", "--format", "json"],
        vec!["experiment", "-n", "40", "-p", "0.5", "--seeds", "3", "--jobs", "2"],
        vec!["experiment", "-n", "40", "-p", "0.5", "--seeds", "3", "--format", "csv"],
        vec!["cover", "--graph", "{}/g.txt", "--seed", "2"],
        vec!["absorber", "build", "--graph", "{}/g.txt", "--x", "0,1,2", "--seed", "3"],
        vec!["connect", "--graph", "{}/g.txt", "--pair", &pair, "--seed", "1"],
    ];
    for (i, c) in cmds.iter().enumerate() {
        let mut outs = Vec::new();
        for r in 0..2 {
            let out = format!("{{}}/o{i}_{r}");
            let mut args = c.clone();
            args.extend(["--out", &out]);
            let code = run(d, &args);
            assert!(code <= 1, "{c:?} exited {code}");
            outs.push(fs::read(d.join(format!("o{i}_{r}"))).unwrap());
        }
        assert_eq!(outs[0], outs[1], "{c:?} differs between runs");
    }
    let jobs1 = fs::read(d.join("o2_0")).unwrap();
    assert_eq!(run(d, &["experiment", "-n", "40", "-p", "0.5", "--seeds", "3", "--jobs", "1", "--out", "{}/j1"]), 0);
    assert_eq!(fs::read(d.join("j1")).unwrap(), jobs1);
}

#[test]
fn absorber_build_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("k.txt"), to_edge_list(&Graph::complete(300))).unwrap();
    assert_eq!(run(d, &["absorber", "build", "--graph", "{}/k.txt", "--x", "0-2", "--out", "{}/a.json"]), 0);
    assert_eq!(run(d, &["absorber", "verify", "--graph", "{}/k.txt", "--absorber", "{}/a.json", "--out", "{}/r.json"]), 0);
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(r["checked"], 8);
}
