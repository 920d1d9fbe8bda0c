use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value as Json;

fn choreo(args: &[&str], cex_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_choreo"))
        .args(args)
        .env_remove("CHOREO_SEED")
        .env("CHOREO_CEX_DIR", cex_dir)
        .output()
        .unwrap()
}

fn report(out: &Output) -> Json {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn enumerate_single_node_bosco() {
    let dir = tempfile::tempdir().unwrap();
    let out = choreo(&["enumerate", "--protocol", "bosco", "--n", "1", "--f", "0", "--b", "0", "--inputs", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["runs"][0]["count"], 1);
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = choreo(&["check", "one-step", "--n", "8", "--f", "1"], dir.path());
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(report(&ok)["holds"], true);

    let bad = choreo(&["check", "one-step", "--n", "7", "--f", "1"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    let r = report(&bad);
    assert_eq!(r["precondition"], false);
    assert_eq!(r["holds"], false);
    let stderr = String::from_utf8(bad.stderr).unwrap();
    let path = stderr.trim().strip_prefix("counterexample written to ").expect("path echoed on stderr");
    let cex: Json = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(cex["check"], "one-step");
    assert!(path.starts_with(dir.path().to_str().unwrap()));

    let budget = choreo(&["check", "adequacy", "--protocol", "bosco", "--max-states", "10"], dir.path());
    assert_eq!(budget.status.code(), Some(2));
    assert_eq!(report(&budget)["exhaustive"], false);

    let unknown = choreo(&["check", "liveness"], dir.path());
    assert_eq!(unknown.status.code(), Some(3));
    let missing = choreo(&["check", "adequacy"], dir.path());
    assert_eq!(missing.status.code(), Some(3));
    let wrong = choreo(&["check", "seqpaxos-agreement", "--protocol", "bosco"], dir.path());
    assert_eq!(wrong.status.code(), Some(3));
    let invalid = choreo(&["enumerate", "--protocol", "bosco", "--f", "0", "--b", "1"], dir.path());
    assert_eq!(invalid.status.code(), Some(3));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"protocol": "bosco", "n": 4, "f": 1, "b": 1, "inputs": "1,1,1"}"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    let a = report(&choreo(&["enumerate", "--config", cfg], dir.path()));
    assert_eq!(a["spec"]["n"], 4);
    let b = report(&choreo(&["enumerate", "--config", cfg, "--inputs", "0,0,1"], dir.path()));
    assert_eq!(b["spec"]["inputs"], "0,0,1");
    assert_eq!(b["spec"]["n"], 4);

    std::fs::write(dir.path().join("bad.json"), r#"{"protocl": "bosco"}"#).unwrap();
    let bad = choreo(&["enumerate", "--config", dir.path().join("bad.json").to_str().unwrap()], dir.path());
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_choreo"))
        .args(["simulate", "--protocol", "bosco"])
        .env("CHOREO_SEED", "42")
        .output()
        .unwrap();
    let header: Json = serde_json::from_str(String::from_utf8(out.stdout).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(header["seed"], 42);
    let flag = choreo(&["simulate", "--protocol", "bosco", "--seed", "7"], dir.path());
    let header: Json = serde_json::from_str(String::from_utf8(flag.stdout).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(header["seed"], 7);
}

#[test]
fn simulate_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    let t1 = dir.path().join("a.jsonl");
    let t2 = dir.path().join("b.jsonl");
    for t in [&t1, &t2] {
        let out = choreo(&["simulate", "--protocol", "seqpaxos", "--seed", "9", "--align", "--out", t.to_str().unwrap()], dir.path());
        assert_eq!(out.status.code(), Some(0));
        let r = report(&out);
        assert_eq!(r["align_ok"], true);
        assert_eq!(r["in_denotation"], true);
    }
    let text = std::fs::read_to_string(&t1).unwrap();
    assert_eq!(text, std::fs::read_to_string(&t2).unwrap());

    let replay = choreo(&["replay", t1.to_str().unwrap()], dir.path());
    assert_eq!(replay.status.code(), Some(0));
    let r = report(&replay);
    assert_eq!(r["permissible"], true);
    assert_eq!(r["completed"], true);

    // drop the first label: the run blocks somewhere later
    let mut lines: Vec<&str> = text.lines().collect();
    lines.remove(1);
    let cut = dir.path().join("cut.jsonl");
    std::fs::write(&cut, lines.join("\n")).unwrap();
    let blocked = choreo(&["replay", cut.to_str().unwrap()], dir.path());
    assert_eq!(blocked.status.code(), Some(1));
    let r = report(&blocked);
    assert_eq!(r["permissible"], false);
    assert!(r["failing_index"].as_u64().is_some());

    let forged = dir.path().join("forged.jsonl");
    let header: Json = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    let hash = header["program_hash"].as_str().unwrap();
    std::fs::write(&forged, text.replacen(hash, &"0".repeat(64), 1)).unwrap();
    assert_eq!(choreo(&["replay", forged.to_str().unwrap()], dir.path()).status.code(), Some(3));

    let garbage = dir.path().join("garbage.jsonl");
    std::fs::write(&garbage, "not json\n").unwrap();
    assert_eq!(choreo(&["replay", garbage.to_str().unwrap()], dir.path()).status.code(), Some(3));
}

#[test]
fn aligned_replay_reaches_the_same_output() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.jsonl");
    let aligned = dir.path().join("aligned.jsonl");
    for (path, extra) in [(&raw, None), (&aligned, Some("--align"))] {
        let mut args = vec!["simulate", "--protocol", "bosco", "--iterations", "1", "--seed", "3", "--out", path.to_str().unwrap()];
        args.extend(extra);
        assert_eq!(choreo(&args, dir.path()).status.code(), Some(0));
    }
    let a = report(&choreo(&["replay", raw.to_str().unwrap()], dir.path()));
    let b = report(&choreo(&["replay", aligned.to_str().unwrap()], dir.path()));
    assert_eq!(a["output"], b["output"]);
    assert_eq!(a["permissible"], true);
    assert_eq!(b["permissible"], true);
}

#[test]
fn dump_channels_adds_channel_states() {
    let dir = tempfile::tempdir().unwrap();
    let out = choreo(&["simulate", "--protocol", "simplevote", "--dump-channels"], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        let j: Json = serde_json::from_str(line).unwrap();
        assert!(j["channel"]["fs"].is_array());
    }
}
