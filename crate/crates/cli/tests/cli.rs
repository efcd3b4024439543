use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn emsr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emsr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = emsr(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn error_kind(args: &[&str]) -> String {
    let out = emsr(args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    let first = String::from_utf8_lossy(&out.stderr)
        .lines()
        .next()
        .unwrap_or("")
        .to_owned();
    let v: Value = serde_json::from_str(&first).expect("stderr starts with error JSON");
    v["error"].as_str().unwrap().to_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn encoded(bytes: usize) -> tempfile::TempDir {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in.bin");
    let data: Vec<u8> = (0..bytes).map(|i| (i * 7 + 3) as u8).collect();
    std::fs::write(&input, data).unwrap();
    ok_json(&["encode", p(&input), "--dir", p(&tmp.path().join("s"))]);
    tmp
}

#[test]
fn plan_ag_desk_values() {
    let v = ok_json(&["plan-ag", "--r", "3", "--eps", "0.5", "--u", "4"]);
    assert_eq!(v["q_min"], 1849);
    assert_eq!(v["delta_min"], 0.75);
    assert_eq!(
        error_kind(&["plan-ag", "--r", "3", "--eps", "0.5", "--u", "3"]),
        "InvalidU"
    );
}

#[test]
fn counting_commands() {
    let v = ok_json(&["count-full-weight", "--q", "5", "--N", "4", "--K", "2"]);
    assert_eq!(
        v["weight_distribution"],
        serde_json::json!([1, 0, 0, 16, 8])
    );
    assert_eq!(v["full_weight"], 8);
    let v = ok_json(&["fw-bound", "--genus", "0"]);
    assert_eq!(v["bound"], 7);
    assert_eq!(v["bound_holds"], true);
    assert_eq!(
        error_kind(&["fw-bound", "--genus", "3"]),
        "BoundInapplicable"
    );
}

#[test]
fn build_and_verify() {
    let v = ok_json(&["build"]);
    assert_eq!(v["modulus"], 107);
    assert_eq!(v["helpers"], 23);
    assert_eq!(v["sigma"].as_array().unwrap().len(), 25);
    let v = ok_json(&["verify-mds", "--sample", "20", "--seed", "4"]);
    assert_eq!(v["is_mds"], true);
    assert_eq!(v["subsets"], 20);
    assert_eq!(error_kind(&["build", "--p", "11"]), "FieldTooSmall");
}

#[test]
fn repair_with_explicit_helpers() {
    let tmp = encoded(1000);
    let dir = tmp.path().join("s");
    let before = std::fs::read(dir.join("shard_0000.emsr")).unwrap();
    ok_json(&["fail", "0", "--dir", p(&dir)]);

    let v = ok_json(&["repair", "0", "--dir", p(&dir)]);
    let compulsory: Vec<u64> = v["compulsory"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect();
    assert_eq!(compulsory.len(), 16);
    assert_eq!(std::fs::read(dir.join("shard_0000.emsr")).unwrap(), before);

    // Leave out one compulsory helper.
    ok_json(&["fail", "0", "--dir", p(&dir)]);
    let dropped = compulsory[0];
    let helpers: Vec<String> = (1..25u64)
        .filter(|&h| h != dropped)
        .map(|h| h.to_string())
        .collect();
    assert_eq!(
        error_kind(&[
            "repair",
            "0",
            "--dir",
            p(&dir),
            "--helpers",
            &helpers.join(",")
        ]),
        "MissingCompulsory"
    );
    // A full, valid explicit set.
    let free = (1..25u64).find(|h| !compulsory.contains(h)).unwrap();
    let helpers: Vec<String> = (1..25u64)
        .filter(|&h| h != free)
        .map(|h| h.to_string())
        .collect();
    let v = ok_json(&[
        "repair",
        "0",
        "--dir",
        p(&dir),
        "--helpers",
        &helpers.join(","),
    ]);
    assert_eq!(v["not_contacted"], serde_json::json!([free]));
    assert_eq!(v["verdict"]["pass"], true);
}

#[test]
fn tight_epsilon_reports_over_budget() {
    let tmp = encoded(100);
    let dir = tmp.path().join("s");
    ok_json(&["fail", "2", "--dir", p(&dir)]);
    let v = ok_json(&["repair", "2", "--dir", p(&dir), "--eps", "0"]);
    assert_eq!(v["verdict"]["pass"], false);
    assert_eq!(v["report"]["budget"], 64.0);
}

#[test]
fn missing_compulsory_shard_blocks_repair() {
    let tmp = encoded(100);
    let dir = tmp.path().join("s");
    let v = ok_json(&["repair", "3", "--dir", p(&dir)]);
    let q = v["compulsory"][0].as_u64().unwrap().to_string();
    ok_json(&["fail", "3", "--dir", p(&dir)]);
    ok_json(&["fail", &q, "--dir", p(&dir)]);
    assert_eq!(
        error_kind(&["repair", "3", "--dir", p(&dir)]),
        "MissingCompulsory"
    );
}

#[test]
fn decode_needs_enough_shards() {
    let tmp = encoded(3000);
    let dir = tmp.path().join("s");
    for b in ["4", "9", "16", "20"] {
        ok_json(&["fail", b, "--dir", p(&dir)]);
    }
    let out = tmp.path().join("out.bin");
    assert_eq!(
        error_kind(&["decode", "--dir", p(&dir), "--out", p(&out)]),
        "TooManyErasures"
    );
    assert_eq!(error_kind(&["fail", "4", "--dir", p(&dir)]), "MissingShard");
}

#[test]
fn corrupt_shards_are_reported() {
    let tmp = encoded(100);
    let dir = tmp.path().join("s");
    let path = dir.join("shard_0005.emsr");
    let mut bytes = std::fs::read(&path).unwrap();
    bytes[0] = b'X';
    std::fs::write(&path, &bytes).unwrap();
    let out = tmp.path().join("out.bin");
    assert_eq!(
        error_kind(&["decode", "--dir", p(&dir), "--out", p(&out)]),
        "CorruptShard"
    );

    bytes[0] = b'E';
    bytes.truncate(bytes.len() - 4);
    std::fs::write(&path, &bytes).unwrap();
    assert_eq!(
        error_kind(&["decode", "--dir", p(&dir), "--out", p(&out)]),
        "CorruptShard"
    );
}

#[test]
fn tampered_helper_is_detected_on_repair() {
    let tmp = encoded(100);
    let dir = tmp.path().join("s");
    let path = dir.join("shard_0007.emsr");
    let mut bytes = std::fs::read(&path).unwrap();
    let last = bytes.len() - 4;
    bytes[last] = if bytes[last] == 0 { 1 } else { 0 };
    std::fs::write(&path, &bytes).unwrap();
    ok_json(&["fail", "0", "--dir", p(&dir)]);
    assert_eq!(
        error_kind(&["repair", "0", "--dir", p(&dir)]),
        "NotACodeword"
    );
}

const CONFIG: &str = r#"{
    "inner": {"n": 5, "k": 2, "t": 3},
    "outer": {"q": 5, "N": 4, "K": 2},
    "epsilon": 0.5,
    "trials": 25,
    "seed": 42,
    "failure_policy": "round-robin",
    "helper_policy": "seeded-random"
}"#;

#[test]
fn simulate_writes_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, CONFIG).unwrap();
    let (csv, json) = (tmp.path().join("t.csv"), tmp.path().join("r.json"));
    let v = ok_json(&[
        "simulate",
        "--config",
        p(&cfg),
        "--csv",
        p(&csv),
        "--json",
        p(&json),
    ]);
    assert_eq!(v["summary"]["passed"], 25);
    assert_eq!(v["summary"]["max_helper_symbols"], 80);

    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "trial,failed,helpers,compulsory,max_helper_symbols,budget_symbols,pass"
    );
    assert_eq!(lines.next().unwrap(), "0,0,23,16,80,96,true");
    assert_eq!(lines.count(), 24);

    let first = std::fs::read(&json).unwrap();
    ok_json(&["simulate", "--config", p(&cfg), "--json", p(&json)]);
    assert_eq!(std::fs::read(&json).unwrap(), first);
}

#[test]
fn simulate_rejects_bad_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(
        &cfg,
        CONFIG.replace("\"seed\": 42,", "\"seed\": 42, \"speed\": 9,"),
    )
    .unwrap();
    assert_eq!(error_kind(&["simulate", "--config", p(&cfg)]), "BadConfig");
    std::fs::write(&cfg, "not json").unwrap();
    assert_eq!(error_kind(&["simulate", "--config", p(&cfg)]), "BadConfig");
    std::fs::write(&cfg, CONFIG.replace("\"q\": 5", "\"q\": 7")).unwrap();
    assert_eq!(error_kind(&["simulate", "--config", p(&cfg)]), "BadConfig");
}

#[test]
fn usage_errors_are_machine_readable() {
    assert_eq!(error_kind(&["repair"]), "BadArguments");
    assert_eq!(error_kind(&["nonsense"]), "BadArguments");
}
