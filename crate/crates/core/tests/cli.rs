//! The `uhs-lab` binary: exit statuses, determinism and replay.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uhs-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn uhs-lab")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("uhs-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

#[test]
fn gen_is_byte_identical() {
    let (a, b) = (scratch("a.prefix"), scratch("b.prefix"));
    for p in [&a, &b] {
        let out = run(&["gen", "--structure", "D", "--size", "500", "--out", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(x, y);
    assert!(x.starts_with(b"UHS v1 kind=D n=- seed=0 size=500\n"));

    let out = run(&["load", a.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn interval_antichain_passes() {
    let out = run(&["antichain", "--structure", "Q", "--family", "intervals", "--range", "-5..5", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["tool"], "uhs-lab");
    assert_eq!(r["version"], 1);
    let checks = r["checks"].as_array().unwrap();
    assert_eq!(checks.iter().filter(|c| c["name"] == "incompatible").count(), 55);
    assert!(checks.iter().all(|c| c["status"] == "pass"));
}

#[test]
fn integers_are_not_a_copy_of_q() {
    let out = run(&["check-copy", "--structure", "Q", "--set", "integers", "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let w = &json(&out)["checks"][0]["witnesses"][0];
    assert_eq!(w["base"], serde_json::json!([0, 1]));
    assert_eq!(w["x"], 3);
}

#[test]
fn replay_accepts_and_rejects() {
    let report = scratch("diag.json");
    let out = run(&["diagonal", "--format", "json", "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["verify", "--replay", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));

    let mut r: Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    r["checks"][0]["witnesses"][0]["a_n"] = 0.into();
    let forged = scratch("forged.json");
    std::fs::write(&forged, serde_json::to_vec(&r).unwrap()).unwrap();
    let out = run(&["verify", "--replay", forged.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_and_input_errors() {
    assert_eq!(run(&["gen", "--bogus"]).status.code(), Some(64));
    assert_eq!(run(&["gen", "--structure", "B(0)", "--size", "3"]).status.code(), Some(64));
    assert_eq!(run(&["suite", "11"]).status.code(), Some(64));

    let bad = scratch("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    assert_eq!(run(&["verify", "--replay", bad.to_str().unwrap()]).status.code(), Some(65));

    let prefix = scratch("bad.prefix");
    std::fs::write(&prefix, "UHS v1 kind=D n=- seed=0 size=3\n0 < 1\n1 < 2\nlabel 0 chain 0\nlabel 1 generic 0\nlabel 2 chain 1\n")
        .unwrap();
    let out = run(&["load", prefix.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(65));
    assert!(String::from_utf8_lossy(&out.stderr).contains("transitivity violated at (0,2)"));

    assert_eq!(run(&["load", scratch("missing.prefix").to_str().unwrap()]).status.code(), Some(74));
}

#[test]
fn omega_lift_is_refused() {
    let out = run(&["antichain", "--structure", "B(w)", "--family", "bn"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no countable maximal antichain"));
}

#[test]
fn help_lists_every_criterion() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for n in 1..=10 {
        assert!(text.contains(&format!("uhs-lab suite {n} ")), "criterion {n} missing from help");
    }
}

#[test]
fn reports_are_deterministic() {
    let args = ["partition", "--structure", "D", "--bound", "600", "--rows", "4", "--pieces", "2", "--format", "json"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
