use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use quasistable::fixtures::{COMPLEMENTARY_TABLE_JSON, M1_JSON};
use quasistable::format::load_market;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(dir: &Path, args: &[&str]) -> Run {
    let Output { status, stdout, stderr } = Command::new(env!("CARGO_BIN_EXE_quasistable"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: status.code().unwrap_or(-1),
        stdout: String::from_utf8(stdout).unwrap(),
        stderr: String::from_utf8(stderr).unwrap(),
    }
}

fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("m1.json"), M1_JSON).unwrap();
    std::fs::write(dir.path().join("comp.json"), COMPLEMENTARY_TABLE_JSON).unwrap();
    dir
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

#[test]
fn check_reports_predicates() {
    let d = workspace();
    let r = run(d.path(), &["check", "-m", "m1.json", "-a", "b,c"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("stable: true"));
    assert!(r.stdout.contains("blocking-contracts: {}"));

    let r = run(d.path(), &["check", "-m", "m1.json", "-a", "a,b"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("individually-rational: false"));
    assert!(r.stdout.contains("quasi-stable: false"));
}

#[test]
fn input_errors_exit_two() {
    let d = workspace();
    let r = run(d.path(), &["check", "-m", "m1.json", "-a", "zz"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("\"zz\""));

    std::fs::write(path(&d, "bad.json"), "{\n  \"workers\": [\n").unwrap();
    let r = run(d.path(), &["enumerate", "-m", "bad.json"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 3, column 0"), "{}", r.stderr);

    assert_eq!(run(d.path(), &["frobnicate"]).code, 2);
    assert_eq!(run(d.path(), &["enumerate", "-m", "missing.json"]).code, 2);
}

#[test]
fn verify_prefs_flags_complementarity() {
    let d = workspace();
    let r = run(d.path(), &["verify-prefs", "-m", "m1.json"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("16 checks, 0 failed"));

    let r = run(d.path(), &["verify-prefs", "-m", "comp.json"]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.contains("f substitutability FAIL Y={x,y} Z={x}"));
    assert!(r.stdout.contains("f law-of-aggregate-demand pass"));
}

#[test]
fn enumerate_and_certify() {
    let d = workspace();
    let r = run(d.path(), &["enumerate", "-m", "m1.json"]);
    assert!(r.stdout.contains("quasi-stable-allocations: {} {b} {c} {a,d} {b,c}"));
    assert!(r.stdout.contains("stable-allocations: {a,d} {b,c}"));

    let r = run(d.path(), &["certify", "-m", "m1.json"]);
    assert_eq!(r.code, 0);
    assert!(!r.stdout.contains("FAIL"));

    let r = run(d.path(), &["certify", "-m", "comp.json"]);
    assert_eq!(r.code, 1);
}

#[test]
fn lattice_and_tarski() {
    let d = workspace();
    let r = run(d.path(), &["lattice", "-m", "m1.json", "--join", "a,d", "b,c"]);
    assert_eq!(r.stdout.trim(), "{a,d} ∨ {b,c} = {a,d}");
    let r = run(d.path(), &["lattice", "-m", "m1.json", "--meet", "a,d", "b,c"]);
    assert_eq!(r.stdout.trim(), "{a,d} ∧ {b,c} = {b,c}");
    let r = run(d.path(), &["tarski", "-m", "m1.json", "-a", ""]);
    assert!(r.stdout.ends_with("fixed-point: {b,c}\n"), "{}", r.stdout);
}

#[test]
fn single_strategy_trace() {
    let d = workspace();
    let r = run(d.path(), &["da", "-m", "m1.json", "-a", "", "--strategy", "single"]);
    assert_eq!(
        r.stdout,
        "strategy single\nstart {}\nt=1 X={b} Z={b} Y={b}\nt=2 X={b,c} Z={c} Y={b,c}\noutcome {b,c}\n"
    );
    let r = run(d.path(), &["da", "-m", "m1.json", "-a", "a,b"]);
    assert_eq!(r.code, 2, "non quasi-stable start is rejected");
}

#[test]
fn dump_writes_json() {
    let d = workspace();
    let r = run(
        d.path(),
        &[
            "--dump",
            "trace.json",
            "da",
            "-m",
            "m1.json",
            "-a",
            "b",
            "--strategy",
            "random",
            "--seed",
            "3",
        ],
    );
    assert_eq!(r.code, 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path(&d, "trace.json")).unwrap()).unwrap();
    assert_eq!(v["outcome"], serde_json::json!(["b", "c"]));
    assert_eq!(v["strategy"], "random(seed=3)");
}

#[test]
fn dual_round_trips() {
    let d = workspace();
    assert_eq!(run(d.path(), &["dual", "-m", "m1.json", "-o", "d.json"]).code, 0);
    assert_eq!(run(d.path(), &["dual", "-m", "d.json", "-o", "dd.json"]).code, 0);
    let m = load_market(path(&d, "m1.json")).unwrap();
    let dd = load_market(path(&d, "dd.json")).unwrap();
    assert_eq!(m, dd);
    let r = run(d.path(), &["da", "-m", "d.json", "-a", ""]);
    assert!(r.stdout.ends_with("outcome {a,d}\n"), "{}", r.stdout);
}

#[test]
fn gen_is_seeded() {
    let d = workspace();
    let args = ["gen", "--workers", "3", "--firms", "2", "--seed", "11"];
    let a = run(d.path(), &args);
    let b = run(d.path(), &args);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    let c = run(d.path(), &["gen", "--workers", "3", "--firms", "2", "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout);

    assert_eq!(
        run(
            d.path(),
            &["gen", "--workers", "3", "--firms", "2", "--seed", "11", "-o", "g.json"]
        )
        .code,
        0
    );
    let r = run(d.path(), &["verify-prefs", "-m", "g.json"]);
    assert_eq!(r.code, 0);
}

#[test]
fn scenario_runs_from_file() {
    let d = workspace();
    let scenario = serde_json::json!({
        "market": "m1.json",
        "event": {"kind": "remove-workers", "workers": ["w2"]},
        "start": "worker-pessimal",
        "strategy": "single",
    });
    std::fs::write(path(&d, "s.json"), scenario.to_string()).unwrap();
    let r = run(d.path(), &["scenario", "-s", "s.json"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("outcome"), "{}", r.stdout);
}
