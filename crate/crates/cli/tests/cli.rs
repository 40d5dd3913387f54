use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use twistq::codes::repetition_cyclic;
use twistq::io::{write_alist, write_dense01};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_twistq"))
}

fn fixture(dir: &Path, l: usize) -> PathBuf {
    let p = dir.join(format!("rep{l}.alist"));
    fs::write(&p, write_alist(&repetition_cyclic(l))).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn build_is_deterministic_and_format_independent() {
    let tmp = TempDir::new().unwrap();
    let alist = fixture(tmp.path(), 3);
    let dense = tmp.path().join("rep3.txt");
    fs::write(&dense, write_dense01(&repetition_cyclic(3))).unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let c = tmp.path().join("c");
    assert_eq!(code(&run(&["build", "--x", alist.to_str().unwrap(), "--out", a.to_str().unwrap()])), 0);
    assert_eq!(code(&run(&["build", "--x", alist.to_str().unwrap(), "--out", b.to_str().unwrap()])), 0);
    assert_eq!(fs::read(a.join("build.json")).unwrap(), fs::read(b.join("build.json")).unwrap());
    assert!(a.join("build.meta.json").exists());
    let o = run(&["build", "--x", dense.to_str().unwrap(), "--format", "dense01", "--out", c.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let ja = read_json(&a.join("build.json"));
    let jc = read_json(&c.join("build.json"));
    assert_eq!(ja["result"], jc["result"]);
    assert_eq!(ja["result"]["qubits"], serde_json::json!([18, 18, 18]));
    assert_eq!(ja["config"]["seed"], 0);
}

#[test]
fn malformed_alist_exits_two() {
    let tmp = TempDir::new().unwrap();
    let p = tmp.path().join("bad.alist");
    fs::write(&p, "3 2\n2 3\n1 1 1\n").unwrap();
    let o = run(&["build", "--x", p.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
    let missing = run(&["build", "--x", "/nonexistent/h.alist"]);
    assert_eq!(code(&missing), 2);
}

#[test]
fn verify_passes_and_negative_control_fails() {
    let tmp = TempDir::new().unwrap();
    let x = fixture(tmp.path(), 2);
    let out = tmp.path().join("v");
    let o = run(&["verify", "--x", x.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let v = read_json(&out.join("verify.json"));
    assert_eq!(v["result"]["ok"], true);
    let bad = run(&["verify", "--x", x.to_str().unwrap(), "--adjacency", "symmetrized"]);
    assert_eq!(code(&bad), 1);
    let j: Value = serde_json::from_slice(&bad.stdout).unwrap();
    let closure = j["result"]["checks"].as_array().unwrap().iter().find(|c| c["name"] == "commutation closure").unwrap();
    assert_eq!(closure["status"], "fail");
}

#[test]
fn distance_budget_exit_code() {
    let tmp = TempDir::new().unwrap();
    let x = fixture(tmp.path(), 3);
    let o = run(&["distance", "--x", x.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let j: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["result"]["copies"][0]["d_z"]["weight"], 3);
    let o = run(&["distance", "--x", x.to_str().unwrap(), "--budget", "1"]);
    assert_eq!(code(&o), 3);
    let j: Value = serde_json::from_slice(&o.stdout).unwrap();
    for c in j["result"]["copies"].as_array().unwrap() {
        assert_eq!(c["d_z"]["status"], "budget_exhausted");
        assert_eq!(c["d_x"]["status"], "budget_exhausted");
    }
}

#[test]
fn simulate_dense_and_replay() {
    let tmp = TempDir::new().unwrap();
    let x = fixture(tmp.path(), 2);
    let out = tmp.path().join("s");
    let o = run(&["simulate", "--x", x.to_str().unwrap(), "--trials", "100", "--seed", "11", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(&out.join("simulate.json"));
    let exact = s["result"]["exact_rho"]["0"].as_f64().unwrap();
    assert!((exact - 0.75).abs() < 1e-12);
    let hits = s["result"]["rho_counts"]["0"].as_u64().unwrap_or(0) as f64;
    let sigma = (0.75f64 * 0.25 / 100.0).sqrt();
    assert!((hits / 100.0 - 0.75).abs() <= 3.0 * sigma);
    assert!(s["result"]["min_fidelity_to_expected"].as_f64().unwrap() >= 1.0 - 1e-9);

    let rec = out.join("transcripts").join("trial-0004.json");
    let replay = tmp.path().join("r");
    let o = run(&["simulate", "--x", x.to_str().unwrap(), "--seed", "15", "--replay", rec.to_str().unwrap(), "--out", replay.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(&rec).unwrap(), fs::read(replay.join("transcripts").join("trial-0000.json")).unwrap());
}

#[test]
fn dense_cap_suggests_ledger() {
    let tmp = TempDir::new().unwrap();
    let x = fixture(tmp.path(), 5);
    let o = run(&["simulate", "--x", x.to_str().unwrap(), "--trials", "2"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("ledger"));
    let o = run(&["simulate", "--x", x.to_str().unwrap(), "--trials", "2", "--backend", "ledger"]);
    assert_eq!(code(&o), 0);
    let j: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["result"]["transcripts"].as_array().unwrap().len(), 2);
    assert!(j["result"]["summary"]["min_fidelity_to_expected"].is_null());
}

#[test]
fn ledger_replay_is_identical() {
    let tmp = TempDir::new().unwrap();
    let x = fixture(tmp.path(), 3);
    let out = tmp.path().join("l");
    let args = ["simulate", "--x", x.to_str().unwrap(), "--backend", "ledger", "--trials", "1", "--seed", "9", "--out", out.to_str().unwrap()];
    assert_eq!(code(&run(&args)), 0);
    let rec = out.join("transcripts").join("trial-0000.json");
    let again = tmp.path().join("l2");
    let o = run(&["simulate", "--x", x.to_str().unwrap(), "--backend", "ledger", "--seed", "9", "--replay", rec.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(&rec).unwrap(), fs::read(again.join("transcripts").join("trial-0000.json")).unwrap());
}

#[test]
fn fountain_intersections_report() {
    let tmp = TempDir::new().unwrap();
    let x = fixture(tmp.path(), 2);
    let xs = x.to_str().unwrap();
    let f = run(&["fountain", "--x", xs]);
    assert_eq!(code(&f), 0);
    let j: Value = serde_json::from_slice(&f.stdout).unwrap();
    assert_eq!(j["result"]["certificate"]["pairs"].as_array().unwrap().len(), 1);
    let i = run(&["intersections", "--x", xs]);
    assert_eq!(code(&i), 0);
    let j: Value = serde_json::from_slice(&i.stdout).unwrap();
    assert_eq!(j["result"]["dims"], serde_json::json!([2, 2, 1]));
    let r = run(&["report", "--x", xs]);
    assert_eq!(code(&r), 0);
    let j: Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(j["result"]["rates"]["k_tilde"], 3);
    assert_eq!(j["result"]["untwisted_gsd"]["gsd"], 64.0);
    let s = run(&["stabilizers", "--x", xs]);
    assert_eq!(code(&s), 0);
    let j: Value = serde_json::from_slice(&s.stdout).unwrap();
    assert_eq!(j["result"]["n"], 24);
}

#[test]
fn usage_errors() {
    assert_eq!(code(&run(&["build"])), 2);
    let tmp = TempDir::new().unwrap();
    let x = fixture(tmp.path(), 2);
    assert_eq!(code(&run(&["build", "--x", x.to_str().unwrap(), "--dense-cap", "40"])), 2);
    assert_eq!(code(&run(&["build", "--x", x.to_str().unwrap(), "--adjacency", "diagonal"])), 2);
}
