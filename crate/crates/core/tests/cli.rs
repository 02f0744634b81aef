use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rdmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdmc")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let o = rdmc(&full);
    (serde_json::from_slice(&o.stdout).unwrap(), o.status.code().unwrap())
}

fn build(path: &Path) {
    let o = rdmc(&["table", "build", "--delta", "1/20", "--iters", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn exact_tail_text_and_json() {
    let o = rdmc(&["oracle", "tail", "--weights", "1,1,1,1", "--t", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1/16");
    let (v, code) = json(&["oracle", "tail", "--weights", "sqrt(1/6),sqrt(1/6),sqrt(1/6),sqrt(1/6),sqrt(1/6),sqrt(1/6)", "--t", "1", "--mode", "ge"]);
    assert_eq!(code, 0);
    assert_eq!(v["probability"], "7/64");
}

#[test]
fn vector_and_elimination_commands() {
    let (v, code) = json(&["oracle", "eliminate", "--weights", "3,2,2,1,1,1", "--m", "2", "--t", "1/2"]);
    assert_eq!(code, 0, "{v}");
    let direct = rdmc(&["oracle", "tail", "--weights", "3,2,2,1,1,1", "--t", "1/2"]);
    assert!(v.to_string().contains(&stdout(&direct)), "{v}");
    let o = rdmc(&["oracle", "highdim", "--vectors", "1/2;1/2;1/2;1/2", "--direction", "ge"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "5/8");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(rdmc(&["oracle", "tail", "--weights", "1,1", "--t", "1", "--mode", "bogus"]).status.code(), Some(2));
    assert_eq!(rdmc(&["oracle", "tail", "--weights", "1,0", "--t", "1"]).status.code(), Some(2));
    assert_eq!(rdmc(&["table", "query", "--table", "/nonexistent/t.rdmc", "--a", "0.5", "--x", "0"]).status.code(), Some(2));
    assert_eq!(rdmc(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(rdmc(&["--help"]).status.code(), Some(0));
}

#[test]
fn fixtures_campaign_passes() {
    let (v, code) = json(&["verify", "fixtures"]);
    assert_eq!(code, 0);
    assert_eq!(v["status"], "pass");
    assert_eq!(v["summary"]["failed"], 0);
}

#[test]
fn coarse_table_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t20.rdmc");
    build(&path);
    let table = path.to_str().unwrap();
    let (v, code) = json(&["table", "query", "--table", table, "--a", "0.5", "--x", "0.5"]);
    assert_eq!(code, 0);
    let d = v["value"].as_f64().unwrap();
    assert!(d > 0.0 && d <= 5.0 / 16.0, "{d}");
    // a 1/20 grid is far too coarse for the stash and the mesh campaigns
    assert_eq!(rdmc(&["table", "verify-stash", "--table", table]).status.code(), Some(1));
    let o = rdmc(&["verify", "a1", "--table", table]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("too coarse"));
    let (v, code) = json(&["verify", "a1", "--table", table, "--delta", "0.05"]);
    assert_eq!(v["status"], "too_weak");
    assert_eq!(code, 1);
    assert!(v["summary"]["min_margin"].as_f64().unwrap() < 0.0);
}

#[test]
fn corrupted_table_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t20.rdmc");
    build(&path);
    let mut bytes = std::fs::read(&path).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x40;
    std::fs::write(&path, bytes).unwrap();
    let o = rdmc(&["table", "query", "--table", path.to_str().unwrap(), "--a", "0.5", "--x", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("checksum"));
}

#[test]
fn walk_and_chain_commands() {
    let o = rdmc(&["walk", "prob", "--set", "1,1,1,1", "--x", "sqrt(2)"]);
    assert_eq!(stdout(&o), "3/4");
    let o = rdmc(&["chain", "f", "--k", "2", "--t", "10"]);
    assert_eq!(stdout(&o), "462");
    let (v, code) = json(&["walk", "lemma", "--set", "1,1,1,1", "--x", "3/2"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["status"], "pass");
    let (v, code) = json(&["--seed", "7", "walk", "sim", "--set", "1,1,1,1", "--x", "sqrt(2)", "--trials", "20000"]);
    assert_eq!(code, 0, "{v}");
    let est = v["estimate"].as_f64().unwrap();
    assert!((est - 0.75).abs() < 0.02, "{est}");
}
