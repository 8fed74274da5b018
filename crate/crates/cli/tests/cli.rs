use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn clmatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clmatch")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn config_args(gen: &Value) -> (String, String) {
    let c = &gen["config"];
    (c["weight_bits"].to_string(), c["num_reserves"].to_string())
}

const K22: &str = "2 4\n0 0\n0 1\n1 0\n1 1\n";

#[test]
fn solve_k22_seeded() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "k22.txt", K22);
    for backend in ["det", "comb"] {
        for seed in 0..5 {
            let v = json(&clmatch(&["solve", "--graph", s(&g), "--seed", &seed.to_string(), "--backend", backend]));
            assert_eq!(v["matching_size"], 2);
            assert_eq!(v["tape_restored"], true);
            assert_eq!(v["matching"].as_array().unwrap().len(), 2);
        }
    }
}

#[test]
fn solve_zero_tape_with_trace() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "k22.txt", K22);
    let gen = json(&clmatch(&["gen", "--family", "complete", "--n", "2", "--weight-mode", "all-equal"]));
    let bits = gen["tape_bits"].as_u64().unwrap() as usize;
    // pad to a whole number of hex digits; the remainder is scratch
    let zeros = "0".repeat(bits.div_ceil(4));
    let (b, r) = config_args(&gen);
    let v = json(&clmatch(&["solve", "--graph", s(&g), "--tape", &zeros, "--trace", "--weight-bits", &b, "--reserves", &r]));
    assert_eq!(v["matching_size"], 2);
    assert!(v["compressions"].as_u64().unwrap() >= 1);
    let trace = v["trace"].as_array().unwrap();
    let comps = trace.iter().filter(|e| e.get("Comp").is_some()).count();
    let decomps = trace.iter().filter(|e| e.get("Decomp").is_some()).count();
    assert_eq!(comps, decomps);
}

#[test]
fn solve_input_weights() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "k22.txt", K22);
    let w = write(&dir, "w.txt", "1 1 1 10\n");
    let v = json(&clmatch(&["solve", "--graph", s(&g), "--seed", "3", "--input-weights", s(&w)]));
    assert_eq!(v["input_weight"], 2);
    assert_eq!(v["matching"], serde_json::json!([[0, 1], [1, 0]]));
}

#[test]
fn solve_forced_fallback() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "p.txt", "3 3\n0 0\n1 0\n1 1\n");
    let v = json(&clmatch(&["solve", "--graph", s(&g), "--seed", "9", "--force-fallback"]));
    assert_eq!(v["fallback_fired"], true);
    assert_eq!(v["compressions"], 0);
    assert_eq!(v["matching_size"], 2);
}

#[test]
fn invalid_input_exits_1() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.txt", "2 1\n0 5\n");
    assert_eq!(clmatch(&["solve", "--graph", s(&bad), "--seed", "0"]).status.code(), Some(1));
    let g = write(&dir, "k22.txt", K22);
    assert_eq!(clmatch(&["solve", "--graph", s(&g), "--tape", "ff"]).status.code(), Some(1));
    assert_eq!(clmatch(&["solve", "--graph", s(&g)]).status.code(), Some(1));
    let missing = dir.path().join("missing.txt");
    assert_eq!(clmatch(&["oracle", "--graph", s(&missing)]).status.code(), Some(1));
}

#[test]
fn non_isolating_extract_exits_2() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "k22.txt", K22);
    let out = clmatch(&["extract", "--graph", s(&g), "--k", "2", "--weights", "0,0,0,0"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&clmatch(&["extract", "--graph", s(&g), "--k", "2", "--weights", "1,2,4,8"]));
    assert_eq!(v["matching"], serde_json::json!([[0, 1], [1, 0]]));
    assert_eq!(v["weight"], 6);
}

#[test]
fn oracle_agrees_with_extract() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "k22.txt", K22);
    let v = json(&clmatch(&["oracle", "--graph", s(&g), "--weights", "1,2,4,8", "--all"]));
    assert_eq!(v["max_size"], 2);
    assert_eq!(v["matchings"].as_array().unwrap().len(), 7);
    let k2 = &v["by_size"][2];
    assert_eq!(k2["count"], 2);
    assert_eq!(k2["min_weight"], 6);
    assert_eq!(k2["isolated"], true);
}

#[test]
fn residual_reports() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "k22.txt", K22);
    let v = json(&clmatch(&["residual", "--graph", s(&g), "--weights", "1,2,4,8", "--matching", "0-1,1-0", "--dump"]));
    assert_eq!(v["maximum"], true);
    assert_eq!(v["min_st_path"], Value::Null);
    // the only cycle swaps to the other perfect matching: 1 + 8 − 2 − 4
    assert_eq!(v["min_cycle_weight"], 3);
    let text = clmatch(&["--text", "residual", "--graph", s(&g), "--weights", "1,2,4,8", "--dump"]);
    assert!(text.status.success());
    assert!(String::from_utf8_lossy(&text.stdout).contains("maximum: false"));
}

#[test]
fn lossy_finds_witness() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "k22.txt", K22);
    for mode in ["exhaustive", "random"] {
        let v = json(&clmatch(&["lossy", "--graph", s(&g), "--mode", mode, "--samples", "200", "--seed", "5"]));
        assert_eq!(v["matching"].as_array().unwrap().len(), 2);
        assert!(v["roundtrip_failures_found"].as_u64().unwrap() >= 1);
        assert_eq!(v["witness_bits"].as_str().unwrap().len(), 20);
    }
}

#[test]
fn gen_writes_parseable_graph() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("g.txt");
    let v = json(&clmatch(&["gen", "--family", "path", "--n", "3", "--seed", "1", "--out", s(&out)]));
    assert_eq!(fs::read_to_string(&out).unwrap(), v["graph"].as_str().unwrap());
    let (b, r) = config_args(&v);
    let hex = v["tape_hex"].as_str().unwrap();
    let solved = json(&clmatch(&["solve", "--graph", s(&out), "--tape", hex, "--weight-bits", &b, "--reserves", &r]));
    assert_eq!(solved["matching_size"], 3);
}

#[test]
fn testsuite_passes() {
    let out = clmatch(&["--text", "testsuite", "--max-n", "3", "--per-size", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}
