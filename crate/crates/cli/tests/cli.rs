use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cavity(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavity")).args(args).current_dir(dir).output().unwrap()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn workdir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("k3.col"), "p edge 3 3\ne 1 2\ne 2 3\ne 1 3\n").unwrap();
    std::fs::write(dir.path().join("f.cnf"), "p cnf 3 2\n1 -2 3 0\n-1 2 3 0\n").unwrap();
    std::fs::write(dir.path().join("unsat.cnf"), "p cnf 1 2\n1 1 1 0\n-1 -1 -1 0\n").unwrap();
    dir
}

#[test]
fn encode_vertex_cover_reports_audit() {
    let dir = workdir();
    let out = cavity(dir.path(), &["--json", "encode", "--problem", "vertex-cover", "--in", "k3.col", "--k", "2"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["artifact"], "encoding");
    assert_eq!(v["weights"].as_array().unwrap().len(), 6);
    assert_eq!(v["cost_audit"]["formula"], "n+m");
    assert_eq!(v["cost_audit"]["expected"], 6);
    assert_eq!(v["tool"], "cavity");
    assert_eq!(v["config"]["input"], "k3.col");
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn verify_3sat_agrees() {
    let dir = workdir();
    let out = cavity(dir.path(), &["--json", "verify", "--problem", "3sat", "--in", "f.cnf"]);
    assert!(out.status.success());
    assert_eq!(json_of(&out)["agreement"], true);
}

#[test]
fn usage_errors_exit_2() {
    let dir = workdir();
    let out = cavity(dir.path(), &["encode", "--problem", "clique", "--in", "k3.col"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--k"));
    let out = cavity(dir.path(), &["encode", "--problem", "hexagon", "--in", "k3.col", "--k", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_and_malformed_inputs() {
    let dir = workdir();
    let out = cavity(dir.path(), &["encode", "--problem", "mis", "--in", "nope.col", "--k", "1"]);
    assert_eq!(out.status.code(), Some(5));
    std::fs::write(dir.path().join("bad.col"), "p edge 2 1\ne 1 7\n").unwrap();
    let out = cavity(dir.path(), &["encode", "--problem", "mis", "--in", "bad.col", "--k", "1"]);
    assert_eq!(out.status.code(), Some(6));
}

#[test]
fn oracle_exit_code_tracks_feasibility() {
    let dir = workdir();
    let out = cavity(dir.path(), &["oracle", "--problem", "3sat", "--in", "f.cnf"]);
    assert_eq!(out.status.code(), Some(0));
    let out = cavity(dir.path(), &["oracle", "--problem", "3sat", "--in", "unsat.cnf"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn encode_emit_solve_decode() {
    let dir = workdir();
    let d = dir.path();
    let args = ["encode", "--problem", "mis", "--in", "k3.col", "--k", "1", "--out", "enc.json"];
    assert!(cavity(d, &args).status.success());
    assert!(cavity(d, &["emit", "--in", "enc.json", "--out", "m.json"]).status.success());

    let m: Value = serde_json::from_str(&std::fs::read_to_string(d.join("m.json")).unwrap()).unwrap();
    assert_eq!(m["artifact"], "mattis");
    assert_eq!(m["atoms"], 6);
    assert_eq!(m["lambda"].as_array().unwrap().len(), 6);
    assert_eq!(m["origin"]["artifact"], "encoding");

    let out = cavity(d, &["--json", "solve", "--in", "m.json", "--restarts", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["witness"], true);
    assert_eq!(v["decoded"]["solution"]["type"], "vertices");

    let best = v["anneal"]["best"].as_str().unwrap().to_string();
    let out = cavity(d, &["--json", "decode", "--in", "m.json", "--assignment", &best]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["witness"], true);

    let out = cavity(d, &["decode", "--in", "enc.json", "--assignment", "000000"]);
    assert_eq!(out.status.code(), Some(1));
    let out = cavity(d, &["decode", "--in", "enc.json", "--assignment", "01"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compile_qubo_and_simulate() {
    let dir = workdir();
    let d = dir.path();
    std::fs::write(d.join("q.json"), r#"{"n":2,"Q":[[1,-2],[-2,1]]}"#).unwrap();
    let out = cavity(d, &["--json", "compile-qubo", "--in", "q.json", "--out", "c.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_of(&out);
    assert_eq!(v["cost_audit"]["holds"], true);
    assert_eq!(v["cost_audit"]["actual"]["weights"], 24);

    // A delta under the safe bound is refused.
    let out = cavity(d, &["compile-qubo", "--in", "q.json", "--delta", "1/2"]);
    assert_ne!(out.status.code(), Some(0));

    // Decoding a QUBO-length assignment reads the QUBO value directly.
    let out = cavity(d, &["--json", "decode", "--in", "c.json", "--assignment", "11"]);
    assert_eq!(json_of(&out)["qubo_value"], -2);

    std::fs::write(d.join("pair.json"), r#"{"weights":["[(2,1)]","[(3,1)]"],"target":"[(2,1),(3,1)]"}"#).unwrap();
    assert!(cavity(d, &["encode", "--problem", "subset-sum", "--in", "pair.json", "--out", "e.json"]).status.success());
    assert!(cavity(d, &["emit", "--in", "e.json", "--out", "pm.json"]).status.success());
    let out = cavity(d, &["--json", "simulate", "--in", "pm.json", "--time", "60", "--steps", "1200"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert!(v["max_norm_drift"].as_f64().unwrap() < 1e-9);
    assert_eq!(v["ground_states"][0], "11");
    assert!(v["success_probability"].as_f64().unwrap() > 0.9);
}

#[test]
fn json_output_matches_written_file() {
    let dir = workdir();
    let d = dir.path();
    let out = cavity(d, &["--json", "encode", "--problem", "3coloring", "--in", "k3.col", "--out", "c.json"]);
    assert!(out.status.success());
    assert_eq!(out.stdout, std::fs::read(d.join("c.json")).unwrap());
}
