//! End-to-end runs of the `monres` binary: exit codes, JSON output and
//! trace reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const WORKED: &str = r#"{
    "field": {"p": 2, "m": 1},
    "tau": 1,
    "e": 1,
    "coefficients": {"2": [[3, 3, [1]], [3, 2, [1]]]},
    "monomial": {"alpha": 4, "beta": 2, "level": 2},
    "divisors": {"x": {"age": 1}, "y": {"age": 2}}
}"#;

const POINT_ONLY: &str = r#"{
    "field": {"p": 2},
    "tau": 1,
    "e": 1,
    "coefficients": {"2": [[1, 3, [1]]]},
    "monomial": {"alpha": 2, "beta": 0, "level": 2},
    "divisors": {"x": {"age": 1}}
}"#;

const TAU0: &str = r#"{"tau": 0, "monomial": {"level": 4}, "components": [{"id": 1, "multiplicity": 2}, {"id": 2, "multiplicity": 3}]}"#;
const TAU2: &str = r#"{"tau": 2, "field": {"p": 2}, "e1": 1, "e2": 1, "h2": {"2": [[4, 0, [1]]]}, "monomial": {"alpha": 6, "level": 2}}"#;

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn monres(args: &[&str], file: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monres")).args(args).arg(file).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn validate_accepts_and_rejects() {
    let dir = TempDir::new().unwrap();
    let ok = monres(&["validate"], &write(&dir, "w.json", WORKED));
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok)["tau"], 1);

    let bad = monres(&["validate"], &write(&dir, "b.json", &WORKED.replace(r#", "level": 2"#, "")));
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("/monomial/level"));

    let t3 = monres(&["validate"], &write(&dir, "t3.json", r#"{"tau": 3}"#));
    assert_eq!(t3.status.code(), Some(2));

    let garbage = monres(&["validate"], &write(&dir, "g.json", "{not json"));
    assert_eq!(garbage.status.code(), Some(2));

    let missing = monres(&["validate"], &dir.path().join("absent.json"));
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn invariants_of_worked_case() {
    let dir = TempDir::new().unwrap();
    let out = monres(&["invariants"], &write(&dir, "w.json", WORKED));
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["shape"], "both_curves");
    assert_eq!(v["invariants"]["inv_mon"]["config"], "C4");
    assert_eq!(v["invariants"]["H"], serde_json::json!(["5/2", "3/2", "1/1"]));
}

#[test]
fn blowup_with_explicit_center() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "w.json", WORKED);
    let chosen = json(&monres(&["blowup"], &file));
    assert_eq!(chosen["center"], "curve_x");
    assert_eq!(monres(&["blowup", "--center", "point"], &file).status.code(), Some(2));
    let point = monres(&["blowup", "--center", "point"], &write(&dir, "p.json", POINT_ONLY));
    assert_eq!(point.status.code(), Some(0));
    let v = json(&point);
    assert_eq!(v["center"], "point");
    // the y-chart origin and one x-chart point per element of F_2
    assert_eq!(v["outcomes"].as_array().unwrap().len(), 3);
}

#[test]
fn resolve_exit_codes() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "w.json", WORKED);
    let done = monres(&["resolve"], &file);
    assert_eq!(done.status.code(), Some(0));
    assert_eq!(json(&done)["breaches"], serde_json::json!([]));

    let capped = monres(&["resolve", "--max-depth", "0"], &file);
    assert_eq!(capped.status.code(), Some(4));
    assert_eq!(json(&capped)["depth_capped"], true);

    let t0 = monres(&["resolve"], &write(&dir, "t0.json", TAU0));
    assert_eq!(t0.status.code(), Some(0));
    let t2 = monres(&["resolve"], &write(&dir, "t2.json", TAU2));
    assert_eq!(t2.status.code(), Some(0));
    assert_eq!(json(&t2)["steps"], 3);
}

#[test]
fn gamma_needs_divisor_only_state() {
    let dir = TempDir::new().unwrap();
    let out = monres(&["gamma"], &write(&dir, "t0.json", TAU0));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["gamma"], serde_json::json!([-2, "5/4", [1, 2]]));
    assert_eq!(monres(&["gamma"], &write(&dir, "w.json", WORKED)).status.code(), Some(2));
}

#[test]
fn oracle_agrees_on_worked_case() {
    let dir = TempDir::new().unwrap();
    let out = monres(&["oracle-support", "--box", "5"], &write(&dir, "w.json", WORKED));
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["agrees"], true);
    assert_eq!(v["box_field"]["m"], 3);
}

#[test]
fn traces_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "w.json", WORKED);
    let run = |name: &str| {
        let trace = dir.path().join(name);
        let out = monres(&["resolve", "--trace", trace.to_str().unwrap()], &file);
        assert_eq!(out.status.code(), Some(0));
        fs::read(trace).unwrap()
    };
    let (a, b) = (run("a.jsonl"), run("b.jsonl"));
    assert_eq!(a, b);

    let lines: Vec<Value> = String::from_utf8(a).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["event"], "node");
    let manifest = lines.last().unwrap();
    assert_eq!(manifest["event"], "manifest");
    assert_eq!(manifest["breaches"], serde_json::json!([]));
}
