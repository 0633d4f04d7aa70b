use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bulab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bulab")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn records(text: &str) -> Vec<Value> {
    text.lines().map(|l| serde_json::from_str(l).expect("JSON line")).collect()
}

fn without_clock(mut v: Value) -> String {
    v.as_object_mut().expect("object").remove("wall_clock_s");
    v.to_string()
}

fn numberop_into(path: &Path, format: &str) -> Output {
    let p = path.to_str().unwrap();
    bulab(&["run", "verify-numberop", "--n", "2", "--m", "1", "--seed", "3", "--out", p, "--format", format])
}

#[test]
fn numberop_commutator_is_one() {
    let o = bulab(&["run", "verify-numberop", "--n", "2", "--m", "1", "--seed", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let recs = records(&String::from_utf8(o.stdout).unwrap());
    let first = &recs[0];
    assert_eq!(first["experiment"], "verify-numberop");
    assert_eq!(first["measured"].as_f64(), Some(1.0));
    assert_eq!(first["pass"], true);
    assert!(recs.iter().all(|r| r["pass"] != false));
}

#[test]
fn reruns_are_identical_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    assert_eq!(code(&numberop_into(&a, "jsonl")), 0);
    assert_eq!(code(&numberop_into(&b, "jsonl")), 0);
    let ra: Vec<String> = records(&fs::read_to_string(&a).unwrap()).into_iter().map(without_clock).collect();
    let rb: Vec<String> = records(&fs::read_to_string(&b).unwrap()).into_iter().map(without_clock).collect();
    assert!(!ra.is_empty());
    assert_eq!(ra, rb);
}

#[test]
fn csv_appends_keep_a_single_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("runs.csv");
    assert_eq!(code(&numberop_into(&path, "csv")), 0);
    assert_eq!(code(&numberop_into(&path, "csv")), 0);
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("experiment,")).count(), 1);
    let o = bulab(&["report", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = String::from_utf8(o.stdout).unwrap();
    assert_eq!(table.lines().filter(|l| l.starts_with("verify-numberop")).count(), text.lines().count() - 1);
}

#[test]
fn report_of_empty_file_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.jsonl");
    fs::write(&path, "").unwrap();
    assert_eq!(code(&bulab(&["report", path.to_str().unwrap()])), 0);
}

#[test]
fn report_flags_failing_records() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("runs.jsonl");
    assert_eq!(code(&numberop_into(&path, "jsonl")), 0);
    let text = fs::read_to_string(&path).unwrap().replacen("\"pass\":true", "\"pass\":false", 1);
    fs::write(&path, text).unwrap();
    let o = bulab(&["report", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8(o.stdout).unwrap().contains("FAIL"));
}

#[test]
fn report_rejects_mixed_formats_by_line() {
    let dir = tempfile::tempdir().unwrap();
    let (j, c) = (dir.path().join("a.jsonl"), dir.path().join("b.csv"));
    assert_eq!(code(&numberop_into(&j, "jsonl")), 0);
    assert_eq!(code(&numberop_into(&c, "csv")), 0);
    let first_json = fs::read_to_string(&j).unwrap().lines().next().unwrap().to_string();
    let csv_text = fs::read_to_string(&c).unwrap();

    let mixed = dir.path().join("mixed.txt");
    fs::write(&mixed, format!("{first_json}\n{csv_text}")).unwrap();
    let o = bulab(&["report", mixed.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8(o.stderr).unwrap().contains("line 2"));

    let mut lines: Vec<&str> = csv_text.lines().collect();
    lines.insert(2, &first_json);
    fs::write(&mixed, lines.join("\n")).unwrap();
    let o = bulab(&["report", mixed.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8(o.stderr).unwrap().contains("line 3"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&bulab(&["run", "no-such-experiment", "--seed", "1"])), 2);
    assert_eq!(code(&bulab(&["run", "verify-numberop"])), 2);
    assert_eq!(code(&bulab(&["report", "/nonexistent/records.jsonl"])), 2);
    assert_eq!(code(&bulab(&[])), 2);
}
