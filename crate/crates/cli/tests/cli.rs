use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cplx")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cplx-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn analyze_text_proof() {
    let o = run(&["analyze", fixture("mult.trs").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("WORST_CASE(?, O(n^2))\n"));
    assert!(out.contains("* DT"));
    assert!(out.contains("* DGDecomposition"));
}

#[test]
fn analyze_writes_graph() {
    let dot = tmp("mult.dot");
    let o = run(&["analyze", fixture("mult.trs").to_str().unwrap(), "--proof", "none", "--dot-dg", dot.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("digraph"));
    assert!(text.contains("b#"));
}

#[test]
fn exponential_is_maybe() {
    let o = run(&["analyze", fixture("exp.trs").to_str().unwrap(), "--proof", "none", "--degree-max", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "MAYBE");
}

#[test]
fn json_proof_checks() {
    let o = run(&["analyze", fixture("mult.trs").to_str().unwrap(), "--proof", "json"]);
    let out = stdout(&o);
    let json = out.split_once('\n').unwrap().1;
    let path = tmp("mult.json");
    std::fs::write(&path, json).unwrap();
    let c = run(&["check", path.to_str().unwrap()]);
    assert_eq!(c.status.code(), Some(0));
    assert!(stdout(&c).starts_with("VALID"));

    let tampered = json.replacen("\"bound\": 2", "\"bound\": 1", 1);
    assert_ne!(tampered, json);
    std::fs::write(&path, tampered).unwrap();
    let c = run(&["check", path.to_str().unwrap()]);
    assert_eq!(c.status.code(), Some(1));
    assert!(stdout(&c).starts_with("INVALID"));
}

#[test]
fn oracle_table() {
    let o = run(&["oracle", fixture("mult.trs").to_str().unwrap(), "--size", "4", "--budget", "40"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "n\tvalue\n1\t0\n2\t0\n3\t1\n4\t3\n");
}

#[test]
fn errors_exit_two() {
    assert_eq!(run(&["analyze", "/nonexistent/x.trs"]).status.code(), Some(2));
    let bad = tmp("bad.trs");
    std::fs::write(&bad, "(VAR x y) (RULES f(x) -> g(y))").unwrap();
    let o = run(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    let junk = tmp("junk.json");
    std::fs::write(&junk, "{").unwrap();
    assert_eq!(run(&["check", junk.to_str().unwrap()]).status.code(), Some(2));
}
