use std::path::PathBuf;
use std::process::{Command, Output};

fn formality(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_formality")).args(args).output().expect("binary runs")
}

fn spec(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("specs").join(name).to_string_lossy().into_owned()
}

fn scratch(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("formality-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn star_report_on_stdout() {
    let out = formality(&["star", "--spec", &spec("flat_r2.spec")]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["command"], "star");
    assert_eq!(v["star_product"]["coefficients"]["C2"]["<d1^2 | d2^2>"], "1/8");
}

#[test]
fn out_file_matches_stdout() {
    let path = scratch("connection.json", "");
    let to_file = formality(&["connection", "--spec", &spec("curved_r2.spec"), "--out", &path]);
    assert_eq!(to_file.status.code(), Some(0));
    assert!(to_file.stdout.is_empty());
    let to_stdout = formality(&["connection", "--spec", &spec("curved_r2.spec")]);
    assert_eq!(std::fs::read(&path).unwrap(), to_stdout.stdout);
}

#[test]
fn single_suite() {
    let out = formality(&["check", "--spec", &spec("lie_r3.spec"), "--suite", "fedosov"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = v["checks"]["results"].as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["fedosov.flatness", "fedosov.resolution"]);
}

#[test]
fn validation_errors_exit_1() {
    let unknown = formality(&["check", "--spec", &spec("flat_r2.spec"), "--suite", "nope"]);
    assert_eq!(unknown.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("unknown suite"));

    let bad = scratch("bad.spec", "version = 1\ndimension = 2\nalpha[1,2] = x1 +\n");
    assert_eq!(formality(&["star", "--spec", &bad]).status.code(), Some(1));

    let missing = formality(&["star", "--spec", "/nonexistent/formality.spec"]);
    assert_eq!(missing.status.code(), Some(1));

    let no_group = formality(&["equivariance", "--spec", &spec("flat_r2.spec")]);
    assert_eq!(no_group.status.code(), Some(1));
}

#[test]
fn precondition_names_the_element() {
    let out = formality(&["equivariance", "--spec", &spec("broken_pm.spec")]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("precondition") && err.contains("-1 0 ; 0 -1"), "{err}");
}

#[test]
fn capacity_errors_exit_2() {
    let curved = scratch("curved_star.spec", "version = 1\ndimension = 2\ngamma[2,1,1] = x2\nalpha[1,2] = 1\n");
    assert_eq!(formality(&["star", "--spec", &curved, "--hbar", "1"]).status.code(), Some(2));
    assert_eq!(formality(&["star", "--spec", &spec("flat_r2.spec"), "--hbar", "3"]).status.code(), Some(2));
}
