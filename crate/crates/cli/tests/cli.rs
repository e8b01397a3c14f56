use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(kind: &str, name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(kind)
        .join(format!("{name}.json"))
        .display()
        .to_string()
}

fn qdt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdt")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn eval_prints_json() {
    let o = qdt(&["eval", "--scenario", &fixture("valid", "minimal")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["command"], "eval");
    assert_eq!(v["probabilities"][0]["probability"], 0.5);
}

#[test]
fn eval_csv_and_table() {
    let csv = qdt(&["eval", "--scenario", &fixture("valid", "hadamard_pair"), "--format", "csv"]);
    assert_eq!(csv.status.code(), Some(0));
    assert!(stdout(&csv).starts_with("section,key,field,value\n"));
    let table = qdt(&["eval", "--scenario", &fixture("valid", "hadamard_pair"), "--format", "table"]);
    assert_eq!(table.status.code(), Some(0));
    assert!(stdout(&table).contains("second/B1"));
}

#[test]
fn validation_errors_exit_2_with_path() {
    let o = qdt(&["validate", "--scenario", &fixture("malformed", "unnormalized_emotion")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("$.subject_space.emotions[1]"), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
}

#[test]
fn syntax_errors_exit_2_with_position() {
    let o = qdt(&["eval", "--scenario", &fixture("malformed", "trailing_comma")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));
}

#[test]
fn validate_prints_normalized_document() {
    let o = qdt(&["validate", "--scenario", &fixture("valid", "minimal"), "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], "qdt/1");
    assert_eq!(v["seed"], 5);
}

#[test]
fn conditioning_failure_exits_3_and_names_label() {
    let o = qdt(&[
        "sequence",
        "--scenario",
        &fixture("valid", "pure_first_vector"),
        "--first",
        "A2",
        "--second",
        "A1",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("`A2`") && err.contains("hint:"), "{err}");
}

#[test]
fn unknown_label_is_a_validation_error() {
    let o = qdt(&["sequence", "--scenario", &fixture("valid", "minimal"), "--first", "A1", "--second", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sequence_reports_both_orders() {
    let o = qdt(&[
        "sequence",
        "--scenario",
        &fixture("valid", "explicit_density"),
        "--first",
        "A2",
        "--second",
        "B1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["sequence"]["joint_forward"], 0.15);
    assert_eq!(v["sequence"]["joint_reverse"], 0.35);
    assert_eq!(v["symmetry"]["joint_symmetric"], false);
}

#[test]
fn behavioral_without_subject_space_exits_2() {
    let o = qdt(&["behavioral", "--scenario", &fixture("valid", "minimal")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sample_is_reproducible_under_seed() {
    let args = [
        "sample",
        "--scenario",
        &fixture("valid", "rotation_evolution"),
        "--n",
        "20000",
        "--protocol",
        "sequential",
        "--seed",
        "11",
    ];
    let a = qdt(&args);
    let b = qdt(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let c = qdt(&[&args[..8], &["12"]].concat());
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn out_writes_file_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = qdt(&[
        "eval",
        "--scenario",
        &fixture("valid", "behavioral_superposed"),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["decomposition"].as_array().unwrap().len(), 2);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn audit_passes_and_reports_witnesses() {
    let o = qdt(&["audit", "--scenario", &fixture("valid", "uniform_three"), "--trials", "50"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["witnesses"].as_array().unwrap().iter().all(|w| w["found"] == true));
}

#[test]
fn audit_counterexample_exits_4() {
    let o = qdt(&[
        "audit",
        "--scenario",
        &fixture("valid", "uniform_three"),
        "--trials",
        "5",
        "--tolerance",
        "1e-300",
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("counterexample"));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["identities"]
        .as_array()
        .unwrap()
        .iter()
        .any(|r| r["counterexample"].is_object()));
}

#[test]
fn bad_tolerance_is_rejected() {
    let o = qdt(&["eval", "--scenario", &fixture("valid", "minimal"), "--tolerance", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_file_is_a_validation_error() {
    let o = qdt(&["eval", "--scenario", "/nonexistent/scenario.json"]);
    assert_eq!(o.status.code(), Some(2));
}
