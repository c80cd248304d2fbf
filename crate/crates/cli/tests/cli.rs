use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_reidemeister"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn schema() -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schema/report.schema.json");
    let text = std::fs::read_to_string(path).expect("schema file");
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).expect("valid schema")
}

fn assert_valid(report: &serde_json::Value) {
    let validator = schema();
    let errors: Vec<String> = validator
        .iter_errors(report)
        .map(|e| e.to_string())
        .collect();
    assert!(errors.is_empty(), "schema violations: {errors:?}");
}

#[test]
fn smallest_case1_report() {
    let out = run(&[
        "report", "--group", "5^1:1", "--k", "1", "--case", "1", "--n", "3",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = stdout_json(&out);
    assert_valid(&report);
    assert_eq!(report["verification"]["r_total"], 2);
    let oracle = &report["oracle"][0];
    assert_eq!(oracle["agree"], true);
    let counts = &oracle["counts"];
    assert_eq!(counts["union_find"], counts["burnside"]);
    assert_eq!(counts["union_find"], counts["fixed_classes"]);
    assert_eq!(oracle["pullback"]["verdict"], "holds");
}

#[test]
fn case2_report() {
    let out = run(&[
        "report", "--group", "7^1:1", "--k", "2", "--case", "2", "--n", "2",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = stdout_json(&out);
    assert_valid(&report);
    assert_eq!(report["verification"]["r_total"], 3);
}

#[test]
fn reruns_are_byte_identical() {
    let args = [
        "report",
        "--group",
        "2^1:2,5^1:1",
        "--k",
        "1",
        "--n",
        "2",
        "--n",
        "3",
        "--seed",
        "7",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn report_round_trips_through_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "report",
        "--group",
        "3^1:2",
        "--k",
        "1",
        "--n",
        "2",
        "--quiet",
        "--json-out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_valid(&value);
    assert_eq!(serde_json::to_string_pretty(&value).unwrap() + "\n", text);
}

#[test]
fn classify_examples() {
    let out = run(&["classify", "--group", "2^1:2,3^1:2", "--k", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert!(report["applicable"]
        .as_array()
        .unwrap()
        .contains(&serde_json::json!(1)));

    let out = run(&["classify", "--group", "2^1:1", "--k", "2"]);
    assert_eq!(stdout_json(&out)["applicable"], serde_json::json!([]));

    let out = run(&["classify", "--group", "", "--k", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("position"));
}

#[test]
fn construct_then_verify() {
    let out = run(&[
        "construct",
        "--group",
        "2^1:2,3^1:1",
        "--k",
        "4",
        "--case",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    std::fs::write(&path, &out.stdout).unwrap();
    let out = run(&["verify", "--construction", path.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(stdout_json(&out)["r_total"], 5);
}

#[test]
fn verify_rejects_non_unimodular() {
    let out = run(&["construct", "--group", "5^1:1", "--k", "1"]);
    let mut c = stdout_json(&out);
    c["m"] = serde_json::json!([[2]]);
    let out = run(&["verify", "--construction", &c.to_string()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unimodular"));
}

#[test]
fn inapplicable_case_is_input_error() {
    let out = run(&["construct", "--group", "2^1:1", "--k", "2", "--case", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_identity_calibration() {
    let out = run(&[
        "oracle", "--group", "2^1:1", "--k", "1", "--n", "2", "--psi", "identity",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    // the dihedral group of order 8 has 5 classes
    assert_eq!(v["counts"]["union_find"], 5);
    assert_eq!(v["counts"]["burnside"], 5);
    assert_eq!(v["pullback"]["cylinders"], false);
    assert!(v["elapsed_ms"].is_u64());
}

#[test]
fn cap_exit_code() {
    let out = run(&[
        "oracle", "--group", "5^1:1", "--k", "1", "--n", "5", "--cap", "1000",
    ]);
    assert_eq!(out.status.code(), Some(3));
}
