use std::path::PathBuf;
use std::process::{Command, Output};

fn thrifty(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thrifty")).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = thrifty(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn config(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name).to_string_lossy().into_owned()
}

#[test]
fn moment_table_csv() {
    let text = stdout(&["moment-table", "-n", "2", "--max-m", "2"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,m,numerator,denominator,float_value");
    assert_eq!(lines[3], "2,2,25,16,1.5625000000000000e0");
    assert_eq!(*lines.last().unwrap(), "inf,2,3,1,3.0000000000000000e0");
}

#[test]
fn optimal_reuse_json() {
    let text = stdout(&["optimal-reuse", "--config", &config("optimal-reuse.json")]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["reuse"], 54);
    assert!(v["printed_heuristic"].is_null());
}

#[test]
fn output_files_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, threads) in [(&a, "1"), (&b, "2")] {
        stdout(&[
            "weingarten",
            "--config",
            &config("weingarten.json"),
            "--out",
            path.to_str().unwrap(),
            "--threads",
            threads,
        ]);
    }
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());
    assert_eq!(String::from_utf8(first).unwrap().lines().count(), 1 + 2 * 900);
}

#[test]
fn estimate_with_records_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("records.jsonl");
    let args = |seed: &'static str, rec: &str| {
        stdout(&["estimate", "-n", "3", "--N", "120", "--R", "4", "--K", "3", "--seed", seed, "--records", rec])
    };
    let first = args("9", records.to_str().unwrap());
    let lines = std::fs::read_to_string(&records).unwrap();
    assert_eq!(lines.lines().count(), 30);
    let line: serde_json::Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    assert_eq!(line["outcomes"].as_array().unwrap().len(), 4);
    assert_eq!(line["outcomes"][0].as_str().unwrap().len(), 3);
    let v: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(
        (v["N"].as_u64(), v["R"].as_u64(), v["K"].as_u64(), v["seed"].as_u64()),
        (Some(120), Some(4), Some(3), Some(9))
    );
    assert_eq!(first, args("9", records.to_str().unwrap()));
    assert_ne!(first, args("10", records.to_str().unwrap()));
}

#[test]
fn errors_are_reported() {
    let mismatch = thrifty(&["estimate", "--config", &config("weingarten.json")]);
    assert!(!mismatch.status.success());
    assert!(String::from_utf8_lossy(&mismatch.stderr).contains("weingarten"));
    assert!(!thrifty(&["estimate", "--N", "10", "--R", "3"]).status.success());
    assert!(!thrifty(&["optimal-reuse", "--format", "csv"]).status.success());
    assert!(!thrifty(&["weingarten", "-t", "4", "-n", "1", "--group", "unitary"]).status.success());
}
