//! End-to-end checks of the binary: output schemas, byte-identical reruns,
//! manifests, unit conversion, and exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_infospec"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn build_family(dir: &Path) -> std::path::PathBuf {
    let fam = dir.join("fam.json");
    run_ok(&[
        "scenario",
        "build",
        "--id",
        "example1-bounded",
        "--params",
        r#"{"s_bound": 3, "q1": 0.5, "q2": 0.0}"#,
        "--out",
        fam.to_str().unwrap(),
    ]);
    fam
}

#[test]
fn scenario_list_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(&["scenario", "list"]);
    let listing: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(listing.as_array().unwrap().len() >= 7);

    let fam = build_family(dir.path());
    let report = dir.path().join("val.json");
    run_ok(&[
        "validate",
        "--family",
        fam.to_str().unwrap(),
        "--ladder",
        "2,4",
        "--out",
        report.to_str().unwrap(),
    ]);
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["pass"], serde_json::json!(true));
    assert!(report.with_file_name("val.json.manifest.json").exists());
}

#[test]
fn spectrum_csv_is_normalized_and_rerun_identical() {
    let dir = tempfile::tempdir().unwrap();
    let fam = build_family(dir.path());
    let csv = dir.path().join("sp.csv");
    let args = [
        "spectrum",
        "--family",
        fam.to_str().unwrap(),
        "--state",
        "coh-2",
        "--n",
        "4",
        "--out",
        csv.to_str().unwrap(),
    ];
    run_ok(&args);
    let first = fs::read(&csv).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "value_nats_per_symbol,probability");
    let total: f64 = lines
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() <= 1e-12);

    run_ok(&args);
    assert_eq!(first, fs::read(&csv).unwrap());
}

#[test]
fn rate_ladder_and_bits_flag() {
    let dir = tempfile::tempdir().unwrap();
    let fam = build_family(dir.path());
    let out = run_ok(&[
        "rate",
        "--kind",
        "inf",
        "--family",
        fam.to_str().unwrap(),
        "--ladder",
        "2,4,6,8",
        "--tol",
        "1e-9",
    ]);
    let est: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(est["ladder"].as_array().unwrap().len(), 4);
    let nats = est["value"].as_f64().unwrap();
    assert!((nats - std::f64::consts::LN_2).abs() <= 1e-12);

    let out = run_ok(&[
        "rate",
        "--kind",
        "inf",
        "--family",
        fam.to_str().unwrap(),
        "--ladder",
        "2,4,6,8",
        "--bits",
    ]);
    let est: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((est["value"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
}

#[test]
fn codebook_and_sandwich_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let fam = build_family(dir.path());
    let cb = dir.path().join("cb.json");
    run_ok(&[
        "codebook",
        "build",
        "--family",
        fam.to_str().unwrap(),
        "--n",
        "6",
        "--messages",
        "4",
        "--gamma",
        "0.15",
        "--out",
        cb.to_str().unwrap(),
    ]);
    let out = run_ok(&[
        "bounds",
        "sandwich",
        "--codebook",
        cb.to_str().unwrap(),
        "--family",
        fam.to_str().unwrap(),
        "--gammas",
        "0.05,0.1,0.2",
    ]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let avg = report["measured"]["compound_avg"].as_f64().unwrap();
    for entry in report["entries"].as_array().unwrap() {
        assert!(entry["verdu_han_lower"].as_f64().unwrap() <= avg + 1e-12);
    }
}

#[test]
fn diag_subcommands_run() {
    let dir = tempfile::tempdir().unwrap();
    let fam = build_family(dir.path());
    let f = fam.to_str().unwrap();
    let out = run_ok(&[
        "diag", "worst-case", "--family", f, "--ladder", "2,4,6", "--tol", "1e-9",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.get("gap").is_some());
    run_ok(&[
        "diag", "uniformity", "--family", f, "--ladder", "2,4,6", "--gammas", "0.1,0.2",
    ]);
    run_ok(&[
        "diag", "mixed", "--family", f, "--ladder", "2,4,6", "--geometric", "0.5",
    ]);
    run_ok(&[
        "diag",
        "stability",
        "--family",
        f,
        "--ladder",
        "2,4,6",
        "--delta",
        "0.05",
        "--r-star",
        "0.6931471805599453",
    ]);
    run_ok(&[
        "diag",
        "strong-converse",
        "--family",
        f,
        "--ladder",
        "2,4,6",
        "--delta",
        "0.05",
    ]);
}

#[test]
fn exit_codes() {
    // Unknown kind: usage error.
    let dir = tempfile::tempdir().unwrap();
    let fam = build_family(dir.path());
    let out = bin()
        .args([
            "rate",
            "--kind",
            "bogus",
            "--family",
            fam.to_str().unwrap(),
            "--ladder",
            "2",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // AVC cap: resource error.
    let out = bin()
        .args([
            "scenario",
            "build",
            "--id",
            "avc-demo",
            "--params",
            r#"{"crossovers": [0.1, 0.2], "n": 9}"#,
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));

    // Broken family: validation failure is an invariant violation.
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{
            "input_alphabet": 2, "output_alphabet": 2,
            "states": [{"id": "x", "kind": "explicit-block",
                        "params": {"tables": {"1": [[0.9, 0.2], [0.1, 0.8]]}}}]
        }"#,
    )
    .unwrap();
    let out = bin()
        .args(["validate", "--family", bad.to_str().unwrap(), "--ladder", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}
