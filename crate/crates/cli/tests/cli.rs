//! End-to-end checks of the command-line surface: subcommands, exit codes,
//! config handling, and report determinism.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jetext"))
}

#[test]
fn compose_reference_example() {
    let out = bin()
        .args(["compose", "(1|Pperp0 2 1) o (z1*zb1|Pperp0 2 1)"])
        .output()
        .expect("spawn");
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.trim(), "z1*zb'1 + pi^-1 | Pperp0 2 1");
}

#[test]
fn compose_identity_prints_input() {
    let out = bin()
        .args(["compose", "(z1*zb'1|Psub 1) o (1|Psub 1)"])
        .output()
        .expect("spawn");
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap().trim(),
        "z1*zb'1 | Psub 1"
    );
}

#[test]
fn compose_normal_monomial_rules() {
    let out = bin()
        .args(["compose", "(1|Pperp0 2 1) o (z2*zb2|Pperp0 2 1)"])
        .output()
        .expect("spawn");
    assert_eq!(
        String::from_utf8(out.stdout).unwrap().trim(),
        "pi^-1 | Pperp0 2 1"
    );
    let out2 = bin()
        .args(["compose", "(1|Pperp0 2 1) o (z2^2*zb2|Pperp0 2 1)"])
        .output()
        .expect("spawn");
    assert_eq!(
        String::from_utf8(out2.stdout).unwrap().trim(),
        "0 | Pperp0 2 1"
    );
}

#[test]
fn malformed_expression_is_usage_error_with_position() {
    let out = bin()
        .args(["compose", "(z1**|Pperp0 2 1)"])
        .output()
        .expect("spawn");
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("parse error at byte"), "stderr: {err}");
    // no kernel printed on failure
    assert!(out.stdout.is_empty());
}

#[test]
fn empty_p_range_is_usage_error() {
    let out = bin()
        .args(["experiment", "isometry", "--p", "20..6"])
        .output()
        .expect("spawn");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn experiment_reports_are_deterministic_bytes() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    for dir in [&dir1, &dir2] {
        let st = bin()
            .args([
                "experiment",
                "logbk-decay",
                "--k",
                "1",
                "--p",
                "8..20",
                "--seed",
                "99",
                "--out",
            ])
            .arg(dir.path())
            .status()
            .expect("spawn");
        assert!(st.success());
    }
    let csv1 = std::fs::read(dir1.path().join("logbk-decay.csv")).unwrap();
    let csv2 = std::fs::read(dir2.path().join("logbk-decay.csv")).unwrap();
    assert_eq!(csv1, csv2);
    assert!(!csv1.is_empty());
    let header = String::from_utf8_lossy(&csv1);
    assert!(header.starts_with("p,quantity,value,target,ratio,notes"));
}

#[test]
fn config_file_with_cli_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(&cfg_path, "p_min = 8\np_max = 14\nk = 1\nseed = 4\n").unwrap();
    let out_dir = dir.path().join("reports");
    let st = bin()
        .args(["experiment", "isometry", "--config"])
        .arg(&cfg_path)
        .args(["--p", "6..16", "--out"])
        .arg(&out_dir)
        .status()
        .expect("spawn");
    assert!(st.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("isometry.json")).unwrap())
            .unwrap();
    // CLI --p overrides the file's range; the file's seed survives
    assert_eq!(json["config"]["p_min"], 6);
    assert_eq!(json["config"]["p_max"], 16);
    assert_eq!(json["config"]["seed"], 4);
    assert_eq!(json["experiment"], "isometry");
    assert!(json["code_version"].is_string());
    // per-row provenance tags present
    assert!(json["rows"][0]["notes"]
        .as_str()
        .unwrap()
        .contains("jet-isometry"));
}

#[test]
fn verify_model_k0_reduces_suite() {
    let out = bin()
        .args(["verify-model", "--n", "2", "--k", "0"])
        .output()
        .expect("spawn");
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(!stdout.contains("E^1"), "k=0 run mentions order-1 kernels");
    assert!(stdout.contains("factorization E^0 o Res^0"));
}

#[test]
fn experiment_writes_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let st = bin()
        .args([
            "experiment",
            "peak-cp1",
            "--k",
            "0",
            "--p",
            "8..18",
            "--format",
            "json",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .expect("spawn");
    assert!(st.success());
    assert!(Path::new(&dir.path().join("peak-cp1.csv")).exists());
    assert!(Path::new(&dir.path().join("peak-cp1.json")).exists());
}
