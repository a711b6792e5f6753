use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn qnpr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnpr")).args(args).output().unwrap()
}

fn run_with(dir: &Path, cmd: &str, config: &str) -> (Output, std::path::PathBuf) {
    let cfg = dir.join(format!("{cmd}.cfg"));
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join(cmd);
    let o = qnpr(&[cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    (o, out)
}

fn csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn fig3b_schema_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run_with(dir.path(), "fig3b-scan", "trials = 3\ncopies = 1,2\nsubset_sizes = 1,4\n");
    assert!(o.status.code().is_some(), "{o:?}");
    let body = std::fs::read(out.join("fig3b_scan.csv")).unwrap();
    let text = String::from_utf8(body.clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), "n_t,r_m,mean_abs_err,std_err,trials,seed");
    assert_eq!(text.lines().count(), 5);
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["trials"], "3");
    let entry = manifest["outputs"].as_array().unwrap().iter().find(|e| e["file"] == "fig3b_scan.csv").unwrap();
    assert_eq!(entry["sha256"], hex::encode(Sha256::digest(&body)));
    assert_eq!(entry["bytes"], body.len());
    // Seventeen significant digits.
    let mantissa = csv(&out.join("fig3b_scan.csv"))[1][2].split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17);
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    std::fs::write(&cfg, "trials = 3\ncopies = 1\nsubset_sizes = 1\nseed = 5\n").unwrap();
    let out = dir.path().join("o");
    let o = qnpr(&["fig3b-scan", "--config", cfg.to_str().unwrap(), "--trials", "2", "--seed", "8", "--out", out.to_str().unwrap()]);
    assert!(o.status.code().is_some());
    let rows = csv(&out.join("fig3b_scan.csv"));
    assert_eq!(rows[1][4], "2");
    assert_eq!(rows[1][5], "8");
}

#[test]
fn predict_marks_sign_in_shot_mode() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run_with(dir.path(), "predict", "shots = 2000\n");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let rows = csv(&out.join("predict.csv"));
    assert_eq!(rows[0].last().unwrap(), "sign");
    assert!(rows[1..].iter().all(|r| r.last().unwrap() == "n/a" && r[7] == "2000"));
    assert!(rows[1..].iter().all(|r| r[4].parse::<f64>().unwrap() < 1e-9));

    let (o, out) = run_with(dir.path(), "predict", "shots = 0\n");
    assert_eq!(o.status.code(), Some(0));
    let rows = csv(&out.join("predict.csv"));
    for r in &rows[1..] {
        let overlap: f64 = r[3].parse().unwrap();
        assert_eq!(r[8], if overlap < 0.0 { "-" } else { "+" });
        assert_eq!(r[6].parse::<f64>().unwrap(), overlap.abs());
    }
}

#[test]
fn coarse_grid_is_a_tolerance_failure() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run_with(dir.path(), "verify-inversion", "grid_points = 17\n");
    assert_eq!(o.status.code(), Some(2));
    let rows = csv(&out.join("inversion_sweep.csv"));
    assert!(rows[1..].iter().any(|r| r[5] == "false"));
    let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("FAIL grid_matches_analytic"));
    assert!(out.join("manifest.json").exists());
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = run_with(dir.path(), "predict", "colour = blue\n");
    assert_eq!(o.status.code(), Some(1));
    let (o, _) = run_with(dir.path(), "predict", "experiment = fig3b_scan\n");
    assert_eq!(o.status.code(), Some(1));
    let (o, _) = run_with(dir.path(), "entropy-scan", "synthetic_samples = 50\n");
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("needs at least"));
    assert_eq!(qnpr(&["predict", "--trials", "zero"]).status.code(), Some(1));
    assert_eq!(qnpr(&["bogus"]).status.code(), Some(1));
    assert_eq!(qnpr(&["--help"]).status.code(), Some(0));
    let missing = qnpr(&["predict", "--config", dir.path().join("absent.cfg").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn single_sample_entropy_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run_with(dir.path(), "entropy-scan", "trials = 3\nsample_counts = 1,4\n");
    assert!(o.status.code().is_some());
    let rows = csv(&out.join("entropy_scan.csv"));
    assert_eq!(rows[0].join(","), "sample_count,s,mean_entropy,entropy_sd,mean_test_mse,trials");
    let singles: Vec<&Vec<String>> = rows[1..].iter().filter(|r| r[0] == "1").collect();
    assert_eq!(singles.len(), 3);
    assert!(singles.iter().all(|r| r[2].parse::<f64>().unwrap() == 0.0));
    let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("PASS single_sample_entropy"));
}
