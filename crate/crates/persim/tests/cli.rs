//! End-to-end checks of the `persim` binary: artifact layout, exit codes,
//! and reproducibility of report bytes.

use std::path::Path;
use std::process::{Command, Output};

fn persim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_persim"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("failed to launch persim")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn generate_then_icc_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let out = persim(
        dir.path(),
        &[
            "generate",
            "--subjects",
            "100",
            "--features",
            "10",
            "--icc",
            "1.0",
            "--seed",
            "42",
            "--out",
            "perfect.csv",
        ],
    );
    assert_success(&out);
    let csv = std::fs::read_to_string(dir.path().join("perfect.csv")).unwrap();
    assert_eq!(
        csv.lines().count(),
        201,
        "header + 100 subjects x 2 sessions"
    );
    assert!(csv.starts_with("Subject,Session,Feat01,"));

    let out = persim(dir.path(), &["icc", "--input", "perfect.csv"]);
    assert_success(&out);
    let report = std::fs::read_to_string(dir.path().join("icc_report.csv")).unwrap();
    let mut lines = report.lines();
    assert_eq!(
        lines.next().unwrap(),
        "feature_name,var_subject,var_session,var_error,icc"
    );
    for line in lines {
        let icc: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(
            (icc - 1.0).abs() < 1e-9,
            "zero-noise data must give ICC 1, got {icc}"
        );
    }
}

#[test]
fn evaluate_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    assert_success(&persim(
        dir.path(),
        &[
            "generate",
            "--subjects",
            "60",
            "--features",
            "8",
            "--icc",
            "0.8",
            "--seed",
            "7",
            "--out",
            "ds.csv",
        ],
    ));
    let out = persim(
        dir.path(),
        &[
            "evaluate",
            "--input",
            "ds.csv",
            "--subset-size",
            "5",
            "--seed",
            "3",
        ],
    );
    assert_success(&out);
    for artifact in ["evaluation_summary.json", "roc.csv", "histogram.csv"] {
        assert!(dir.path().join(artifact).exists(), "missing {artifact}");
    }
    let summary = std::fs::read_to_string(dir.path().join("evaluation_summary.json")).unwrap();
    assert!(summary.contains("\"schema_version\": 1"));
    assert!(summary.contains("\"eer_percent\""));
}

#[test]
fn decorrelate_and_correlate_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    assert_success(&persim(
        dir.path(),
        &[
            "generate",
            "--subjects",
            "80",
            "--features",
            "6",
            "--icc",
            "0.6",
            "--seed",
            "5",
            "--out",
            "ds.csv",
        ],
    ));
    let out = persim(
        dir.path(),
        &[
            "correlate",
            "--input",
            "ds.csv",
            "--rho",
            "0.4",
            "--out",
            "corr.csv",
        ],
    );
    assert_success(&out);
    let out = persim(
        dir.path(),
        &["decorrelate", "--input", "corr.csv", "--out", "white.csv"],
    );
    assert_success(&out);
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    assert!(text.contains("median |r|"), "stdout: {text}");
    assert!(dir.path().join("white.csv").exists());
}

#[test]
fn correlate_accepts_matrix_file() {
    let dir = tempfile::tempdir().unwrap();
    assert_success(&persim(
        dir.path(),
        &[
            "generate",
            "--subjects",
            "150",
            "--features",
            "2",
            "--icc",
            "0.7",
            "--seed",
            "13",
            "--out",
            "ds.csv",
        ],
    ));
    std::fs::write(dir.path().join("target.csv"), "1,0.5\n0.5,1\n").unwrap();
    let out = persim(
        dir.path(),
        &[
            "correlate",
            "--input",
            "ds.csv",
            "--target-corr",
            "target.csv",
            "--out",
            "out.csv",
        ],
    );
    assert_success(&out);
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    // reported median |r| should sit near the requested 0.5
    let value: f64 = text
        .split("median |r| now ")
        .nth(1)
        .and_then(|s| s.split(';').next())
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!((value - 0.5).abs() < 0.15, "median |r| {value}");

    // wrong-sized matrix is a data error
    std::fs::write(dir.path().join("bad.csv"), "1,0.5,0\n0.5,1,0\n0,0,1\n").unwrap();
    let out = persim(
        dir.path(),
        &[
            "correlate",
            "--input",
            "ds.csv",
            "--target-corr",
            "bad.csv",
            "--out",
            "x.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn icc_json_format() {
    let dir = tempfile::tempdir().unwrap();
    assert_success(&persim(
        dir.path(),
        &[
            "generate",
            "--subjects",
            "40",
            "--features",
            "3",
            "--icc",
            "0.9",
            "--seed",
            "2",
            "--out",
            "ds.csv",
        ],
    ));
    assert_success(&persim(
        dir.path(),
        &["icc", "--input", "ds.csv", "--format", "json"],
    ));
    let text = std::fs::read_to_string(dir.path().join("icc_report.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed.as_array().unwrap().len(), 3);
    assert!(parsed[0]["icc"].as_f64().unwrap() > 0.5);
}

#[test]
fn sweep_with_config_file_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("sweep.toml"),
        "n_subjects = 80\nbands = [1, 8]\nsubset_size = 10\nn_repeats = 2\nseed = 11\n",
    )
    .unwrap();
    assert_success(&persim(
        dir.path(),
        &["sweep", "--config", "sweep.toml", "--out-dir", "a"],
    ));
    assert_success(&persim(
        dir.path(),
        &["sweep", "--config", "sweep.toml", "--out-dir", "b"],
    ));
    for artifact in [
        "band_sweep_rows.csv",
        "band_sweep_bands.csv",
        "band_sweep_summary.json",
    ] {
        let a = std::fs::read(dir.path().join("a").join(artifact)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(artifact)).unwrap();
        assert_eq!(a, b, "{artifact} must be byte-identical across reruns");
    }
    let summary =
        std::fs::read_to_string(dir.path().join("a").join("band_sweep_summary.json")).unwrap();
    assert!(summary.contains("\"run_id\""));
    assert!(summary.contains("\"n_subjects\": 80"));
}

#[test]
fn corr_study_and_decorr_compare_configs() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("study.toml"),
        "n_subjects = 60\nn_features = 12\nrho_targets = [0.0, 0.4]\nn_iterations = 4\nsubset_size = 6\nseed = 2\n",
    )
    .unwrap();
    assert_success(&persim(
        dir.path(),
        &["corr-study", "--config", "study.toml"],
    ));
    let rows = std::fs::read_to_string(dir.path().join("corr_study_rows.csv")).unwrap();
    assert_eq!(
        rows.lines().count(),
        1 + 2 * 4,
        "header + rho levels x iterations"
    );

    std::fs::write(
        dir.path().join("decorr.toml"),
        "n_subjects = 60\nband_indices = [2, 7]\nsubset_size = 8\nn_repeats = 2\nseed = 3\n",
    )
    .unwrap();
    assert_success(&persim(
        dir.path(),
        &["decorr-compare", "--config", "decorr.toml"],
    ));
    let rows = std::fs::read_to_string(dir.path().join("decorr_compare_rows.csv")).unwrap();
    assert_eq!(
        rows.lines().count(),
        1 + 2 * 2 * 2,
        "header + bands x variants x repeats"
    );
}

#[test]
fn usage_error_exit_code_differs_from_data_error() {
    let dir = tempfile::tempdir().unwrap();
    // unknown subcommand: clap usage error
    let usage = persim(dir.path(), &["no-such-command"]);
    assert_eq!(usage.status.code(), Some(2));
    // unknown flag: also a usage error
    let flag = persim(dir.path(), &["generate", "--bogus"]);
    assert_eq!(flag.status.code(), Some(2));
    // missing input file: data error
    let data = persim(dir.path(), &["icc", "--input", "missing.csv"]);
    assert_eq!(data.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&data.stderr).starts_with("error:"));
}

#[test]
fn unbalanced_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.csv"),
        "Subject,Session,F1\n1,1,0.5\n1,2,0.6\n2,1,0.7\n",
    )
    .unwrap();
    let out = persim(dir.path(), &["icc", "--input", "bad.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(err.contains("unbalanced"), "stderr: {err}");
    // no partial artifact left behind
    assert!(!dir.path().join("icc_report.csv").exists());
}

#[test]
fn invalid_icc_target_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = persim(
        dir.path(),
        &[
            "generate",
            "--subjects",
            "10",
            "--features",
            "2",
            "--icc",
            "0.0",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("domain error"));
}
