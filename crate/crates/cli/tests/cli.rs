use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_witnessforge"))
        .args(args)
        .env_remove("WITNESSFORGE_SEED")
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn finite_witness_example() {
    let v = json_stdout(&cli(&[
        "finite-witness",
        "--dim",
        "3",
        "--max-entangled",
        "--p",
        "0.3",
    ]));
    let r = &v["report"];
    assert!((r["lambda_min"].as_f64().unwrap() + 0.022_222_222_222).abs() < 1e-11);
    assert_eq!(r["entangled"], true);
    assert_eq!(r["quorum"]["terms"].as_array().unwrap().len(), 4);
    assert_eq!(v["config"]["command"], "finite-witness");
    assert_eq!(v["config"]["params"]["p"], 0.3);
    assert_eq!(v["config"]["params"]["psi"]["rows"], 3);
}

#[test]
fn gauss_scan_csv_brackets_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    let out = cli(&[
        "cv-gauss",
        "--x",
        "0.5",
        "--scan-kappa",
        "0:1.2:0.01",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = fs::read_to_string(&path).unwrap();
    let rows: Vec<(f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            (c[0].parse().unwrap(), c[1].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 121);
    let flips: Vec<(f64, f64)> = rows
        .windows(2)
        .filter(|w| (w[0].1 < 0.0) != (w[1].1 < 0.0))
        .map(|w| (w[0].0, w[1].0))
        .collect();
    assert_eq!(flips.len(), 1);

    let summary: Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("scan.csv.summary.json")).unwrap(),
    )
    .unwrap();
    let kappa_star = summary["report"]["thresholds"][0].as_f64().unwrap();
    assert!(flips[0].0 <= kappa_star && kappa_star <= flips[0].1);
    assert!((kappa_star - summary["report"]["ppt_threshold"].as_f64().unwrap()).abs() < 1e-8);
}

#[test]
fn tomo_estimate_example() {
    let v = json_stdout(&cli(&[
        "tomo-estimate",
        "--x",
        "0.5",
        "--gammat",
        "1",
        "--samples",
        "1000000",
        "--seed",
        "42",
    ]));
    let r = &v["report"];
    assert_eq!(r["n_samples"], 1_000_000);
    assert_eq!(r["seed"], 42);
    assert!(r["z_score"].as_f64().unwrap().abs() <= 3.0, "{r}");
}

#[test]
fn reports_are_byte_identical_on_rerun() {
    let args = [
        "tomo-estimate",
        "--x",
        "0.4",
        "--kappa",
        "0.2",
        "--samples",
        "20000",
        "--seed",
        "9",
    ];
    let a = cli(&args);
    let b = cli(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let mut four = args.to_vec();
    four.extend(["--workers", "4"]);
    let c: Value = json_stdout(&cli(&four));
    let a: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(a["report"], c["report"]);
}

#[test]
fn seed_falls_back_to_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_witnessforge"))
        .args(["tomo-estimate", "--x", "0.3", "--samples", "5000"])
        .env("WITNESSFORGE_SEED", "7")
        .output()
        .unwrap();
    let v = json_stdout(&out);
    assert_eq!(v["report"]["seed"], 7);
    assert_eq!(v["config"]["seed"], 7);
}

#[test]
fn batch_csv_export() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("batch.csv");
    let out = cli(&[
        "tomo-estimate",
        "--x",
        "0.3",
        "--samples",
        "100",
        "--seed",
        "1",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("phi1,x1,phi2,x2\n"));
    assert_eq!(csv.lines().count(), 101);
    assert!(dir.path().join("batch.csv.summary.json").exists());
}

#[test]
fn schmidt_input_is_normalized_with_warning() {
    let out = cli(&[
        "finite-witness",
        "--schmidt",
        "1,1",
        "--dim",
        "3",
        "--p",
        "0.5",
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let v = json_stdout(&out);
    assert!((v["report"]["p_threshold"].as_f64().unwrap() - 2.0 / 11.0).abs() < 1e-12);
}

#[test]
fn psi_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("psi.json");
    let s = std::f64::consts::FRAC_1_SQRT_2;
    fs::write(
        &path,
        format!(r#"{{"rows":2,"cols":2,"re":[{s},0,0,0],"im":[0,0,0,{s}]}}"#),
    )
    .unwrap();
    let v = json_stdout(&cli(&[
        "finite-witness",
        "--psi-file",
        path.to_str().unwrap(),
        "--p",
        "0.5",
    ]));
    assert!((v["report"]["p_threshold"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn finite_scan_summary() {
    let v = json_stdout(&cli(&[
        "finite-scan",
        "--dim",
        "4",
        "--max-entangled",
        "--p-range",
        "0:1:0.1",
    ]));
    let summary = &v["report"]["summary"];
    assert!((summary["thresholds"][0].as_f64().unwrap() - 0.2).abs() < 1e-9);
    assert!((summary["analytic_threshold"].as_f64().unwrap() - 0.2).abs() < 1e-12);
    assert_eq!(v["report"]["table"]["rows"].as_array().unwrap().len(), 11);
}

#[test]
fn bs_squeeze_single_point() {
    let v = json_stdout(&cli(&["bs-squeeze", "--x", "0.5", "--kappa", "0"]));
    assert!((v["report"]["variance"].as_f64().unwrap() - 1.0 / 12.0).abs() < 1e-6);
}

#[test]
fn precondition_failures_exit_2() {
    for args in [
        vec![
            "finite-witness",
            "--dim",
            "3",
            "--max-entangled",
            "--p",
            "1.5",
        ],
        vec!["finite-witness", "--dim", "3", "--p", "0.5"],
        vec![
            "finite-witness",
            "--psi-file",
            "/nonexistent/psi.json",
            "--p",
            "0.5",
        ],
        vec!["cv-phase", "--x", "1.5", "--gammat", "1"],
        vec!["cv-phase", "--x", "0.5", "--gammat", "1", "--format", "csv"],
        vec![
            "cv-phase",
            "--x",
            "0.5",
            "--gammat",
            "1",
            "--out",
            "/nonexistent/dir/out.json",
        ],
        vec!["cv-gauss", "--x", "0.5", "--scan-kappa", "1:0:0.1"],
        vec!["finite-witness", "--bogus"],
    ] {
        assert_eq!(cli(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn numerical_failures_exit_3() {
    let out = cli(&["cv-phase", "--x", "0.9", "--gammat", "1", "--trunc", "2"]);
    assert_eq!(out.status.code(), Some(3));
}
