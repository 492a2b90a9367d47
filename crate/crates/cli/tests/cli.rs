//! End-to-end runs of the `sdheat` binary.

use std::path::Path;
use std::process::{Command, Output};

fn sdheat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdheat")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn malformed_window_exits_with_config_status() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.toml", "[domain]\nomega = [0.7, 0.2]\n");
    let out = sdheat(&["solve-norm", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("domain.omega"));
}

#[test]
fn unknown_key_and_missing_file_exit_with_config_status() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "typo.toml", "[sweep]\netta = 0.5\n");
    let out = sdheat(&["sweep", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("etta"));
    let out = sdheat(&["solve-time", "--config", "/nonexistent/run.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_budget_reports_exit_time() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", "[problem]\nbudgets = [0.0]\n");
    let out = sdheat(&["solve-time", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert!(out.status.success());
    let r = report(tmp.path());
    let results = &r["meta"]["results"];
    assert_eq!(results["M[0].T"], results["exit_time"]);
    assert!(r["verdicts"].as_array().unwrap().iter().all(|v| v["pass"] == true));
}

#[test]
fn single_mode_matches_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "run.toml",
        "[domain]\nomega = [0.0, 1.0]\nmodes = 1\n[problem]\ny0 = [3.0]\nhorizons = [0.05]\n",
    );
    let out = sdheat(&["solve-norm", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert!(out.status.success());
    let l = std::f64::consts::PI.powi(2);
    let w = (1.0 - (-2.0 * l * 0.05f64).exp()) / (2.0 * l);
    let expect = ((-l * 0.05f64).exp() * 3.0 - 1.0) / w.sqrt();
    let n = report(tmp.path())["meta"]["results"]["T[0].N"].as_f64().unwrap();
    assert!((n - expect).abs() < 1e-12 * expect);
}

#[test]
fn sampled_time_reports_blocks_and_sandwich() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", "[problem]\nbudgets = [2.0]\n[sampling]\ndelta = 0.002\n");
    let out = sdheat(&["solve-time", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert!(out.status.success());
    let r = report(tmp.path());
    let res = &r["meta"]["results"];
    let k = res["M[0].sampled.k"].as_f64().unwrap();
    assert_eq!(k.fract(), 0.0);
    assert!(res["M[0].sampled.N_at_T_delta"].as_f64().unwrap() <= 2.0);
    assert!(res["M[0].sampled.N_at_T_delta_minus_delta"].as_f64().unwrap() > 2.0);
}

const SMALL_SWEEP: &str = "[domain]\nmodes = 24\n[sweep]\nk_min = 8\nk_max = 64\npoints = 10\nladder_levels = 6\nhunt_k_min = 6\nhunt_k_max = 8\n";

#[test]
fn sweep_csv_is_deterministic_and_report_rerenders() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", SMALL_SWEEP);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for (dir, threads) in [(&a, "1"), (&b, "3")] {
        let out = sdheat(&["sweep", "--config", &cfg, "--out", dir.to_str().unwrap(), "--threads", threads]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let csv_a = std::fs::read_to_string(a.join("rows.csv")).unwrap();
    assert_eq!(csv_a, std::fs::read_to_string(b.join("rows.csv")).unwrap());
    let mut lines = csv_a.lines();
    assert_eq!(lines.next(), Some("delta,T_gap,ctrl_err_min_norm,norm_gap,family_err,in_A,k"));
    assert!(lines.count() >= 10);

    let r = report(&a);
    for key in ["meta", "rows", "fits", "verdicts"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    let out = sdheat(&["report", a.join("report.json").to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("verdicts:"));
}

#[test]
fn malformed_report_exits_with_config_status() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write(tmp.path(), "report.json", "{\"meta\": 1}");
    assert_eq!(sdheat(&["report", &path]).status.code(), Some(2));
}
