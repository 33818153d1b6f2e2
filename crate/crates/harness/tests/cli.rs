use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lar_core::inference::path_refusal;
use lar_core::lar::lar_path;
use lar_core::model::{build_correlation_state, DesignMatrix, ResponseVector};
use lar_core::Formulation;
use lar_harness::design::{draw_design, draw_response, replicate_rng};
use lar_harness::DesignModel;
use serde_json::Value;
use tempfile::TempDir;

fn lar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lar")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn write_design(dir: &Path, x: &DesignMatrix<f64>) -> PathBuf {
    let path = dir.join("design.csv");
    let rows: Vec<String> = (0..x.nrows())
        .map(|i| (0..x.ncols()).map(|j| x.get(i, j).to_string()).collect::<Vec<_>>().join(","))
        .collect();
    std::fs::write(&path, rows.join("\n") + "\n").unwrap();
    path
}

fn write_response(dir: &Path, y: &[f64]) -> PathBuf {
    let path = dir.join("response.csv");
    let rows: Vec<String> = y.iter().map(f64::to_string).collect();
    std::fs::write(&path, rows.join("\n") + "\n").unwrap();
    path
}

/// Identity design with a hand-picked response: the path enters 1, 2, 3, 4 with knots 5, 4, 3, 2.
fn orthogonal_data() -> (TempDir, String, String) {
    let dir = tempfile::tempdir().unwrap();
    let x = DesignMatrix::identity(8, 8).unwrap();
    let d = write_design(dir.path(), &x);
    let r = write_response(dir.path(), &[5.0, -4.0, 3.0, 2.0, 0.5, 0.25, 0.1, 0.05]);
    (dir, d.display().to_string(), r.display().to_string())
}

fn gaussian_data(n: usize, p: usize, beta: &[f64], seed: u64) -> (TempDir, String, String, DesignMatrix<f64>, ResponseVector<f64>) {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = replicate_rng(seed, 0);
    let x = draw_design(DesignModel::SphereColumns, n, p, &mut rng).unwrap();
    let mut b = beta.to_vec();
    b.resize(p, 0.0);
    let y = draw_response(&x, &b, 1.0, &mut rng).unwrap();
    let d = write_design(dir.path(), &x);
    let r = write_response(dir.path(), &y.values);
    (dir, d.display().to_string(), r.display().to_string(), x, y)
}

#[test]
fn path_reports_one_based_indices() {
    let (_dir, d, r) = orthogonal_data();
    let out = lar(&["path", "--design", &d, "--response", &r, "--steps", "3"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["indices"], serde_json::json!([1, 2, 3, 4]));
    assert_eq!(v["signs"], serde_json::json!([1, -1, 1, 1]));
    assert_eq!(v["knots"], serde_json::json!([5.0, 4.0, 3.0, 2.0]));
    assert_eq!(v["k_max"], 3);
}

#[test]
fn path_formulations_agree() {
    let (_dir, d, r, _, _) = gaussian_data(30, 50, &[4.0, -3.0], 1);
    let out = lar(&["path", "--design", &d, "--response", &r, "--steps", "6", "--formulation", "all"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["agree"], true);
    assert_eq!(v["paths"].as_array().unwrap().len(), 3);
}

#[test]
fn path_writes_to_the_output_file() {
    let (dir, d, r) = orthogonal_data();
    let target = dir.path().join("path.json");
    let out = lar(&["path", "--design", &d, "--response", &r, "--steps", "2", "--out", target.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert_eq!(v["knots"].as_array().unwrap().len(), 3);
}

#[test]
fn known_sigma_test_matches_the_closed_form() {
    let (_dir, d, r) = orthogonal_data();
    let cases = [("0", "1", "2", 0.009050847244626526), ("1", "2", "3", 0.023254538843535042)];
    for (a, b, c, want) in cases {
        let out = lar(&["test", "--design", &d, "--response", &r, "--K", "3", "--a", a, "--b", b, "--c", c, "--sigma", "1"]);
        assert!(out.status.success());
        let v = json(&out);
        assert_eq!(v["method"], "closed-form");
        let got = v["p_value"].as_f64().unwrap();
        assert!((got - want).abs() <= 1e-10 * want, "({a},{b},{c}): {got} vs {want}");
    }
}

#[test]
fn split_test_reports_degrees_of_freedom() {
    let (_dir, d, r, _, _) = gaussian_data(41, 30, &[6.0], 2);
    let out = lar(&["test", "--design", &d, "--response", &r, "--K", "3", "--a", "0", "--b", "1", "--c", "3", "--split", "--points", "1021", "--shifts", "8"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    // The first K + 1 entering columns are projected out.
    assert_eq!(v["split"]["n1"].as_u64().unwrap() + v["split"]["n2"].as_u64().unwrap(), 41 - 4);
    assert!(v["nu"].as_f64().unwrap() > 0.0);
    let p = v["p_value"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));
}

#[test]
fn test_needs_exactly_one_noise_source() {
    let (_dir, d, r) = orthogonal_data();
    let base = ["test", "--design", &d, "--response", &r, "--K", "2", "--a", "0", "--b", "1", "--c", "2"];
    assert!(!lar(&base).status.success());
    let mut both = base.to_vec();
    both.extend(["--sigma", "1", "--split"]);
    assert!(!lar(&both).status.success());
}

#[test]
fn refused_test_exits_with_three() {
    let (dir, x, y) = (0..200u64)
        .find_map(|seed| {
            let mut rng = replicate_rng(seed, 0);
            let x = draw_design(DesignModel::IidGaussian, 12, 200, &mut rng).unwrap();
            let y = draw_response(&x, &vec![0.0; 200], 1.0, &mut rng).unwrap();
            let state = build_correlation_state(&x, &y, None).unwrap();
            path_refusal(&lar_path(&state, 8, Formulation::Projected)).map(|_| (tempfile::tempdir().unwrap(), x, y))
        })
        .expect("no refusing instance found");
    let d = write_design(dir.path(), &x).display().to_string();
    let r = write_response(dir.path(), &y.values).display().to_string();
    let out = lar(&["test", "--design", &d, "--response", &r, "--K", "8", "--a", "0", "--b", "1", "--c", "2", "--sigma", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["outcome"], "refused");
}

#[test]
fn falseneg_reports_the_selected_model() {
    let (_dir, d, r, _, _) = gaussian_data(40, 30, &[12.0], 3);
    let out = lar(&["falseneg", "--design", &d, "--response", &r, "--K", "4", "--rule", "fixed", "--m", "1", "--sigma", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["m_hat"], 1);
    assert_eq!(v["selected"], serde_json::json!([1]));
    let p = v["report"]["p_value"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));
    let missing_m = lar(&["falseneg", "--design", &d, "--response", &r, "--K", "4", "--rule", "fixed"]);
    assert!(!missing_m.status.success());
}

#[test]
fn fdr_rejects_by_benjamini_hochberg() {
    let (_dir, d, r) = orthogonal_data();
    let run = |alpha: &str| json(&lar(&["fdr", "--design", &d, "--response", &r, "--K", "3", "--alpha", alpha, "--sigma", "1"]));
    let v = run("0.2");
    assert_eq!(v["rejected_steps"], serde_json::json!([1, 2, 3]));
    let v = run("0.05");
    assert_eq!(v["rejected_steps"], serde_json::json!([1, 2]));
    assert_eq!(v["rejected_indices"], serde_json::json!([1, 2]));
    assert_eq!(v["k_hat"], 2);
    let p = v["pvalues"][0].as_f64().unwrap();
    assert!((p - 0.009050847244626526).abs() < 1e-12);
}

#[test]
fn malformed_input_exits_with_two() {
    let (dir, d, _) = orthogonal_data();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1.0\nnot-a-number\n").unwrap();
    let out = lar(&["path", "--design", &d, "--response", bad.to_str().unwrap(), "--steps", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let ragged = dir.path().join("ragged.csv");
    std::fs::write(&ragged, "1,0\n0\n").unwrap();
    let out = lar(&["path", "--design", ragged.to_str().unwrap(), "--response", bad.to_str().unwrap(), "--steps", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let config = dir.path().join("config.json");
    std::fs::write(&config, r#"{"experiment": "kmax"}"#).unwrap();
    let out = lar(&["simulate", "--config", config.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_writes_summary_and_records() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{"experiment": "kmax", "n": 20, "p": 40, "K": 5, "design": "iid-gaussian", "replicates": 10, "seed": 1}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = lar(&["simulate", "--config", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["experiment"], "kmax");
    assert_eq!(summary["replicates"], 10);
    let records = std::fs::read_to_string(out_dir.join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 11);
}

#[test]
fn simulate_falls_back_to_the_configured_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    let out_dir = dir.path().join("from-config");
    let text = format!(
        r#"{{"experiment": "kmax", "n": 20, "p": 20, "K": 3, "design": "identity", "replicates": 2, "output": {:?}}}"#,
        out_dir.to_str().unwrap()
    );
    std::fs::write(&config, text).unwrap();
    let out = lar(&["simulate", "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("summary.json").exists());
    std::fs::write(&config, r#"{"experiment": "kmax", "n": 20, "p": 20, "K": 3, "design": "identity", "replicates": 2}"#)
        .unwrap();
    assert_eq!(lar(&["simulate", "--config", config.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn zero_replicates_exit_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{"experiment": "kmax", "n": 20, "p": 40, "K": 5, "design": "iid-gaussian", "replicates": 0}"#,
    )
    .unwrap();
    let out = lar(&["simulate", "--config", config.to_str().unwrap(), "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}
