//! End-to-end tests of the `umom` binary: argument handling, exit codes,
//! the pinned CSV format, and byte-identical output under a fixed seed.

use std::path::Path;
use std::process::{Command, Output};

fn umom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_umom"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn estimate_six_values_matches_hand_enumeration() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("six.txt");
    write(&data, "# comment line\n1\n2\n3\n\n4\n5\n6\n");
    let record = dir.path().join("record.json");
    let out = umom(&[
        "estimate",
        "--data",
        data.to_str().unwrap(),
        "--kernel",
        "product",
        "--blocks",
        "3",
        "--out",
        record.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("robust estimate    = 8.25"), "{stdout}");
    // machine-readable record carries the same value and exact eval counts
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&record).unwrap()).unwrap();
    assert_eq!(json["robust"]["value"], 8.25);
    assert_eq!(json["robust"]["tuple_count"], 3);
    assert_eq!(json["robust"]["kernel_eval_count"], 12);
    assert_eq!(json["classical"]["kernel_eval_count"], 15);
}

#[test]
fn estimate_rejects_out_of_range_delta_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.txt");
    write(&data, "1\n2\n3\n4\n");
    let out = umom(&[
        "estimate",
        "--data",
        data.to_str().unwrap(),
        "--kernel",
        "product",
        "--delta",
        "0.6",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("delta"), "{err}");
}

#[test]
fn estimate_reports_minimal_n_when_sample_too_small() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.txt");
    write(&data, "1\n2\n3\n4\n5\n");
    let out = umom(&[
        "estimate",
        "--data",
        data.to_str().unwrap(),
        "--kernel",
        "product",
        "--delta",
        "0.01",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("need n >= 640"), "{err}");
}

#[test]
fn estimate_rejects_unknown_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.txt");
    write(&data, "1\n2\n");
    let out = umom(&[
        "estimate",
        "--data",
        data.to_str().unwrap(),
        "--kernel",
        "cubic",
        "--blocks",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn estimate_rejects_unparseable_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.txt");
    write(&data, "1\ntwo\n3\n");
    let out = umom(&[
        "estimate",
        "--data",
        data.to_str().unwrap(),
        "--kernel",
        "mean",
        "--blocks",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("cannot parse"), "{err}");
}

fn small_sweep_config(dir: &Path, out_csv: &Path) -> std::path::PathBuf {
    let cfg = dir.join("sweep.json");
    write(
        &cfg,
        &format!(
            r#"{{
  "distribution": {{ "type": "normal" }},
  "kernel": "product",
  "n_grid": [256, 320, 384, 512],
  "delta": 0.2,
  "replicates": 100,
  "seed": 99,
  "bound_sigma": 1.0,
  "out": "{}"
}}"#,
            out_csv.display()
        ),
    );
    cfg
}

#[test]
fn rate_sweep_csv_has_pinned_header_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");
    let cfg = small_sweep_config(dir.path(), &csv_a);

    let out = umom(&["rate-sweep", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let again = umom(&[
        "rate-sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        csv_b.to_str().unwrap(),
    ]);
    assert!(again.status.success());

    let a = std::fs::read(&csv_a).unwrap();
    let b = std::fs::read(&csv_b).unwrap();
    assert_eq!(a, b, "same config and seed must give byte-identical CSV");

    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "estimator,n,delta,replicates,q50,q90,q1md,slope_group,nonfinite_count"
    );
    // 3 estimators x 4 grid points
    assert_eq!(text.lines().count(), 1 + 12);
    // quantiles nondecreasing in level on every row; here delta = 0.2,
    // so the levels order as 0.5 < 0.8 (= 1 - delta) < 0.9
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let q50: f64 = f[4].parse().unwrap();
        let q90: f64 = f[5].parse().unwrap();
        let q1md: f64 = f[6].parse().unwrap();
        assert!(q50 <= q1md && q1md <= q90, "{line}");
        let nonfinite: u64 = f[8].parse().unwrap();
        assert_eq!(nonfinite, 0, "{line}");
    }
    // stdout mirrors the file
    assert_eq!(String::from_utf8(out.stdout).unwrap(), text);
}

#[test]
fn rate_sweep_rejects_short_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    write(
        &cfg,
        r#"{
  "distribution": { "type": "normal" },
  "kernel": "product",
  "n_grid": [256, 320, 384],
  "delta": 0.2,
  "replicates": 100,
  "seed": 1
}"#,
    );
    let out = umom(&["rate-sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn rate_sweep_rejects_undersized_grid_point_with_minimal_n() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    // delta = 0.2 needs n >= 64*2*ceil(ln 5) = 256
    write(
        &cfg,
        r#"{
  "distribution": { "type": "normal" },
  "kernel": "product",
  "n_grid": [128, 256, 320, 384],
  "delta": 0.2,
  "replicates": 100,
  "seed": 1
}"#,
    );
    let out = umom(&["rate-sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("need n >= 256"), "{err}");
}

#[test]
fn stable_check_passes_and_fails_by_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let ok_cfg = dir.path().join("ok.json");
    write(
        &ok_cfg,
        r#"{
  "checks": [ { "alpha": 1.5, "sum_terms": 4 } ],
  "ks_samples": 20000,
  "symmetry_samples": 20000,
  "hill_alphas": [],
  "sign_tolerance": 0.012,
  "normal_reference_check": true,
  "ks_threshold": 0.02,
  "mismatch_pair": [1.2, 2.0],
  "mismatch_min_ks": 0.03,
  "seed": 7
}"#,
    );
    let out = umom(&["stable-check", "--config", ok_cfg.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("PASS sum-stability"), "{stdout}");

    // an impossible tolerance must fail with exit 3
    let bad_cfg = dir.path().join("bad.json");
    write(
        &bad_cfg,
        r#"{
  "checks": [ { "alpha": 1.5, "sum_terms": 2 } ],
  "ks_samples": 2000,
  "symmetry_samples": 2000,
  "hill_alphas": [],
  "normal_reference_check": false,
  "mismatch_pair": null,
  "sign_tolerance": 1e-9,
  "seed": 7
}"#,
    );
    let out = umom(&["stable-check", "--config", bad_cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("FAIL sign-symmetry"), "{stdout}");
}

#[test]
fn cluster_runs_generated_instance_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cluster.json");
    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");
    write(
        &cfg,
        r#"{
  "generator": { "centers": [[-2.0, 0.0], [2.0, 0.0]], "sd": 0.7 },
  "n": 1024,
  "dissimilarity": "sqeuclidean",
  "partitions": [
    { "label": "good", "type": "centers", "centers": [[-2,0],[2,0]] },
    { "label": "bad",  "type": "threshold", "feature": 1, "thresholds": [0.0] }
  ],
  "delta": 0.05,
  "seed": 5,
  "oracle_pairs": 20000
}"#,
    );
    let out = umom(&[
        "cluster",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        csv_a.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(
        stdout.contains("selected (median-of-means): good"),
        "{stdout}"
    );
    let out2 = umom(&[
        "cluster",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        csv_b.to_str().unwrap(),
    ]);
    assert!(out2.status.success());
    assert_eq!(
        std::fs::read(&csv_a).unwrap(),
        std::fs::read(&csv_b).unwrap()
    );
    let text = std::fs::read_to_string(&csv_a).unwrap();
    assert!(text.starts_with(
        "partition,mom_risk,classical_risk,oracle_risk,oracle_se,mom_selected,classical_selected\n"
    ));
}

#[test]
fn cluster_rejects_malformed_class_descriptions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cluster.json");
    // thresholds not strictly increasing
    write(
        &cfg,
        r#"{
  "generator": { "centers": [[0.0, 0.0]], "sd": 1.0 },
  "n": 1024,
  "dissimilarity": "euclidean",
  "partitions": [
    { "label": "bad", "type": "threshold", "feature": 0, "thresholds": [1.0, 1.0] }
  ],
  "delta": 0.05,
  "seed": 1
}"#,
    );
    let out = umom(&["cluster", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("strictly increasing"), "{err}");
}

#[test]
fn cluster_rejects_sample_below_hypothesis() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cluster.json");
    // N = 1, delta = 0.05: needs n >= 128 * ceil(ln 20) = 384
    write(
        &cfg,
        r#"{
  "generator": { "centers": [[0.0, 0.0]], "sd": 1.0 },
  "n": 200,
  "dissimilarity": "euclidean",
  "partitions": [
    { "label": "all", "type": "threshold", "feature": 0, "thresholds": [0.0] }
  ],
  "delta": 0.05,
  "seed": 1
}"#,
    );
    let out = umom(&["cluster", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("need n >= 384"), "{err}");
}
