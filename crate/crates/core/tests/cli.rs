//! End-to-end checks of the command-line interface: artifact determinism,
//! exit-code classes, and override flags.

use std::path::Path;
use std::process::Command;

fn traitpop() -> Command {
    Command::new(env!("CARGO_BIN_EXE_traitpop"))
}

fn write_config(dir: &Path, name: &str, experiment: &str) -> std::path::PathBuf {
    write_config_with(dir, name, experiment, 1.0, 1000)
}

fn write_config_with(
    dir: &Path,
    name: &str,
    experiment: &str,
    b: f64,
    k: u64,
) -> std::path::PathBuf {
    let text = format!(
        r#"{{
  "model": {{
    "rates": {{"kind": "birth_death_poly", "b": {b}, "d": [0.0, 0.0, 0.5]}},
    "gamma": 0.4,
    "rho": 0.001,
    "k": {k},
    "kernel": {{"kind": "uniform_window", "eps": 0.3}}
  }},
  "grid": {{"x_min": -4.0, "x_max": 4.0, "n": 200}},
  "seed": 11,
  "experiment": {experiment}
}}"#
    );
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn identical_config_and_seed_reproduce_identical_digests() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sim.json",
        r#"{"kind": "simulate", "horizon": 2.0, "mode": "nonlinear", "lineages": 5}"#,
    );
    for out in ["a", "b"] {
        let status = traitpop()
            .args(["simulate", "--config"])
            .arg(&cfg)
            .args(["--out"])
            .arg(dir.path().join(out))
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read_to_string(dir.path().join("a/manifest.json")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b/manifest.json")).unwrap();
    assert_eq!(a, b, "manifests differ between identical runs");
    assert!(a.contains("sha256"));
}

#[test]
fn zero_k_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config_with(dir.path(), "bad.json", r#"{"kind": "stationary"}"#, 1.0, 0);
    let output = traitpop()
        .args(["stationary", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("model.k"), "stderr: {stderr}");
}

#[test]
fn subcommand_kind_mismatch_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "st.json", r#"{"kind": "stationary"}"#);
    let output = traitpop()
        .args(["validate", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn nonpositive_eigenvalue_exits_with_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    // growth too weak to beat the jump losses: lambda < 0
    let cfg = write_config_with(dir.path(), "neg.json", r#"{"kind": "stationary"}"#, 0.05, 100);
    let output = traitpop()
        .args(["stationary", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("not positive"), "stderr: {stderr}");
}

#[test]
fn validate_tolerance_breach_exits_statistical_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "val.json",
        r#"{"kind": "validate", "horizon": 2.0, "replicates": 40, "checkpoints": [1.0],
            "tolerance_w1": 1e-9, "n_spine": 200, "min_survivors": 10}"#,
    );
    let out = dir.path().join("out");
    let output = traitpop()
        .args(["validate", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out)
        .args(["--seed", "5"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4));
    // artifacts are written before the statistical verdict
    assert!(out.join("report.json").exists());
    assert!(out.join("checkpoints.csv").exists());
    let report = std::fs::read_to_string(out.join("report.json")).unwrap();
    assert!(report.contains("\"pass\": false"));
}

#[test]
fn validate_passes_with_realistic_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "val.json",
        r#"{"kind": "validate", "horizon": 2.0, "replicates": 40, "checkpoints": [1.0],
            "tolerance_w1": 0.35, "n_spine": 400, "min_survivors": 10}"#,
    );
    let out = dir.path().join("out");
    let status = traitpop()
        .args(["validate", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out)
        .args(["--seed", "5"])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("report.json").exists());
}

#[test]
fn spine_flag_overrides_take_effect() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "spine.json",
        r#"{"kind": "spine", "direction": "forward", "n_paths": 50, "horizon": 1.0,
            "table_dt": 0.005}"#,
    );
    let out = dir.path().join("out");
    let status = traitpop()
        .args(["spine", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out)
        .args(["--direction", "reversed", "--n-paths", "20"])
        .status()
        .unwrap();
    assert!(status.success());
    let stats = std::fs::read_to_string(out.join("stats.json")).unwrap();
    assert!(stats.contains("\"direction\": \"reversed\""), "{stats}");
    assert!(stats.contains("\"n_paths\": 20"), "{stats}");
}

#[test]
fn seed_is_required_somewhere() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_text = r#"{
  "model": {
    "rates": {"kind": "birth_death_poly", "b": 1.0, "d": [0.0, 0.0, 0.5]},
    "gamma": 0.4, "rho": 0.001, "k": 100,
    "kernel": {"kind": "uniform_window", "eps": 0.3}
  },
  "grid": {"x_min": -4.0, "x_max": 4.0, "n": 200},
  "experiment": {"kind": "stationary"}
}"#;
    let cfg = dir.path().join("noseed.json");
    std::fs::write(&cfg, cfg_text).unwrap();
    let output = traitpop()
        .args(["stationary", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    // and the flag satisfies the requirement
    let status = traitpop()
        .args(["stationary", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(dir.path().join("out2"))
        .args(["--seed", "3"])
        .status()
        .unwrap();
    assert!(status.success());
}
