use std::path::Path;
use std::process::{Command, Output};

use snslab::registry::Registry;

fn snslab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_snslab"))
        .args(args)
        .current_dir(dir)
        .env_remove("SNSLAB_JOBS")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, experiment: &str, dt: &str) -> String {
    let text = format!(
        r#"{{
  "basis": {{ "L": 4.0, "cutoff": 1 }},
  "dynamics": {{ "nu": 1.0, "dt": {dt} }},
  "master_seed": 5,
  "output_dir": "out-{name}",
  "experiment": {experiment}
}}
"#
    );
    let file = format!("{name}.json");
    std::fs::write(dir.join(&file), text).unwrap();
    file
}

const SMALL_CALIBRATION: &str =
    r#"{ "kind": "calibrate", "plan": { "c0_samples": 100, "transport_samples": 10, "tail_paths": 1000 } }"#;

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn help_lists_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let out = snslab(&["--help"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for (name, what) in snslab::SUBCOMMANDS {
        assert!(text.contains(name), "{name} missing");
        assert!(text.contains(what));
    }
}

#[test]
fn unknown_subcommand_prints_usage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "x", r#"{ "kind": "simulate", "t": 0.01 }"#, "0.001");
    let out = snslab(&["frobnicate", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("Usage"));
    assert!(stderr(&out).contains("frobnicate"));
}

#[test]
fn zero_dt_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad", r#"{ "kind": "simulate", "t": 0.01 }"#, "0");
    let out = snslab(&["simulate", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("dynamics.dt"), "{err}");
    assert!(err.contains("bad.json:3:"), "{err}");
}

#[test]
fn malformed_json_reports_a_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("m.json"), "{\n  \"basis\": {\n    \"L\": ,\n  }\n}\n").unwrap();
    let out = snslab(&["simulate", "--config", "m.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("m.json:3:"), "{}", stderr(&out));
}

#[test]
fn experiment_must_match_the_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s", r#"{ "kind": "simulate", "t": 0.01 }"#, "0.001");
    let out = snslab(&["martingale", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verification_needs_a_calibration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "d", r#"{ "kind": "det-bound", "cases": 5 }"#, "0.001");
    let out = snslab(&["det-bound", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("run `snslab calibrate`"), "{}", stderr(&out));
    assert!(!dir.path().join("out-d").exists());
}

#[test]
fn calibration_appends_versions_and_unlocks_experiments() {
    let dir = tempfile::tempdir().unwrap();
    let cal = write_config(dir.path(), "cal", SMALL_CALIBRATION, "0.001");
    assert!(snslab(&["calibrate", "--config", &cal], dir.path()).status.success());
    let first = Registry::open(&dir.path().join("registry.json")).unwrap();
    assert_eq!(first.entries.len(), 1);
    assert!(snslab(&["calibrate", "--config", &cal, "--seed", "6"], dir.path()).status.success());
    let second = Registry::open(&dir.path().join("registry.json")).unwrap();
    assert_eq!(second.entries.len(), 2);
    assert_eq!(second.entries[0], first.entries[0]);
    assert_eq!(second.entries[1].version, 2);

    let cfg = write_config(dir.path(), "d", r#"{ "kind": "det-bound", "cases": 5 }"#, "0.001");
    let out = snslab(&["det-bound", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out-d/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["calibration"]["version"], 2);
    assert_eq!(manifest["rng"]["algorithm"], snslab_core::rng::RNG_ALGORITHM);

    // Another time step has no calibration yet.
    let other = write_config(dir.path(), "d2", r#"{ "kind": "det-bound", "cases": 5 }"#, "0.002");
    assert_eq!(snslab(&["det-bound", "--config", &other], dir.path()).status.code(), Some(1));
}

#[test]
fn reruns_are_byte_identical_for_any_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "m",
        r#"{ "kind": "martingale", "t": 0.02, "x0": { "kind": "random", "a_norm": 1.0 }, "modes": [0, 4], "n": 50 }"#,
        "0.001",
    );
    assert!(snslab(&["martingale", "--config", &cfg, "--out", "a", "--jobs", "1"], dir.path()).status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_snslab"))
        .args(["martingale", "--config", &cfg, "--out", "b", "--jobs", "1"])
        .current_dir(dir.path())
        .env("SNSLAB_JOBS", "3")
        .output()
        .unwrap();
    assert!(out.status.success());
    let a = std::fs::read(dir.path().join("a/data.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/data.csv")).unwrap();
    assert_eq!(a, b);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("b/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["jobs"], 3);
    for f in ["manifest.json", "result.json", "data.csv"] {
        assert!(dir.path().join("a").join(f).exists());
    }
}

#[test]
fn seed_override_changes_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s", r#"{ "kind": "simulate", "t": 0.02, "x0": { "kind": "random", "a_norm": 1.0 } }"#, "0.001");
    assert!(snslab(&["simulate", "--config", &cfg, "--out", "a"], dir.path()).status.success());
    assert!(snslab(&["simulate", "--config", &cfg, "--out", "b", "--seed", "99"], dir.path()).status.success());
    let a = std::fs::read(dir.path().join("a/data.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/data.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn failed_verification_exits_with_two() {
    // Far too few paths for the fit: the tail verdict fails, the run does not.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "o",
        r#"{ "kind": "ou-tails", "epsilon": 0.01, "n": 10, "moment_times": [], "ks_modes": [] }"#,
        "0.001",
    );
    let out = snslab(&["ou-tails", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(dir.path().join("out-o/result.json").exists());
}
