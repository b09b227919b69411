//! End-to-end runs of the `seglab` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn seglab(dir: &Path, args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_seglab"))
        .args(args)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .expect("binary runs");
    out.status.code().expect("exit code")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn artifacts(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = match fs::read_dir(dir.join("out")) {
        Ok(rd) => rd.map(|e| e.unwrap().path()).collect(),
        Err(_) => Vec::new(),
    };
    v.sort();
    v
}

fn json_artifact(dir: &Path, command: &str) -> Value {
    let p = artifacts(dir)
        .into_iter()
        .find(|p| {
            let n = p.file_name().unwrap().to_str().unwrap();
            n.starts_with(command) && n.ends_with(".json")
        })
        .expect("json artifact");
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn partition_of_four_equal_arcs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "p.json", r#"{"arcs_equal": {"k": 4}}"#);
    assert_eq!(seglab(dir.path(), &["partition", "--config", &cfg]), 0);
    let names: Vec<String> = artifacts(dir.path())
        .iter()
        .map(|p| p.file_name().unwrap().to_str().unwrap().to_string())
        .collect();
    assert_eq!(names.len(), 2);
    let hash = names[0].trim_start_matches("partition-").trim_end_matches(".csv");
    assert_eq!(names[1], format!("partition-{hash}.json"));
    let v = json_artifact(dir.path(), "partition");
    assert_eq!(v["result"]["partition_value"].as_f64().unwrap(), 4.0);
    assert_eq!(v["config_hash"].as_str().unwrap(), hash);
}

#[test]
fn malformed_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", r#"{"ks": [1, 4], "r": "#);
    assert_eq!(seglab(dir.path(), &["decay", "--config", &cfg]), 3);
    assert!(artifacts(dir.path()).is_empty());

    let cfg = write_config(dir.path(), "extra.json", r#"{"ks": [1, 4], "r": 1, "n": 2, "colour": 1}"#);
    assert_eq!(seglab(dir.path(), &["decay", "--config", &cfg]), 3);
    assert_eq!(seglab(dir.path(), &["decay", "--config", "/nonexistent/cfg.json"]), 3);
    assert_eq!(seglab(dir.path(), &["solve"]), 3);
    assert!(artifacts(dir.path()).is_empty());
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "d.json", r#"{"ks": [1, 4, 9], "r": 2, "n": 3}"#);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [a.path(), b.path()] {
        assert_eq!(seglab(d, &["decay", "--config", &cfg, "--seed", "5", "--threads", "2"]), 0);
    }
    let (fa, fb) = (artifacts(a.path()), artifacts(b.path()));
    assert_eq!(fa.len(), 2);
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.file_name(), y.file_name());
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
    }
    // the seed is part of the hash
    let c = tempfile::tempdir().unwrap();
    assert_eq!(seglab(c.path(), &["decay", "--config", &cfg, "--seed", "6"]), 0);
    assert_ne!(artifacts(c.path())[0].file_name(), fa[0].file_name());
}

#[test]
fn solve_then_analyse_the_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let solve = r#"{
        "grid": {"n_r": 24, "n_theta": 48},
        "k": 2,
        "boundary": {"kind": {"profile": {"d": 1, "rotation": 0.0, "assignment": [0, 1]}}, "amplitude": 30},
        "solve": {"beta": 50, "beta_schedule": [1, 10, 50]}
    }"#;
    let cfg = write_config(dir.path(), "s.json", solve);
    assert_eq!(seglab(dir.path(), &["solve", "--config", &cfg]), 0);
    let v = json_artifact(dir.path(), "solve");
    assert!(v["result"]["report"]["converged"].as_bool().unwrap());
    let csv = artifacts(dir.path()).into_iter().find(|p| p.extension().unwrap() == "csv").unwrap();

    let almgren = format!(
        r#"{{"source": {{"field_csv": {{"path": "{}", "grid": {{"n_r": 24, "n_theta": 48}}}}}}, "beta": 50}}"#,
        csv.display()
    );
    let cfg = write_config(dir.path(), "a.json", &almgren);
    assert_eq!(seglab(dir.path(), &["almgren", "--config", &cfg]), 0);
    let v = json_artifact(dir.path(), "almgren");
    let d_hat = v["result"]["growth"]["d_hat"].as_f64().unwrap();
    assert!(d_hat > 0.0 && d_hat < 1.2, "{d_hat}");

    let blowdown = format!(
        r#"{{"source": {{"field_csv": {{"path": "{}", "grid": {{"n_r": 24, "n_theta": 48}}}}}}, "beta": 50, "d": 1, "windows": [0.5, 1.0]}}"#,
        csv.display()
    );
    let cfg = write_config(dir.path(), "b.json", &blowdown);
    assert_eq!(seglab(dir.path(), &["blowdown", "--config", &cfg]), 0);
    let v = json_artifact(dir.path(), "blowdown");
    assert_eq!(v["result"]["fits"].as_array().unwrap().len(), 2);
}

#[test]
fn profile_source_and_acf() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "a.json",
        r#"{
            "source": {"profile": {"profile": {"d": 1, "rotation": 0.0, "assignment": [0, 1]},
                                   "grid": {"n_r": 64, "n_theta": 128, "r_max": 4}}},
            "acf": {"group": [0, 1], "q": 1.9}
        }"#,
    );
    assert_eq!(seglab(dir.path(), &["almgren", "--config", &cfg]), 0);
    let v = json_artifact(dir.path(), "almgren");
    assert!(v["result"]["acf"]["worst_drop"].as_f64().unwrap() <= 1e-3);
    assert_eq!(v["result"]["doubling"]["d"].as_f64().unwrap(), 1.0);
}

#[test]
fn profile1d_reports_defect() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "p.json", r#"{"a": 1, "x_max": 10}"#);
    assert_eq!(seglab(dir.path(), &["profile1d", "--config", &cfg]), 0);
    let v = json_artifact(dir.path(), "profile1d");
    assert!(v["result"]["symmetry_defect"].as_f64().unwrap() < 1e-6);
    assert!(v["result"]["monotone_on_half_window"].as_bool().unwrap());
}

#[test]
fn coarsened_verify_fails_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "v.json", r#"{"fault": {"coarsen": 16}}"#);
    assert_eq!(seglab(dir.path(), &["verify", "--config", &cfg, "--threads", "4"]), 1);
    let v = json_artifact(dir.path(), "verify");
    let crit = v["result"]["criteria"].as_array().unwrap();
    assert_eq!(crit.len(), 12);
    // every criterion reports a finite measurement, pass or fail
    for c in crit {
        assert!(c["measured"].as_f64().is_some(), "{c}");
    }
    // the frequency of the homogeneous profiles degrades far past its tolerance
    let c4 = &crit[3];
    assert!(!c4["pass"].as_bool().unwrap());
    assert!(c4["measured"].as_f64().unwrap() > 10.0 * c4["tolerance"].as_f64().unwrap());
    // the sphere eigenvalues move but stay second-order accurate
    for id in [2, 3] {
        let c = &crit[id - 1];
        let err = (c["measured"].as_f64().unwrap() - c["target"].as_f64().unwrap()).abs();
        assert!(err > 1e-3 * c["target"].as_f64().unwrap(), "criterion {id}: {err}");
    }
    assert!(crit[0]["pass"].as_bool().unwrap());
}
