use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use oscitrack_cli::{cmd_check, cmd_simulate, cmd_sweep, ExperimentConfig, RunOptions};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn bundled() -> Vec<PathBuf> {
    let mut v: Vec<_> = fs::read_dir(configs()).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

fn load(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&configs().join(name)).unwrap()
}

fn check_exit(name: &str) -> (i32, String) {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_oscitrack"))
        .args(["check", "--config"])
        .arg(configs().join(name))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(dir.path().join("report.kv").exists());
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn bundled_configs_round_trip() {
    let paths = bundled();
    assert!(paths.len() >= 4);
    for p in paths {
        let cfg = ExperimentConfig::load(&p).unwrap();
        let text = cfg.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg, "{}", p.display());
    }
}

#[test]
fn unknown_keys_and_bad_versions_rejected() {
    let base = fs::read_to_string(configs().join("flat_single.toml")).unwrap();
    assert!(ExperimentConfig::from_toml(&base).is_ok());
    assert!(ExperimentConfig::from_toml(&format!("{base}\n[output]\ncolour = true\n")).is_err());
    assert!(ExperimentConfig::from_toml(&base.replace("max_level = 3", "max_level = 3\nsamplez = 3")).is_err());
    assert!(ExperimentConfig::from_toml(&base.replace("schema_version = 1", "schema_version = 9")).is_err());
    assert!(ExperimentConfig::from_toml(&base.replace("kind = \"flat\"", "kind = \"hovercraft\"")).is_err());
}

#[test]
fn check_exit_codes() {
    let (code, stdout) = check_exit("submarine.toml");
    assert_eq!(code, 0);
    assert!(stdout.contains("corollary_Z at l=2"), "{stdout}");
    let (code, stdout) = check_exit("hovercraft.toml");
    assert_eq!(code, 0);
    assert!(stdout.contains("corollary_H at l=1"), "{stdout}");
    // one field on the plane: <Y:Y> = 0 so every family has rank 1
    assert_eq!(check_exit("flat_single.toml").0, 2);
}

#[test]
fn check_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let r = cmd_check(&load("submarine.toml"), &RunOptions::new(dir.path())).unwrap();
    assert_eq!(r.exit_code, 0);
    let kv = fs::read_to_string(dir.path().join("report.kv")).unwrap();
    assert!(kv.contains("rank.sym1.1.min=5"));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["corollary_z"]["level"], 2);
}

#[test]
fn missing_config_fails_with_exit_one() {
    let out = Command::new(env!("CARGO_BIN_EXE_oscitrack"))
        .args(["simulate", "--config", "/nonexistent.toml", "--out", "/tmp"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_without_synthesis_section_fails() {
    let dir = tempfile::tempdir().unwrap();
    assert!(cmd_simulate(&load("flat_single.toml"), &RunOptions::new(dir.path())).is_err());
}

#[test]
fn admissible_reference_is_tracked_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let s = cmd_simulate(&load("hovercraft_rest.toml"), &RunOptions::new(dir.path())).unwrap();
    assert_eq!(s.level, 0);
    assert!(s.sup_error < 1e-6);
}

#[test]
fn hovercraft_sideways_simulation_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let s = cmd_simulate(&load("hovercraft.toml"), &RunOptions::new(dir.path())).unwrap();
    assert_eq!((s.mode.as_str(), s.level), ("H", 1));
    assert!(s.sup_error < 0.05, "{}", s.sup_error);
    for f in ["trajectory.csv", "reference.csv", "law.csv", "law.json", "summary.json", "tracking.svg", "controls.svg"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(header, "t,theta,x1,x2,omega,v1,v2,u1,u2");
    assert_eq!(csv.lines().count(), 2002);
}

#[test]
fn hovercraft_sweep_decreases_and_is_deterministic_across_jobs() {
    let cfg = load("hovercraft.toml");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let t1 = cmd_sweep(&cfg, &RunOptions { out: a.path().into(), seed: None, jobs: Some(1) }).unwrap();
    let t2 = cmd_sweep(&cfg, &RunOptions { out: b.path().into(), seed: None, jobs: Some(2) }).unwrap();
    assert_eq!(t1.len(), 2);
    assert!(t1[1].error < t1[0].error);
    let order = t1[1].order.unwrap();
    assert!((0.7..1.3).contains(&order), "{order}");
    let read = |d: &Path| fs::read(d.join("convergence.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    assert_eq!(t1[1].error, t2[1].error);
}

#[test]
fn sweep_rejects_increasing_list() {
    let mut cfg = load("hovercraft.toml");
    cfg.sweep.as_mut().unwrap().eps_list = vec![0.02, 0.04];
    let dir = tempfile::tempdir().unwrap();
    assert!(cmd_sweep(&cfg, &RunOptions::new(dir.path())).is_err());
}
