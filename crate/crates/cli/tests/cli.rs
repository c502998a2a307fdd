use std::path::Path;
use std::process::{Command, Output};

fn pullpush(args: &[&str], root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pullpush"))
        .args(args)
        .env("PULLPUSH_OUTPUT_ROOT", root)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn data_rows(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count() - 1
}

fn train_one_epoch(root: &Path, experiment: &str) -> std::path::PathBuf {
    let cfg = write_config(root, &format!("{experiment}.toml"), &format!("experiment = \"{experiment}\"\n[training]\nepochs = 1\n"));
    let out = pullpush(&["train", &cfg, "--log-every", "0"], root);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    root.join(experiment)
}

#[test]
fn single_epoch_run_writes_its_artifacts() {
    let root = tempfile::tempdir().unwrap();
    let dir = train_one_epoch(root.path(), "ode-forward");
    assert_eq!(data_rows(&dir.join("metrics.csv")), 1);
    for f in ["run.json", "checkpoint.json", "resolved-config.toml"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let resolved = std::fs::read_to_string(dir.join("resolved-config.toml")).unwrap();
    assert!(resolved.contains("epochs = 1"), "{resolved}");
}

#[test]
fn bad_configs_exit_with_two() {
    let root = tempfile::tempdir().unwrap();
    let cases = [
        "experiment = \"ode-forward\"\nepochz = 3\n",
        "experiment = \"ode-forward\"\n[training]\nbatch_size = 0\n",
        "experiment = \"ode-forward\"\n[inverse]\nnoise = 0.1\n",
    ];
    for (i, body) in cases.iter().enumerate() {
        let cfg = write_config(root.path(), &format!("bad{i}.toml"), body);
        let out = pullpush(&["train", &cfg], root.path());
        assert_eq!(out.status.code(), Some(2), "{body}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!root.path().join("ode-forward").join("metrics.csv").exists());
    }
    let out = pullpush(&["train", "/nonexistent/run.toml"], root.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_solvers_passes_and_flags_a_large_step() {
    let root = tempfile::tempdir().unwrap();
    let ok = pullpush(&["verify-solvers"], root.path());
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stdout));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("all oracles pass"));
    let bad = pullpush(&["verify-solvers", "--cfl-dt", "5e-4", "--json"], root.path());
    assert_eq!(bad.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert_eq!(report["all_pass"], false);
}

#[test]
fn diagnose_writes_a_report_and_rejects_the_wrong_experiment() {
    let root = tempfile::tempdir().unwrap();
    let dir = train_one_epoch(root.path(), "ode-forward");
    let ck = dir.join("checkpoint.json");
    let ck = ck.to_str().unwrap();
    let out = pullpush(&["diagnose", ck, "ode-forward", "--json"], root.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let d: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(d["experiment"], "ode-forward");
    assert!(dir.join("diagnosis.json").exists());
    let wrong = pullpush(&["diagnose", ck, "burgers-forward"], root.path());
    assert_eq!(wrong.status.code(), Some(2));
}

#[test]
fn export_writes_one_row_per_grid_point() {
    let root = tempfile::tempdir().unwrap();
    for (experiment, rows) in [("allen-cahn-forward", 101), ("fokker-planck-steady", 1024)] {
        let dir = train_one_epoch(root.path(), experiment);
        let ck = dir.join("checkpoint.json");
        let out = pullpush(&["export-fields", ck.to_str().unwrap(), experiment], root.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(data_rows(&dir.join("fields").join("u.csv")), rows, "{experiment}");
    }
}

#[test]
fn export_warns_outside_the_trained_range() {
    let root = tempfile::tempdir().unwrap();
    let dir = train_one_epoch(root.path(), "ode-forward");
    let ck = dir.join("checkpoint.json");
    let out = pullpush(&["export-fields", ck.to_str().unwrap(), "ode-forward", "--param", "alpha=3"], root.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let bad = pullpush(&["export-fields", ck.to_str().unwrap(), "ode-forward", "--param", "nu=1"], root.path());
    assert_eq!(bad.status.code(), Some(2));
}
