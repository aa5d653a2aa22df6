use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_configcount"))
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn run_config(dir: &Path, name: &str) -> Output {
    let text = std::fs::read_to_string(scenarios().join(name)).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    bin().args(["run", "--config"]).arg(&path).output().unwrap()
}

#[test]
fn scenario_outputs_are_byte_identical() {
    for (name, out) in [
        ("ff_count.toml", "out/ff_count.csv"),
        ("ff_regularize.toml", "out/ff_regularize.json"),
        ("lattice_scan.toml", "out/lattice_scan.csv"),
        ("increment.toml", "out/increment.json"),
    ] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        assert!(run_config(a.path(), name).status.success(), "{name}");
        assert!(run_config(b.path(), name).status.success(), "{name}");
        let first = std::fs::read(a.path().join(out)).unwrap();
        assert_eq!(first, std::fs::read(b.path().join(out)).unwrap(), "{name}");
        let manifest: serde_json::Value =
            serde_json::from_slice(&std::fs::read(a.path().join(format!("{out}.manifest.json"))).unwrap()).unwrap();
        assert_eq!(manifest["rng"], "ChaCha8Rng/rand_chacha-0.3/seed_from_u64");
        assert!(manifest["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn ff_count_has_one_row_per_side_pair() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_config(dir.path(), "ff_count.toml").status.success());
    let csv = std::fs::read_to_string(dir.path().join("out/ff_count.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# configcount-csv schema=1 kind=ff_count"));
    assert_eq!(lines.next(), Some("q,d,t,density,trial,N,M,gap,lower_bound,box_min"));
    assert_eq!(lines.count(), 16);
}

#[test]
fn config_errors_exit_two_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "kind = \"ff_count\"\nseed = 1\noutput = \"x.csv\"\n[params]\nq = 5\nd = 2\ndensty = 0.5\n").unwrap();
    let out = bin().args(["run", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("densty"), "{err}");

    std::fs::write(&path, "kind = \"ff_count\"\nseed = 1\noutput = \"x.csv\"\n[params]\nq = 23\nd = 2\ndensity = 0.5\n").unwrap();
    let out = bin().args(["run", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap exceeded"));
    assert!(!dir.path().join("x.csv").exists());
}

#[test]
fn subcommands_write_to_stdout() {
    let out = bin().args(["ff-decay", "--q-max", "5"]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 2 + 2 + 4);

    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("segment.json");
    std::fs::write(&spec, r#"{"n": 5, "points": [[0,0,0,0,0],[1,0,0,0,0]]}"#).unwrap();
    let out = bin().args(["lattice-count", "--lambda2", "2", "--verify-naive", "--spec"]).arg(&spec).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().ends_with("2,1,40,14.142135623730947,true\n"));

    let out = bin()
        .args(["uniformity", "--n", "2", "--side", "6", "--eps", "0.5", "--modulus", "3"])
        .args(["--generator", r#"{"kind":"random_density","delta":0.5}"#, "--seed", "4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["overall"], 0.5);
}

#[test]
fn lattice_acceptance_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let out = bin().args(["acceptance", "--suite", "lattice", "--json"]).arg(&json).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.contains(" PASS ")).count(), 4);
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(json).unwrap()).unwrap();
    assert_eq!(report["criteria"].as_array().unwrap().len(), 4);
    let bad = bin().args(["acceptance", "--suite", "nope"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
