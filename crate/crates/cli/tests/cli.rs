use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn rcmab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcmab"))
        .args(args)
        .env_remove("BANDIT_DR_SEED")
        .output()
        .expect("spawn rcmab")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn data_rows(csv: &str) -> usize {
    csv.lines().count() - 1
}

const MINIMAL: &str = "n = 2\nhorizon = 3\npolicy = cucb-avg\ntarget.value = 1.0\nprofile = 0.9,0.5\n";

#[test]
fn minimal_run_has_three_rows() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.txt", MINIMAL);
    let out = tmp.path().join("out");
    let res = rcmab(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = fs::read_to_string(out.join("steps.csv")).unwrap();
    assert_eq!(data_rows(&csv), 3);
    assert!(csv.starts_with("t,policy,replicate,target,selected,realized_loss,pseudo_regret,relative_error\n"));
    assert!(out.join("summary.json").exists());
    assert!(out.join("manifest.json").exists());
}

#[test]
fn fifty_replicates_give_150_rows() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.txt", &format!("{MINIMAL}replicates = 50\n"));
    let out = tmp.path().join("out");
    assert!(rcmab(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());
    let csv = fs::read_to_string(out.join("steps.csv")).unwrap();
    assert_eq!(data_rows(&csv), 150);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.txt",
        "n = 8\nhorizon = 40\nreplicates = 4\ntarget.value = 2.5\nmaster_seed = 11\n",
    );
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(rcmab(&["run", "--config", &cfg, "--out", a.to_str().unwrap()]).status.success());
    assert!(rcmab(&["run", "--config", &cfg, "--out", b.to_str().unwrap(), "--threads", "1"])
        .status
        .success());
    let csv_a = fs::read(a.join("steps.csv")).unwrap();
    assert_eq!(csv_a, fs::read(b.join("steps.csv")).unwrap());
    assert_eq!(
        fs::read(a.join("summary.json")).unwrap(),
        fs::read(b.join("summary.json")).unwrap()
    );
}

#[test]
fn echoed_config_reproduces_the_csv() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.txt",
        "n = 6\nhorizon = 30\nreplicates = 2\ntarget = daily-peak\nload.seed = 3\n",
    );
    let first = tmp.path().join("first");
    let res = rcmab(&["run", "--config", &cfg, "--out", first.to_str().unwrap(), "--seed", "77"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(first.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["resolved"]["master_seed"], 77);
    let echoed = summary["config"]["text"].as_str().unwrap();
    let cfg2 = write_config(tmp.path(), "echo.txt", echoed);
    let second = tmp.path().join("second");
    assert!(rcmab(&["run", "--config", &cfg2, "--out", second.to_str().unwrap()]).status.success());
    assert_eq!(
        fs::read(first.join("steps.csv")).unwrap(),
        fs::read(second.join("steps.csv")).unwrap()
    );
}

#[test]
fn seed_precedence() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.txt", "n = 4\nhorizon = 5\nmaster_seed = 1\n");
    let run = |extra: &[&str], env: Option<&str>| {
        let out = tmp.path().join(format!("o{}", extra.len() + env.map_or(0, |_| 10)));
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_rcmab"));
        cmd.args(["run", "--config", &cfg, "--out", out.to_str().unwrap()]).args(extra);
        cmd.env_remove("BANDIT_DR_SEED");
        if let Some(v) = env {
            cmd.env("BANDIT_DR_SEED", v);
        }
        assert!(cmd.output().unwrap().status.success());
        let summary: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
        summary["config"]["resolved"]["master_seed"].as_u64().unwrap()
    };
    assert_eq!(run(&[], None), 1);
    assert_eq!(run(&[], Some("5")), 5);
    assert_eq!(run(&["--seed", "9"], Some("5")), 9);
}

#[test]
fn compare_writes_one_block_per_policy() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.txt", "n = 5\nhorizon = 20\nreplicates = 3\ntarget.value = 1.5\n");
    let out = tmp.path().join("out");
    let res = rcmab(&[
        "compare", "--config", &cfg, "--out", out.to_str().unwrap(), "--policies", "cucb-avg,cucb,ts,greedy",
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = fs::read_to_string(out.join("steps.csv")).unwrap();
    assert_eq!(data_rows(&csv), 20 * 3 * 4);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let names: Vec<&str> = summary["policies"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["policy"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["cucb-avg", "cucb", "ts", "greedy"]);
    assert!(summary["diagnostics"]["epsilon0"].is_number());
}

#[test]
fn unknown_policy_lists_valid_names() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.txt", MINIMAL);
    let out = tmp.path().join("out");
    let res = rcmab(&["compare", "--config", &cfg, "--out", out.to_str().unwrap(), "--policies", "cucb-avg,ucb9"]);
    assert_eq!(res.status.code(), Some(1));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("ucb9") && err.contains("cucb-avg") && err.contains("ts"), "{err}");
}

#[test]
fn invalid_config_names_the_field() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.txt", "n = 3\nalpha = -1\n");
    let out = tmp.path().join("out");
    let res = rcmab(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("alpha"));
}

#[test]
fn sweep_writes_a_table() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.txt", "n = 5\nhorizon = 15\nreplicates = 2\ntarget.value = 1.5\n");
    let out = tmp.path().join("out");
    let res = rcmab(&[
        "sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--axis", "alpha", "--values", "0.5,2.5",
        "--policies", "cucb-avg,cucb",
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let table = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(data_rows(&table), 4);
}

#[test]
fn oracle_examples() {
    let res = rcmab(&["oracle", "--probs", "0.9,0.5,0.2", "--target", "1.0", "--verify"]);
    assert_eq!(String::from_utf8_lossy(&res.stdout).trim(), "{0}, k=1, EL=0.100000, verify=OK");
    let res = rcmab(&["oracle", "--probs", "0.9,0.5,0.2", "--target", "0.4"]);
    assert!(String::from_utf8_lossy(&res.stdout).starts_with("∅, k=0"));
}

#[test]
fn oracle_reads_a_file() {
    let tmp = TempDir::new().unwrap();
    let path = write_config(tmp.path(), "p.txt", "0.9 0.5\n0.2\n");
    let res = rcmab(&["oracle", "--p", &path, "--target", "1.0", "--verify"]);
    assert!(res.status.success());
    assert!(String::from_utf8_lossy(&res.stdout).contains("verify=OK"));
}

#[test]
fn missing_p_file_exits_2() {
    let res = rcmab(&["oracle", "--p", "/definitely/not/here.txt", "--target", "1.0"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn missing_config_exits_2() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let res = rcmab(&["run", "--config", "/definitely/not/here.txt", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn ingest_round_trips_through_csv() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("ingest");
    let res = rcmab(&["ingest", "--days", "10", "--scheme", "daily-peak", "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let targets: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("targets.json")).unwrap()).unwrap();
    assert_eq!(targets["targets"].as_array().unwrap().len(), 10);
    assert!(out.join("load.json").exists());

    // Re-ingesting the written CSV yields the same schedule.
    let load = out.join("load.csv");
    let res = rcmab(&["ingest", "--load", load.to_str().unwrap(), "--scheme", "daily-peak"]);
    let printed: Vec<f64> = String::from_utf8_lossy(&res.stdout)
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    let stored: Vec<f64> = targets["targets"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(printed.len(), stored.len());
    for (a, b) in printed.iter().zip(&stored) {
        assert!((a - b).abs() < 1e-6);
    }
}
