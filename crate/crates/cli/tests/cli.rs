use std::process::Command;

use mmsched_cli::{ordering_violations, run_records, Algo, JsonOutput, RunArgs, SCHEMA_VERSION};

fn mmsched(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mmsched")).args(args).output().expect("run binary")
}

fn rows(stdout: &[u8]) -> Vec<Vec<String>> {
    let mut rd = csv::Reader::from_reader(stdout);
    rd.records().map(|r| r.unwrap().iter().map(str::to_string).collect()).collect()
}

#[test]
fn opt_rows() {
    let out = mmsched(&["run", "--grid-n", "4", "--enb-rf", "10", "--algo", "opt", "--trials", "3", "--seed", "1", "--out", "csv"]);
    assert!(out.status.success());
    let rows = rows(&out.stdout);
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(r[6], "opt");
        assert!(r[8].parse::<f64>().unwrap() > 0.0);
    }
}

#[test]
fn ec_rows_carry_kappa() {
    let out = mmsched(&["run", "--grid-n", "4", "--algo", "ec", "--granularity", "0.001", "--trials", "3"]);
    assert!(out.status.success());
    for r in rows(&out.stdout) {
        assert_eq!(r[6], "ec");
        assert!(r[12].parse::<usize>().unwrap() > 0);
        assert!(r[8].parse::<f64>().unwrap() > 0.0);
    }
}

#[test]
fn all_satisfies_ordering() {
    let args = RunArgs { grid_n: Some(3), trials: 5, granularity: vec![0.01, 0.001], ..RunArgs::default() };
    let (_, recs) = run_records(&args).unwrap();
    assert_eq!(recs.len(), 5 * 4);
    assert!(ordering_violations(&recs).is_empty());
    for trial in recs.chunks(4) {
        let opt = &trial[0];
        assert_eq!(opt.algo, Algo::Opt);
        assert!(opt.network_tput.unwrap() <= trial[3].network_tput.unwrap() + 1e-9);
        for ec in &trial[1..3] {
            assert!(ec.theta.unwrap() <= opt.theta.unwrap() * (1.0 + 1e-6));
        }
    }
}

#[test]
fn json_is_versioned() {
    let out = mmsched(&["run", "--grid-n", "2", "--trials", "2", "--out", "json", "--no-timing"]);
    assert!(out.status.success());
    let parsed: JsonOutput = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed.schema_version, SCHEMA_VERSION);
    assert_eq!(parsed.records.len(), 2 * 3);
}

#[test]
fn config_errors_exit_non_zero() {
    for args in [
        &["run", "--granularity", "0"][..],
        &["run", "--grid-n", "1"],
        &["run", "--params", "/nonexistent/params.json"],
        &["run", "--algo", "nope"],
    ] {
        let out = mmsched(args);
        assert!(!out.status.success(), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn solve_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.json");
    let net = mmsched_core::Network::builder().mmbs(2).link(0, 1, 2.0).link(0, 2, 4.0).build().unwrap();
    std::fs::write(&path, net.to_json()).unwrap();
    let p = path.to_str().unwrap();
    let out = mmsched(&["solve", "--network", p]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["theta"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-9);
    let out = mmsched(&["solve", "--network", p, "--algo", "ec", "--granularity", "0.1"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["metrics"]["kappa"].as_u64().unwrap() > 0);
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = mmsched(&["run", "--grid-n", "2", "--trials", "1", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(rows(&std::fs::read(&path).unwrap()).len(), 3);
}
