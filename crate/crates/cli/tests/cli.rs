//! End-to-end tests of the `goldcut` binary: exit codes, output formats,
//! and artifact layout.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use goldcut_cli::generators::golden_circuit;

const BELL: &str = "qubits 2\nh 0\ncut 0\ncx 0 1\n";

fn goldcut(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_goldcut"))
        .args(args)
        .output()
        .expect("spawn goldcut")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn run_distribution_json_reports_every_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bell.qct", BELL);
    let out = goldcut(&[
        "run", &path, "--distribution", "--alpha", "0.1", "--shots", "4096", "--seed", "1",
        "--json",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["n_cuts"], 1);
    assert_eq!(v["outcomes"].as_array().unwrap().len(), 4);
    assert_eq!(v["options"]["shots"], 4096);
    let q = v["result"].as_array().unwrap();
    assert_eq!(q.len(), 4);
    assert!((q[0].as_f64().unwrap() - 0.5).abs() < 0.1);
    let executed = v["downstream_runs_executed"].as_u64().unwrap();
    let skipped = v["downstream_runs_skipped"].as_u64().unwrap();
    assert_eq!(executed + skipped, 8);
    assert!(v["normalized_distribution"].is_null());
}

#[test]
fn run_normalize_adds_a_proper_distribution_to_the_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bell.qct", BELL);
    let out = goldcut(&[
        "run", &path, "--distribution", "--alpha", "0.1", "--shots", "1024", "--seed", "3",
        "--normalize", "--json",
    ]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let q: Vec<f64> = v["normalized_distribution"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert!(q.iter().all(|&p| p >= 0.0));
}

#[test]
fn run_expectation_prints_the_value() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bell.qct", BELL);
    let out = goldcut(&[
        "run", &path, "--obs", "|ZZ", "--alpha", "0.1", "--shots", "4096", "--seed", "2",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let line = text
        .lines()
        .find(|l| l.starts_with("expectation value:"))
        .expect("value line");
    let value: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(value > 0.8, "<ZZ> on a Bell pair came out {value}");
}

#[test]
fn run_merge_iz_shares_upstream_executions() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bell.qct", BELL);
    let base = [
        "run", "", "--distribution", "--alpha", "0.1", "--shots", "512", "--seed", "4", "--json",
    ];
    let mut plain = base;
    plain[1] = &path;
    let v: serde_json::Value = serde_json::from_str(&stdout(&goldcut(&plain))).unwrap();
    assert_eq!(v["upstream_executions"], 4);

    let mut merged_args = plain.to_vec();
    merged_args.push("--merge-iz");
    let v: serde_json::Value = serde_json::from_str(&stdout(&goldcut(&merged_args))).unwrap();
    assert_eq!(v["upstream_executions"], 3);
}

#[test]
fn run_without_a_target_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bell.qct", BELL);
    let out = goldcut(&["run", &path, "--alpha", "0.1", "--shots", "64", "--seed", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn run_with_both_targets_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bell.qct", BELL);
    let out = goldcut(&[
        "run", &path, "--distribution", "--obs", "|ZZ", "--alpha", "0.1", "--shots", "64",
        "--seed", "1",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn parse_errors_exit_2_and_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.qct", "qubits 2\nfoo 0\n");
    let out = goldcut(&[
        "run", &path, "--distribution", "--alpha", "0.1", "--shots", "64", "--seed", "1",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 2"), "stderr: {}", stderr(&out));
}

#[test]
fn bad_alpha_and_missing_file_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bell.qct", BELL);
    let out = goldcut(&[
        "run", &path, "--distribution", "--alpha", "1.5", "--shots", "64", "--seed", "1",
    ]);
    assert_eq!(code(&out), 2);

    let out = goldcut(&[
        "run",
        "/nonexistent/missing.qct",
        "--distribution",
        "--alpha",
        "0.1",
        "--shots",
        "64",
        "--seed",
        "1",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn uncut_circuit_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "nocut.qct", "qubits 2\nh 0\ncx 0 1\n");
    let out = goldcut(&[
        "run", &path, "--distribution", "--alpha", "0.1", "--shots", "64", "--seed", "1",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("cut"));
}

#[test]
fn plan_reports_the_shot_count() {
    let out = goldcut(&["plan", "--epsilon", "0.1", "--delta", "0.05"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("tau bound b: 1.5"));
    assert!(text.contains("1660"), "stdout: {text}");

    let out = goldcut(&[
        "plan", "--epsilon", "0.1", "--delta", "0.05", "--upstream-qubits", "2",
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("tau bound b: 1.125"));

    let out = goldcut(&["plan", "--epsilon", "0", "--delta", "0.05"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn sweep_writes_csvs_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "sweep.toml",
        "shots_grid = [64, 128]\nalpha_grid = [0.2]\ntrials = 2\nmaster_seed = 5\nmode = \"distribution\"\n",
    );
    let out1 = dir.path().join("out1");
    let out = goldcut(&[
        "sweep",
        "--config",
        &config,
        "--out",
        out1.to_str().unwrap(),
        "--plots",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let trials = fs::read_to_string(out1.join("trials.csv")).unwrap();
    let lines: Vec<&str> = trials.lines().collect();
    assert_eq!(
        lines[0],
        "shots,alpha,trial,circuit_kind,basis,tau_hat,std_err,rejected,l2_error,time_opt_s,time_noopt_s"
    );
    // 2 shots x 1 alpha x 2 trials x 2 kinds x 4 bases.
    assert_eq!(lines.len(), 1 + 32);

    let aggregate = fs::read_to_string(out1.join("aggregate.csv")).unwrap();
    let alines: Vec<&str> = aggregate.lines().collect();
    assert_eq!(
        alines[0],
        "shots,alpha,circuit_kind,golden_rate,reject_rate,l2_median,l2_mean,time_opt_mean_s,time_noopt_mean_s"
    );
    assert_eq!(alines.len(), 1 + 4);
    assert!(out1.join("rates.svg").is_file());
    assert!(out1.join("l2.svg").is_file());

    // Re-run into a second directory: everything except the wall-clock
    // columns must be byte-identical.
    let out2 = dir.path().join("out2");
    let out = goldcut(&["sweep", "--config", &config, "--out", out2.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let strip_times = |text: &str| -> Vec<String> {
        text.lines()
            .map(|l| {
                let cells: Vec<&str> = l.split(',').collect();
                cells[..cells.len() - 2].join(",")
            })
            .collect()
    };
    let second = fs::read_to_string(out2.join("trials.csv")).unwrap();
    assert_eq!(strip_times(&trials), strip_times(&second));
}

#[test]
fn sweep_config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "bad.toml", "shots_grid = []\n");
    let out = goldcut(&[
        "sweep",
        "--config",
        &config,
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn bench_writes_trials_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "golden.qct", &golden_circuit(0.5, 7));
    let out_dir = dir.path().join("bench");
    let out = goldcut(&[
        "bench",
        &path,
        "--alpha",
        "0.1",
        "--shots",
        "128",
        "--trials",
        "3",
        "--seed",
        "1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("optimization on"));
    let trials = fs::read_to_string(out_dir.join("bench_trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 1 + 3);
    let summary = fs::read_to_string(out_dir.join("bench_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
    assert!(summary.starts_with("alpha,shots,trials,"));
}
