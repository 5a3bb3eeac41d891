//! End-to-end tests of the `forkrace` binary: output contracts, exit codes,
//! and determinism, exercised through real process invocations.

use std::path::Path;
use std::process::{Command, Output};

fn forkrace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forkrace"))
        .args(args)
        .env_remove("FORKRACE_PARALLELISM")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

#[test]
fn q_single_query_prints_the_value() {
    let out = forkrace(&["q", "--l", "1", "--m", "0", "--n", "0", "--share", "0.3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "0.3\n");
}

#[test]
fn q_boundary_already_surpassed_is_one() {
    let out = forkrace(&["q", "--l", "5", "--m", "-1", "--n", "0", "--share", "0.7"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "1\n");
}

#[test]
fn q_exact_backend_prints_the_fraction() {
    let out = forkrace(&[
        "q", "--l", "2", "--m", "1", "--n", "0", "--share", "3/10", "--backend", "rational",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "639/5000 (~0.1278)\n");
}

#[test]
fn q_verbose_breaks_the_sum_down() {
    let out = forkrace(&[
        "q", "--l", "3", "--m", "0", "--n", "0", "--share", "0.5", "--verbose",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("i\twalk_count\tterm\n"), "unexpected output:\n{text}");
    // Three terms (i = 0, 1, 2 with walk counts 1, 1, 2) plus the total.
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().nth(3).unwrap().starts_with("2\t2\t"));
}

#[test]
fn tu_certainty_branch() {
    let out = forkrace(&["tu", "--share", "0.5", "--z", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "1\n");
}

#[test]
fn validation_failures_exit_two_and_name_the_invariant() {
    let out = forkrace(&["q", "--l", "0", "--m", "0", "--n", "0", "--share", "0.3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("l must be >= 1"), "stderr: {}", stderr(&out));

    let out = forkrace(&["q", "--l", "3", "--m", "0", "--n", "4", "--share", "0.3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("n <= l"), "stderr: {}", stderr(&out));

    let out = forkrace(&["tu", "--share", "1.2", "--z", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("hash share"), "stderr: {}", stderr(&out));

    let out = forkrace(&["tr", "--share", "0.3", "--z", "4", "--window", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("window L must be >= 1"), "stderr: {}", stderr(&out));

    // Usage errors from the argument parser share the same exit code.
    let out = forkrace(&["q", "--l", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn recommend_z_reports_depth_and_scan() {
    let out = forkrace(&[
        "recommend-z", "--share", "0.1", "--window", "10", "--threshold", "0.001", "--z-max", "25",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("z\tp_tr\n"));
    assert!(text.ends_with("recommended_z 3\n"), "unexpected output:\n{text}");
    assert_eq!(text.lines().count(), 28, "expected full scan table:\n{text}");
}

#[test]
fn recommend_z_without_solution_exits_three_with_warning() {
    let out = forkrace(&[
        "recommend-z", "--share", "0.6", "--window", "10", "--threshold", "0.5", "--z-max", "8",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let text = stdout(&out);
    assert!(text.contains("warning:"), "expected non-monotonicity warning:\n{text}");
    assert_eq!(text.lines().filter(|l| l.chars().next().is_some_and(char::is_numeric)).count(), 9);
    assert!(stderr(&out).contains("no confirmation depth"), "stderr: {}", stderr(&out));
}

#[test]
fn simulate_race_is_deterministic_and_accurate() {
    let args = [
        "simulate", "race", "--l", "1", "--m", "0", "--n", "0", "--share", "0.3", "--runs",
        "10000", "--seed", "42",
    ];
    let first = forkrace(&args);
    let second = forkrace(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout, "same seed must give identical bytes");
    let text = stdout(&first);
    assert!(text.contains("seed 42"));
    assert!(text.contains("runs 10000"));
    let p_hat: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("p_hat "))
        .expect("p_hat line")
        .parse()
        .unwrap();
    // 4-sigma band around the closed form 0.3 at 10^4 runs.
    assert!((p_hat - 0.3).abs() <= 4.0 * (0.3f64 * 0.7 / 10_000.0).sqrt(), "p_hat {p_hat}");
}

#[test]
fn simulate_attack_powerless_attacker_never_wins() {
    let out = forkrace(&[
        "simulate", "attack", "--share", "0", "--z", "4", "--window", "10", "--runs", "100",
        "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("p_hat 0\n"), "output: {}", stdout(&out));
}

#[test]
fn simulate_seed_is_echoed_when_random() {
    let out = forkrace(&[
        "simulate", "race", "--l", "1", "--m", "0", "--n", "0", "--share", "0.3", "--runs", "10",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let seed_line = text.lines().find(|l| l.starts_with("seed ")).expect("seed line");
    let seed: u64 = seed_line[5..].parse().expect("numeric seed");
    // Replaying the echoed seed reproduces the estimate byte for byte.
    let replay = forkrace(&[
        "simulate", "race", "--l", "1", "--m", "0", "--n", "0", "--share", "0.3", "--runs", "10",
        "--seed", &seed.to_string(),
    ]);
    assert_eq!(out.stdout, replay.stdout);
}

#[test]
fn parallelism_env_override_keeps_results_identical() {
    let args = [
        "simulate", "attack", "--share", "0.3", "--z", "2", "--window", "8", "--runs", "2000",
        "--seed", "7",
    ];
    let flag = forkrace(&[&args[..], &["--parallelism", "1"]].concat());
    let env = Command::new(env!("CARGO_BIN_EXE_forkrace"))
        .args(args)
        .env("FORKRACE_PARALLELISM", "4")
        .output()
        .expect("binary runs");
    assert_eq!(flag.status.code(), Some(0));
    assert_eq!(env.status.code(), Some(0));
    assert_eq!(flag.stdout, env.stdout);

    let bad = Command::new(env!("CARGO_BIN_EXE_forkrace"))
        .args(args)
        .env("FORKRACE_PARALLELISM", "zero")
        .output()
        .expect("binary runs");
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn sweep_preset_reproduces_the_certainty_gap_row() {
    let out = forkrace(&["sweep", "--preset", "fig-vsl"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        vec!["share_i", "depth_z", "window_l", "p_tr", "p_tu"]
    );
    let mut hit = false;
    for record in reader.records() {
        let record = record.unwrap();
        let share: f64 = record[0].parse().unwrap();
        let window: u32 = record[2].parse().unwrap();
        let p_tr: f64 = record[3].parse().unwrap();
        let p_tu: f64 = record[4].parse().unwrap();
        // Corollary row: at I = 0.5 the unrestricted attack is certain, the
        // restricted one is not.
        if share == 0.5 && window == 10 {
            assert_eq!(p_tu, 1.0);
            assert!(p_tr < 1.0);
            hit = true;
        }
        assert!(p_tr <= p_tu + 1e-15);
    }
    assert!(hit, "fig-vsl row (I=0.5, L=10) missing");
}

#[test]
fn sweep_spec_file_runs_and_writes_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("spec.json");
    let out_path = dir.path().join("rows.json");
    std::fs::write(
        &spec_path,
        r#"{
            "target": "q",
            "axis": "lag_m",
            "values": [1, 2, 3],
            "fixed": {"share_i": 0.4, "window_l": 10, "elapsed_n": 0},
            "include_limit": true
        }"#,
    )
    .unwrap();
    let out = forkrace(&[
        "sweep",
        "--spec",
        spec_path.to_str().unwrap(),
        "--format",
        "json",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out), "", "file output should leave stdout empty");
    let rows: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let q = row["q_closed"].as_f64().unwrap();
        let limit = row["q_limit"].as_f64().unwrap();
        assert!(q < limit, "finite deadline must stay below the limit");
    }
    // Only the spec and the output file remain: no stray temp files.
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn sweep_rejects_unknown_presets_and_bad_specs() {
    let out = forkrace(&["sweep", "--preset", "fig-nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("fig-vsz1"), "stderr should list presets");

    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("bad.json");
    std::fs::write(
        &spec_path,
        r#"{"target": "p_tu", "axis": "share_i", "values": [0.1, 0.2], "fixed": {"depth_z": 2}, "with_simulation": true}"#,
    )
    .unwrap();
    let out = forkrace(&["sweep", "--spec", spec_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("simulation"), "stderr: {}", stderr(&out));

    // A failing file-output run must not leave partial output behind.
    let out_path = dir.path().join("never.csv");
    let out = forkrace(&[
        "sweep", "--spec", spec_path.to_str().unwrap(), "--out", out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!Path::new(&out_path).exists(), "partial output must not be left behind");
}

#[test]
fn sweep_simulation_columns_match_the_closed_form_loosely() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("sim.json");
    std::fs::write(
        &spec_path,
        r#"{
            "target": "p_tr",
            "axis": "depth_z",
            "values": [0, 1],
            "fixed": {"share_i": 0.3, "window_l": 5},
            "with_simulation": true,
            "sim": {"runs": 4000, "seed": 11, "parallelism": 2}
        }"#,
    )
    .unwrap();
    let out = forkrace(&["sweep", "--spec", spec_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    for record in reader.records() {
        let record = record.unwrap();
        let p_tr: f64 = record[3].parse().unwrap();
        let p_hat: f64 = record[5].parse().unwrap();
        let stderr_col: f64 = record[6].parse().unwrap();
        let sigma = stderr_col.max((p_tr * (1.0 - p_tr) / 4000.0).sqrt());
        assert!((p_hat - p_tr).abs() <= 4.0 * sigma, "p_hat {p_hat} vs p_tr {p_tr}");
        assert_eq!(&record[7], "4000");
        assert_eq!(&record[8], "11");
    }
}

#[test]
fn help_exits_zero() {
    let out = forkrace(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("sweep"));
}
