// Copyright 2026 rkhsnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Command-line contract tests: exit codes, JSON shapes, determinism, and
//! file handling of the `rkhsnet` binary.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rkhsnet"))
        .args(args)
        .env_remove("RKHS_THREADS")
        .output()
        .expect("binary runs")
}

fn run_with_threads(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rkhsnet"))
        .args(args)
        .env("RKHS_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn write_file(dir: &Path, name: &str, content: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn membership_converges_and_is_deterministic() {
    let args = ["membership", "--kernel", "ladder:0.5", "--target", "1"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0, "stderr: {}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout, "same invocation must emit identical bytes");
    let v = json(&a);
    assert_eq!(v["version"], "1");
    assert_eq!(v["command"], "membership");
    assert_eq!(v["outputs"]["verdict"], "converged");
    let limit = v["outputs"]["limit"].as_f64().unwrap();
    assert!((limit - 3.0).abs() <= 1e-6, "limit {limit}");
    assert_eq!(v["diagnostics"][0]["check_name"], "membership_converged");
    assert_eq!(v["diagnostics"][0]["passed"], true);
    assert_eq!(v["inputs_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn exhausted_point_list_converges_by_saturation() {
    // A finite point list is fully exhausted, so the supremum is attained
    // and the verdict is converged even without a Cauchy streak.
    let out = run(&[
        "membership",
        "--kernel",
        "bridge",
        "--points",
        "[0.2,0.8]",
        "--target",
        "0.2",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["outputs"]["verdict"], "converged");
    assert_eq!(v["diagnostics"][0]["passed"], true);
}

#[test]
fn undecided_membership_still_exits_zero() {
    // Two levels over eight points, with the third and fourth points much
    // closer to the target than the second: the value jumps between the
    // levels and the schedule ends before the list is exhausted.
    let out = run(&[
        "membership",
        "--kernel",
        "bridge",
        "--points",
        "[0.5,0.7,0.52,0.505,0.6,0.65,0.3,0.4]",
        "--target",
        "0.5",
        "--exhaustion",
        "prefix:4",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["outputs"]["verdict"], "undecided");
    assert_eq!(v["outputs"]["limit"], serde_json::Value::Null);
    assert_eq!(v["diagnostics"][0]["passed"], false);
}

#[test]
fn usage_errors_exit_two_with_empty_stdout() {
    let cases: &[&[&str]] = &[
        &["membership", "--kernel", "nope", "--target", "1"],
        &["membership", "--kernel", "bridge", "--target", "0.5"],
        &[
            "membership",
            "--kernel",
            "bridge",
            "--points",
            "[0.25,0.75]",
            "--target",
            "0.5",
        ],
        &["membership", "--kernel", "ladder:1.5", "--target", "1"],
        &["bridge-sample", "--grid", "[0.5]", "--paths", "0"],
        &["bridge-sample", "--grid", "[0.5,0.25]", "--paths", "4"],
        &["membership"],
        &["heat", "--laplacian", "[[1,2],[3]", "--times", "[1.0]"],
    ];
    for args in cases {
        let out = run(args);
        assert_eq!(code(&out), 2, "args {args:?}");
        assert!(out.stdout.is_empty(), "usage error wrote stdout: {args:?}");
        assert!(!out.stderr.is_empty(), "usage error silent: {args:?}");
    }
}

#[test]
fn bad_base_vertex_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_file(dir.path(), "g.txt", "a b 1.0\nb c 2.0\n");
    let out = run(&["network", "--graph", &graph, "--base", "zz", "--emit", "kernel"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn file_content_errors_exit_one_with_error_json() {
    let dir = tempfile::tempdir().unwrap();
    let dup = write_file(dir.path(), "dup.txt", "a b 1.0\na b 2.0\n");
    let out = run(&["network", "--graph", &dup, "--emit", "kernel"]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["version"], "1");
    assert_eq!(v["command"], "network");
    assert_eq!(v["error"]["kind"], "ParseError");
    assert!(
        v["error"]["message"].as_str().unwrap().contains("line 2"),
        "message lacks the offending line: {}",
        v["error"]["message"]
    );

    let missing = dir.path().join("absent.txt");
    let out = run(&[
        "network",
        "--graph",
        missing.to_str().unwrap(),
        "--emit",
        "kernel",
    ]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["error"]["kind"], "Io");

    let ragged = write_file(dir.path(), "ragged.json", "[[1.0,2.0],[3.0]]");
    let out = run(&["heat", "--laplacian", &ragged, "--times", "[1.0]"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["error"]["kind"], "ParseError");
}

#[test]
fn compute_errors_exit_one() {
    let out = run(&["heat", "--laplacian", "[[1,2],[3,4]]", "--times", "[1.0]"]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["error"]["kind"], "NotSymmetric");

    // Ungrounded Laplacian: zero eigenvalue makes the Green matrix
    // undefined.
    let out = run(&[
        "heat",
        "--laplacian",
        "[[1,-1],[-1,1]]",
        "--times",
        "[1.0]",
        "--check",
        "green",
    ]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["error"]["kind"], "NotInvertible");
}

#[test]
fn heat_green_round_trips_to_the_laplacian() {
    let first = run(&[
        "heat",
        "--laplacian",
        "[[2,-1],[-1,1]]",
        "--times",
        "[0.5,1.0]",
        "--check",
        "green",
    ]);
    assert_eq!(code(&first), 0);
    let v = json(&first);
    for diag in v["diagnostics"].as_array().unwrap() {
        assert_eq!(diag["passed"], true, "diagnostic failed: {diag}");
    }
    let green = &v["outputs"]["green"];
    let expected = [[1.0, 1.0], [1.0, 2.0]];
    for i in 0..2 {
        for j in 0..2 {
            let got = green[i][j].as_f64().unwrap();
            assert!(
                (got - expected[i][j]).abs() <= 1e-9,
                "green[{i}][{j}] = {got}"
            );
        }
    }

    // The Green matrix of the Green matrix is the original operator.
    let green_arg = serde_json::to_string(green).unwrap();
    let second = run(&[
        "heat",
        "--laplacian",
        &green_arg,
        "--times",
        "[1.0]",
        "--check",
        "green",
    ]);
    assert_eq!(code(&second), 0);
    let w = json(&second);
    let back = &w["outputs"]["green"];
    let original = [[2.0, -1.0], [-1.0, 1.0]];
    for i in 0..2 {
        for j in 0..2 {
            let got = back[i][j].as_f64().unwrap();
            assert!(
                (got - original[i][j]).abs() <= 1e-9,
                "round trip [{i}][{j}] = {got}"
            );
        }
    }
}

#[test]
fn network_emits_resistance_and_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "path.txt", "a b 1.0\nb c 1.0\n");

    let out = run(&["network", "--graph", &path, "--emit", "resistance"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["outputs"]["base"], "a");
    let matrix = v["outputs"]["matrix"].as_array().unwrap();
    let expected = [[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]];
    for (i, row) in matrix.iter().enumerate() {
        for (j, val) in row.as_array().unwrap().iter().enumerate() {
            assert!((val.as_f64().unwrap() - expected[i][j]).abs() <= 1e-12);
        }
    }
    assert_eq!(v["diagnostics"][0]["check_name"], "resistance_kernel_identity");
    assert_eq!(v["diagnostics"][0]["passed"], true);

    let out = run(&["network", "--graph", &path, "--emit", "kernel"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let gram = v["outputs"]["gram"].as_array().unwrap();
    let expected = [[1.0, 1.0], [1.0, 2.0]];
    for (i, row) in gram.iter().enumerate() {
        for (j, val) in row.as_array().unwrap().iter().enumerate() {
            assert!((val.as_f64().unwrap() - expected[i][j]).abs() <= 1e-12);
        }
    }
}

#[test]
fn sampler_writes_grid_first_csv_and_defaults_seed_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("paths.csv");
    let out = run(&[
        "bridge-sample",
        "--grid",
        "[0.25,0.75]",
        "--paths",
        "4",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 5, "grid row plus one row per path");
    let grid: Vec<f64> = lines[0].split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(grid, vec![0.25, 0.75]);
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 2);
    }

    // Omitting --seed is the same run as --seed 0.
    let defaulted = run(&["bridge-sample", "--grid", "[0.25,0.75]", "--paths", "4"]);
    let explicit = run(&[
        "bridge-sample",
        "--grid",
        "[0.25,0.75]",
        "--paths",
        "4",
        "--seed",
        "0",
    ]);
    assert_eq!(code(&defaulted), 0);
    assert_eq!(defaulted.stdout, explicit.stdout);
    let v = json(&defaulted);
    assert_eq!(v["outputs"]["seed"], 0);
}

#[test]
fn thread_count_does_not_change_results() {
    let args = [
        "bridge-sample",
        "--grid",
        "[0.1,0.5,0.9]",
        "--paths",
        "64",
        "--seed",
        "7",
    ];
    let unset = run(&args);
    let one = run_with_threads(&args, "1");
    let four = run_with_threads(&args, "4");
    assert_eq!(code(&unset), 0);
    assert_eq!(unset.stdout, one.stdout);
    assert_eq!(unset.stdout, four.stdout);

    let bad = run_with_threads(&args, "abc");
    assert_eq!(code(&bad), 2);
}
