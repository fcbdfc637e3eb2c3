//! End-to-end tests of the `winsum` binary: output shapes, determinism,
//! and exit codes.

use std::io::Write as _;
use std::process::{Command, Output};

fn winsum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_winsum"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout should be utf-8")
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr should be utf-8")
}

#[test]
fn run_writes_csv_records_and_a_summary_line() {
    let out = winsum(&[
        "run",
        "--algo", "refined",
        "--window", "32",
        "--eps", "0.1",
        "--stream", "uniform:-50..50",
        "--seed", "7",
        "--len", "200",
        "--check",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let stdout = stdout_of(&out);
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("t,estimate,exact,rel_err,q"));
    assert_eq!(stdout.lines().count(), 201, "header plus one row per step");
    let first = lines.next().unwrap();
    assert!(first.starts_with("1,"), "rows are 1-indexed: {first}");
    assert!(stderr_of(&out).contains("steps=200"));
    assert!(stderr_of(&out).contains("max_q="));
}

#[test]
fn run_output_is_deterministic() {
    let args = [
        "run",
        "--algo", "nonempty",
        "--window", "16",
        "--eps", "0.2",
        "--stream", "uniform:-9..9",
        "--seed", "3",
        "--len", "500",
        "--check",
    ];
    let a = winsum(&args);
    let b = winsum(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "two identical runs must emit identical bytes");
}

#[test]
fn run_emits_parseable_json_with_summary() {
    let out = winsum(&[
        "run",
        "--algo", "eh",
        "--window", "64",
        "--eps", "0.5",
        "--stream", "bits:p=0.3",
        "--len", "300",
        "--format", "json",
        "--check",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(report["algo"], "eh");
    assert_eq!(report["n"], 64);
    assert_eq!(report["stream"], "bits:p=0.3");
    assert_eq!(report["records"].as_array().unwrap().len(), 300);
    assert_eq!(report["summary"]["steps"], 300);
}

#[test]
fn run_can_write_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("records.csv");
    let out = winsum(&[
        "run",
        "--algo", "standard",
        "--window", "16",
        "--eps", "0.2",
        "--beta", "0.5",
        "--stream", "walk:step=2",
        "--len", "100",
        "--out", path.to_str().unwrap(),
        "--check",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).is_empty(), "records went to the file");
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("t,estimate,exact,rel_err,q\n"));
    assert_eq!(text.lines().count(), 101);
}

#[test]
fn run_reads_streams_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("values.txt");
    let mut file = std::fs::File::create(&path).unwrap();
    for v in [3, -1, 4, -1, -5, 9, 2, -6, 5, -3] {
        writeln!(file, "{v}").unwrap();
    }
    drop(file);
    let stream = format!("file:{}", path.display());
    let out = winsum(&[
        "run",
        "--algo", "refined",
        "--window", "4",
        "--eps", "0.25",
        "--stream", &stream,
        "--len", "10",
        "--check",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    assert_eq!(stdout_of(&out).lines().count(), 11);
}

#[test]
fn invalid_invocations_exit_with_code_2() {
    // Unknown algorithm name (rejected while parsing arguments).
    let out = winsum(&[
        "run",
        "--algo", "kadane",
        "--window", "4",
        "--eps", "0.5",
        "--stream", "bits:p=0.5",
        "--len", "10",
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));

    // Malformed stream grammar (also rejected while parsing).
    let out = winsum(&[
        "run",
        "--algo", "refined",
        "--window", "4",
        "--eps", "0.5",
        "--stream", "uniform:9..-9",
        "--len", "10",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // Arguments parse but the configuration is invalid.
    let out = winsum(&[
        "run",
        "--algo", "refined",
        "--window", "4",
        "--eps", "1.5",
        "--stream", "bits:p=0.5",
        "--len", "10",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("error:"));
    assert!(stderr_of(&out).contains("--help"));

    // beta makes no sense outside the standard rule.
    let out = winsum(&[
        "run",
        "--algo", "refined",
        "--window", "4",
        "--eps", "0.5",
        "--beta", "0.5",
        "--stream", "bits:p=0.5",
        "--len", "10",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_failures_exit_with_code_1() {
    // The counting baseline rejects non-bit input mid-stream.
    let out = winsum(&[
        "run",
        "--algo", "eh",
        "--window", "8",
        "--eps", "0.5",
        "--stream", "uniform:-5..5",
        "--len", "50",
    ]);
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("error:"));

    // A stream file that is too short fails at generation time.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("short.txt");
    std::fs::write(&path, "1\n2\n").unwrap();
    let stream = format!("file:{}", path.display());
    let out = winsum(&[
        "run",
        "--algo", "refined",
        "--window", "4",
        "--eps", "0.5",
        "--stream", &stream,
        "--len", "10",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bench_prints_one_row_per_window() {
    let out = winsum(&[
        "bench",
        "--algo", "refined",
        "--windows", "16,64",
        "--eps", "0.2",
        "--stream", "uniform:-50..50",
        "--min-updates", "2000",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let stdout = stdout_of(&out);
    assert_eq!(stdout.lines().count(), 3, "header plus two points:\n{stdout}");
    assert!(stdout.contains("ns/update"));
}

#[test]
fn bench_supports_the_oracle_and_csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bench.csv");
    let out = winsum(&[
        "bench",
        "--algo", "oracle",
        "--windows", "32",
        "--stream", "uniform:-50..50",
        "--min-updates", "1000",
        "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("n,updates,ns_per_update,updates_per_s,max_q\n"));
    assert_eq!(text.lines().count(), 2);
}
