use std::fs::File;
use std::io::BufReader;
use std::process::{Command, Output};

use resonance::io::{read_solutions, OutputFormat};
use resonance::{canonicalize, solve, SolverConfig, Symmetry, WaveVector};

const BIN: &str = env!("CARGO_BIN_EXE_resonance");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .output()
        .expect("spawn resonance")
}

fn v(m: i32, n: i32) -> WaveVector {
    WaveVector::new(m, n)
}

#[test]
fn solve_writes_jsonl_to_stdout() {
    let out = run(&["solve", "--max-coord", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let solutions = read_solutions(&out.stdout[..], OutputFormat::Jsonl).unwrap();
    let expected = solve(&SolverConfig::new(7)).unwrap().solutions;
    assert_eq!(solutions.len(), expected.len());
    let fifty = canonicalize([v(5, 5), v(1, -5), v(5, -5), v(1, 5)], Symmetry::Canonical).unwrap();
    assert!(solutions.contains(&fifty));
}

#[test]
fn csv_file_and_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d6.csv");
    let json = dir.path().join("report.json");
    let out = Command::new(BIN)
        .args([
            "solve",
            "--max-coord",
            "6",
            "--format",
            "csv",
            "--expand-signs",
            "--out",
        ])
        .arg(&csv)
        .arg("--report-json")
        .arg(&json)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let mut read =
        read_solutions(BufReader::new(File::open(&csv).unwrap()), OutputFormat::Csv).unwrap();
    read.sort_unstable();
    let expected = solve(&SolverConfig::new(6).with_expand_signs(true))
        .unwrap()
        .solutions;
    assert_eq!(read, expected);
    let report: serde_json::Value = serde_json::from_reader(File::open(&json).unwrap()).unwrap();
    assert_eq!(report["solutions"].as_u64(), Some(expected.len() as u64));
    assert_eq!(report["symmetry"], "sign-expanded");
}

#[test]
fn verify_matches_brute_force() {
    let out = run(&["verify", "--max-coord", "8"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("-> MATCH"));
    let out = run(&[
        "verify",
        "--max-coord",
        "5",
        "--mode",
        "paper-compat",
        "--expand-signs",
    ]);
    assert!(matches!(out.status.code(), Some(0) | Some(2)));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["solve", "--max-coord", "0"][..],
        &["solve"],
        &["verify", "--max-coord", "13"],
        &["stats"],
        &["frobnicate"],
    ] {
        assert_eq!(run(args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn classes_lists_vectors_and_deficiencies() {
    let out = run(&["classes", "--max-coord", "7", "--list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("q,gamma,m,n\n"));
    assert!(text.lines().any(|l| l == "50,1,5,5"));
    assert_eq!(text.lines().count() - 1, 8 * 8 - 1);

    let out = run(&[
        "classes",
        "--max-coord",
        "7",
        "--deficiencies",
        "--mode",
        "paper-compat",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("q,dm,dn\n"));
    assert!(text.lines().any(|l| l == "50,12,6"));
}

#[test]
fn stats_from_file_and_in_process_agree() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("d10.jsonl");
    let out = Command::new(BIN)
        .args(["solve", "--max-coord", "10", "--out"])
        .arg(&file)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));

    let args = [
        "--table", "square", "--start", "2", "--end", "10", "--step", "2",
    ];
    let from_file = Command::new(BIN)
        .arg("stats")
        .arg("--input")
        .arg(&file)
        .args(args)
        .output()
        .unwrap();
    let in_process = Command::new(BIN)
        .args(["stats", "--max-coord", "10"])
        .args(args)
        .output()
        .unwrap();
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(in_process.status.code(), Some(0));
    assert_eq!(from_file.stdout, in_process.stdout);
    let table = String::from_utf8_lossy(&from_file.stdout);
    let total = solve(&SolverConfig::new(10)).unwrap().solutions.len();
    assert_eq!(table.lines().last(), Some(format!("10,{total}").as_str()));

    let hist = Command::new(BIN)
        .args([
            "stats",
            "--max-coord",
            "7",
            "--table",
            "histogram",
            "--vector",
            "5,5",
        ])
        .output()
        .unwrap();
    assert_eq!(hist.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&hist.stdout).starts_with("multiplicity,vector_count\n"));
    assert!(String::from_utf8_lossy(&hist.stderr).contains("multiplicity of (5, 5)"));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let out = run(&[
        "solve",
        "--max-coord",
        "3",
        "--out",
        "/nonexistent/dir/x.jsonl",
    ]);
    assert_eq!(out.status.code(), Some(3));
}
