//! End-to-end tests of the `selfjoin` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selfjoin"))
        .args(args)
        .output()
        .expect("spawn selfjoin")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn generate(dir: &Path, name: &str, count: usize, dims: usize, seed: u64) -> String {
    let path = dir.join(name).display().to_string();
    let output = run(&[
        "generate",
        "--count",
        &count.to_string(),
        "--dims",
        &dims.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        &path,
    ]);
    assert!(output.status.success(), "{output:?}");
    path
}

/// Fields of the single report row printed by `join`.
fn report_row(args: &[&str]) -> Vec<String> {
    let output = run(args);
    assert!(output.status.success(), "{output:?}");
    let text = stdout(&output);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert_eq!(
        header,
        "dataset,label,D,n,eps,mode,workers,build_s,join_s,cells_probed,candidates_tested,\
         pairs,mean_neighbors,batches"
            .replace(" ", "")
    );
    let row = lines.next().unwrap();
    assert!(lines.next().is_none(), "more than one report row");
    row.split(',').map(str::to_string).collect()
}

#[test]
fn generate_is_deterministic_and_well_formed() {
    let dir = TempDir::new().unwrap();
    let a = generate(dir.path(), "a.csv", 1000, 3, 7);
    let b = generate(dir.path(), "b.csv", 1000, 3, 7);
    let bytes_a = fs::read(&a).unwrap();
    assert_eq!(bytes_a, fs::read(&b).unwrap());

    let text = String::from_utf8(bytes_a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1000);
    assert!(lines.iter().all(|l| l.split(',').count() == 3));

    let c = generate(dir.path(), "c.csv", 1000, 3, 8);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn generate_rejects_inverted_range() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("bad.csv").display().to_string();
    let output = run(&[
        "generate", "--count", "10", "--dims", "2", "--lo", "100", "--hi", "0", "--out", &out,
    ]);
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("lo"));
}

#[test]
fn join_count_only_agrees_across_modes() {
    let dir = TempDir::new().unwrap();
    let input = generate(dir.path(), "points.csv", 2000, 2, 11);

    let base = report_row(&[
        "join", "--input", &input, "--dims", "2", "--eps", "2", "--count-only",
    ]);
    let uni = report_row(&[
        "join", "--input", &input, "--dims", "2", "--eps", "2", "--mode", "unicomp",
        "--count-only",
    ]);
    assert_eq!(base[5], "baseline");
    assert_eq!(uni[5], "unicomp");
    // identical total pairs, count-only runs deliver no batches
    assert_eq!(base[11], uni[11]);
    assert_eq!(base[13], "0");
    let pairs: u64 = base[11].parse().unwrap();
    assert!(pairs >= 2000, "at least the self pairs");
    // unicomp tests roughly half the candidates
    let base_candidates: f64 = base[10].parse().unwrap();
    let uni_candidates: f64 = uni[10].parse().unwrap();
    let ratio = uni_candidates / base_candidates;
    assert!(ratio > 0.3 && ratio < 0.7, "ratio {ratio}");
}

#[test]
fn join_rejects_zero_epsilon() {
    let dir = TempDir::new().unwrap();
    let input = generate(dir.path(), "points.csv", 10, 2, 1);
    let output = run(&["join", "--input", &input, "--dims", "2", "--eps", "0"]);
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("epsilon"));
}

#[test]
fn join_writes_pair_file_matching_report() {
    let dir = TempDir::new().unwrap();
    let input = generate(dir.path(), "points.csv", 500, 2, 3);
    let pairs_path = dir.path().join("pairs.csv").display().to_string();
    let row = report_row(&[
        "join", "--input", &input, "--dims", "2", "--eps", "5", "--out", &pairs_path,
    ]);
    let pairs: usize = row[11].parse().unwrap();
    let batches: u64 = row[13].parse().unwrap();
    assert!(batches >= 3);

    let text = fs::read_to_string(&pairs_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), pairs);
    for line in &lines {
        let (k, v) = line.split_once(',').unwrap();
        let k: u32 = k.parse().unwrap();
        let v: u32 = v.parse().unwrap();
        assert!((k as usize) < 500 && (v as usize) < 500);
    }
}

#[test]
fn validate_passes_on_generated_data() {
    let dir = TempDir::new().unwrap();
    let input = generate(dir.path(), "points.csv", 2000, 3, 13);
    for mode in ["baseline", "unicomp"] {
        let output = run(&[
            "validate", "--input", &input, "--dims", "3", "--eps", "4", "--mode", mode,
        ]);
        assert!(output.status.success(), "{output:?}");
        assert!(stdout(&output).starts_with("PASS"));
    }
}

#[test]
fn validate_single_point_dataset() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("one.csv");
    fs::write(&input, "5.0,5.0\n").unwrap();
    let output = run(&[
        "validate",
        "--input",
        &input.display().to_string(),
        "--dims",
        "2",
        "--eps",
        "1",
    ]);
    assert!(output.status.success());
    assert_eq!(stdout(&output).trim(), "PASS: 1 pairs match brute force");
}

#[test]
fn bench_sweep_reports_cells_and_trend() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("sweep.spec");
    fs::write(
        &spec,
        "label = trend\ncount = 3000\ndims = 2,3\neps = 2\n\
         modes = baseline,unicomp\ntrials = 2\nseed = 5\n",
    )
    .unwrap();
    let output = run(&["bench", "--spec", &spec.display().to_string()]);
    assert!(output.status.success(), "{output:?}");
    let text = stdout(&output);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5, "header + 4 cells:\n{text}");
    assert!(lines[0].starts_with("dataset,label,"));
    assert!(lines[0].ends_with(",candidates_ratio,error"));

    let rows: Vec<Vec<&str>> = lines[1..].iter().map(|l| l.split(',').collect()).collect();
    // mean neighbors decreases from 2-D to 3-D at fixed eps
    let mean_2d: f64 = rows[0][12].parse().unwrap();
    let mean_3d: f64 = rows[2][12].parse().unwrap();
    assert!(mean_2d > mean_3d);
    // unicomp rows carry the candidate ratio, baseline rows do not
    for row in &rows {
        if row[5] == "unicomp" {
            let ratio: f64 = row[14].parse().unwrap();
            assert!(ratio > 0.0 && ratio < 1.0);
        } else {
            assert_eq!(row[14], "");
        }
        assert_eq!(row[15], "", "no cell failures expected");
    }
}

#[test]
fn header_flag_skips_first_line() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("with_header.csv");
    fs::write(&input, "x,y\n0,0\n3,4\n").unwrap();
    let row = report_row(&[
        "join",
        "--input",
        &input.display().to_string(),
        "--dims",
        "2",
        "--eps",
        "5",
        "--count-only",
        "--header",
    ]);
    assert_eq!(row[2], "2"); // two data points
    assert_eq!(row[11], "4"); // all four ordered pairs within eps = 5
}
