use std::path::Path;
use std::process::{Command, Output};

fn latstretch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latstretch"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(2)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn counterexample_fixtures() {
    let out = latstretch(&[
        "counterexample",
        "--p",
        "2",
        "--r",
        "4.96",
        "--s",
        "1",
        "--s",
        "1.15",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("# latstretch counterexample v1\nr,s,count,difference_from_first\n"));
    assert_eq!(rows(&text)[1], ["4.96", "1.15", "16", "3"]);

    let out = latstretch(&[
        "counterexample",
        "--p",
        "1",
        "--r",
        "4.96",
        "--s",
        "1",
        "--s",
        "1.41421356237309515",
    ]);
    assert_eq!(rows(&stdout(&out))[1][3], "3");

    let out = latstretch(&[
        "counterexample",
        "--p",
        "inf",
        "--r",
        "4",
        "--s",
        "1",
        "--s",
        "2",
    ]);
    let r = rows(&stdout(&out));
    assert_eq!((r[0][2].as_str(), r[1][2].as_str()), ("16", "16"));
}

#[test]
fn custom_curve_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.json");
    std::fs::write(&path, r#"{"kind":"pcircle","p":2}"#).unwrap();
    let out = latstretch(&[
        "counterexample",
        "--curve",
        path.to_str().unwrap(),
        "--r",
        "4.96",
        "--s",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(rows(&stdout(&out))[0][2], "13");
}

#[test]
fn single_radius_scan() {
    let out = latstretch(&["scan", "--p", "2", "--r", "4.96"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with(
        "# latstretch scan v1\nr,log_r,extremal_count,sup_s,inf_s,every_s,intervals\n"
    ));
    let line = text.lines().nth(2).unwrap();
    let count: u64 = line.split(',').nth(2).unwrap().parse().unwrap();
    assert!(count >= 16);
}

fn scan_bytes(dir: &Path, name: &str, jobs: &str) -> Vec<u8> {
    let path = dir.join(name);
    let out = latstretch(&[
        "scan",
        "--p",
        "1.5",
        "--r-start",
        "50",
        "--r-count",
        "60",
        "--jobs",
        jobs,
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    std::fs::read(path).unwrap()
}

#[test]
fn output_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let one = scan_bytes(dir.path(), "a.csv", "1");
    let again = scan_bytes(dir.path(), "b.csv", "1");
    let three = scan_bytes(dir.path(), "c.csv", "3");
    assert_eq!(one, again);
    assert_eq!(one, three);
    assert_eq!(String::from_utf8(one).unwrap().lines().count(), 62);
}

#[test]
fn audit_is_seeded_and_clean() {
    let a = latstretch(&["audit", "--seed", "42", "--draws", "1000"]);
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    let text = stdout(&a);
    assert!(text.lines().skip(2).all(|l| l.contains(",true,")));
    let b = latstretch(&["audit", "--seed", "42", "--draws", "1000", "--jobs", "2"]);
    assert_eq!(a.stdout, b.stdout);
    let c = latstretch(&["audit", "--seed", "7", "--draws", "1000"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn cluster_rows() {
    let out = latstretch(&["cluster", "--max-m", "1000"]);
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&stdout(&out));
    assert_eq!(
        r[0][..5],
        ["3", "4.94974746831", "0.949747468306", "9", "6"]
    );
    assert!(r
        .iter()
        .filter(|row| row[0].parse::<u64>().unwrap() >= 10)
        .all(|row| row[5].parse::<f64>().unwrap() >= 0.4));
}

#[test]
fn eigen_and_oscillator_tables() {
    let out = latstretch(&["eigen", "--n", "1", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&stdout(&out));
    assert_eq!(r[0][..3], ["1", "dirichlet_min", "2"]);
    assert!(r[1][2].parse::<f64>().unwrap() <= 5.0);
    let out = latstretch(&["oscillator", "--max-n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&stdout(&out));
    assert_eq!(r[0][2], "1");
}

#[test]
fn config_runs_match_flag_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(
        &config,
        r#"{"experiment":"counterexample","p":2,"r":[4.96],"s":[1,1.15],"parallelism":1}"#,
    )
    .unwrap();
    let from_config = latstretch(&["--config", config.to_str().unwrap()]);
    let from_flags = latstretch(&[
        "counterexample",
        "--p",
        "2",
        "--r",
        "4.96",
        "--s",
        "1",
        "--s",
        "1.15",
    ]);
    assert_eq!(from_config.status.code(), Some(0));
    assert_eq!(from_config.stdout, from_flags.stdout);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("empty.json");
    std::fs::write(&config, r#"{"experiment":"eigen_asymptotics","n":[]}"#).unwrap();
    assert_eq!(
        latstretch(&["--config", config.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        latstretch(&["scan", "--r-count", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        latstretch(&["scan", "--p", "0.5", "--r", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(latstretch(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(latstretch(&[]).status.code(), Some(2));
    assert_eq!(
        latstretch(&["counterexample", "--r", "3"]).status.code(),
        Some(2)
    );
    let bad = dir.path().join("missing").join("out.csv");
    assert_eq!(
        latstretch(&["cluster", "--max-m", "5", "--out", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(latstretch(&["--help"]).status.code(), Some(0));
}
