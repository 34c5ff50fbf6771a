use std::path::Path;
use std::process::{Command, Output};

use ecqp_core::problem::{random_problem, write_problem};

fn ecqp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ecqp"))
        .args(args)
        .env_remove("ECQP_THREADS")
        .output()
        .expect("spawn ecqp")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn markers(svg: &str) -> usize {
    let doc = roxmltree::Document::parse(svg).expect("svg is well-formed xml");
    doc.descendants().filter(|n| n.attribute("class") == Some("marker")).count()
}

const SMALL: [&str; 6] = ["--n", "24", "--count", "7", "--seed", "11"];

#[test]
fn sweep_csv_rows_and_svg_markers() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let svg = dir.path().join("s.svg");
    let mut args = vec!["sweep", "--out-csv", csv.to_str().unwrap(), "--out-svg", svg.to_str().unwrap()];
    args.extend(SMALL);
    let out = ecqp(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = read(&csv);
    let rows = text.lines().count() - 1;
    assert_eq!(rows, 7 * 2);
    assert_eq!(markers(&read(&svg)), rows);
}

#[test]
fn thread_count_does_not_change_output() {
    let run = |threads: &str| {
        let mut args = vec!["sweep", "--threads", threads, "--solvers", "admm-gmres,constr2"];
        args.extend(SMALL);
        let out = ecqp(&args);
        assert_eq!(code(&out), 0);
        out.stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn iteration_cap_gives_exit_two() {
    let mut args = vec!["sweep", "--solvers", "admm", "--max-iters", "3"];
    args.extend(SMALL);
    let out = ecqp(&args);
    assert_eq!(code(&out), 2);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().skip(1).all(|l| l.contains(",max_iters,")), "{text}");
}

#[test]
fn bad_configuration_gives_exit_one() {
    assert_eq!(code(&ecqp(&["sweep", "--tol", "0"])), 1);
    assert_eq!(code(&ecqp(&["sweep", "--solvers", "cg"])), 1);
    assert_eq!(code(&ecqp(&["sweep", "--n", "10", "--m", "20"])), 1);
    assert_eq!(code(&ecqp(&["solve", "/nonexistent/problem.txt"])), 1);
    let bad = Command::new(env!("CARGO_BIN_EXE_ecqp")).args(["sweep"]).env("ECQP_THREADS", "zero").output().unwrap();
    assert_eq!(code(&bad), 1);
}

#[test]
fn config_file_is_overridden_by_flags_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "n=20\ncount=3\nseed=4\nsolvers=admm,hss\ntol=1e-5\n").unwrap();
    let saved = dir.path().join("saved.cfg");
    let out = ecqp(&[
        "sweep", "--config", cfg.to_str().unwrap(), "--count", "2", "--save-config", saved.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 2);
    let saved_text = read(&saved);
    assert!(saved_text.contains("count=2\n") && saved_text.contains("n=20\n") && saved_text.contains("solvers=admm,hss\n"));
    // Replaying the saved file alone gives the same run.
    let again = ecqp(&["sweep", "--config", saved.to_str().unwrap()]);
    assert_eq!(again.stdout, text.as_bytes());
}

#[test]
fn solve_reads_problem_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.txt");
    let prob = random_problem(16, 9, 4, 0.8, 3).unwrap();
    let mut f = std::fs::File::create(&path).unwrap();
    write_problem(&mut f, &prob).unwrap();
    drop(f);
    let out = ecqp(&["solve", path.to_str().unwrap(), "--tol", "1e-9"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 8);
    assert!(text.lines().skip(1).all(|l| l.contains(",converged,")));
}

#[test]
fn compare_prints_one_row_per_solver() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("c.csv");
    let mut args = vec!["compare", "--solvers", "admm,admm-gmres,blkdiag", "--out-csv", csv.to_str().unwrap()];
    args.extend(SMALL);
    let out = ecqp(&args);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1 + 3);
    assert_eq!(read(&csv).lines().count(), 1 + 5 * 3);
}

#[test]
fn worstcase_and_diagnose_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("w.csv");
    let svg = dir.path().join("w.svg");
    let out = ecqp(&[
        "worstcase", "--m", "16", "--kappa", "100", "--out-csv", csv.to_str().unwrap(), "--out-svg", svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let rows = read(&csv).lines().count() - 1;
    assert_eq!(markers(&read(&svg)), rows);

    let eigs = dir.path().join("e.txt");
    let dsvg = dir.path().join("d.svg");
    let mut args = vec!["diagnose", "--out-eigs", eigs.to_str().unwrap(), "--out-svg", dsvg.to_str().unwrap()];
    args.extend(SMALL);
    let out = ecqp(&args);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1 + 7);
    assert_eq!(markers(&read(&dsvg)), 7);
    assert_eq!(read(&eigs).lines().filter(|l| l.starts_with('#')).count(), 7);
}

#[test]
fn sdp_rejects_saddle_solvers() {
    assert_eq!(code(&ecqp(&["sdp", "--n", "6", "--solvers", "hss"])), 1);
    let out = ecqp(&["sdp", "--n", "6", "--kappa", "100"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1 + 3);
}
