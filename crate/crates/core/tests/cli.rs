use std::fs;
use std::path::Path;
use std::process::Command;

use taubnut::cli::{parse_config, run, Task};

const BIN: &str = env!("CARGO_BIN_EXE_taubnut");

const N3: &str = "l = 2\nd = [1]\nalpha = [0, 1]\na = 0\n";

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("run.cfg");
    fs::write(&p, text).unwrap();
    p
}

fn invoke(cfg: &Path, args: &[&str]) -> std::process::Output {
    Command::new(BIN).arg("--config").arg(cfg).args(args).output().unwrap()
}

#[test]
fn invariants_prints_cone_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{N3}task = invariants\n"));
    let out = invoke(&cfg, &["--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("tau = [-1/2]; Lambda = Z_2; cone = (C^2/Z_2) x R; dim = 5"), "{stdout}");
    assert!(dir.path().join("o/report.txt").exists());
}

#[test]
fn csv_outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{N3}samples = 40\nray_max = 200\nradii = [50, 100]\n"));
    for task in ["decay-scan", "volume-fit", "deviation-scan"] {
        let a = dir.path().join(format!("{task}-a"));
        let b = dir.path().join(format!("{task}-b"));
        for o in [&a, &b] {
            let out = invoke(&cfg, &["--task", task, "--seed", "11", "--out", o.to_str().unwrap()]);
            assert!(out.status.code().is_some(), "{task} crashed");
        }
        let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(names.iter().any(|n| n.to_string_lossy().ends_with(".csv")), "{task} wrote no csv");
        for n in names {
            assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{task}: {n:?} differs");
        }
    }
}

#[test]
fn decay_csv_header_and_precision() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{N3}task = decay-scan\nsamples = 20\nray_max = 100\n"));
    let out = invoke(&cfg, &["--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("decay_regular.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("rho,surrogate,norm_rm,norm_ric,deviation,region"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 6);
    let mantissa = first[0].split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
}

#[test]
fn impossible_tolerance_gives_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{N3}task = verify-metric\nsamples = 4\n"));
    let o = dir.path().join("o");
    let ok = invoke(&cfg, &["--out", o.to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let bad = invoke(&cfg, &["--out", o.to_str().unwrap(), "--tolerance", "kahler=1e-30"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("kahler residual"));
}

#[test]
fn config_errors_give_exit_two_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "l = 2\nd = [1]\nalpha = [1, 0]\na = 0\ntask = invariants\n");
    let out = invoke(&cfg, &["--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let cfg = write_config(dir.path(), "l = 2\ncolour = blue\n");
    assert_eq!(invoke(&cfg, &[]).status.code(), Some(2));
    let out = invoke(&write_config(dir.path(), N3), &["--task", "invariants", "--tolerance", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn library_run_reports_first_failure() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_config(&format!("{N3}samples = 3\n")).unwrap();
    cfg.task = Some(Task::VerifyMetric);
    cfg.out = Some(dir.path().to_path_buf());
    cfg.set_tolerance("flat", 0.0).unwrap();
    let outcome = run(&cfg).unwrap();
    assert_eq!(outcome.exit_code(), 1);
    assert!(outcome.failures[0].starts_with("flatness"), "{:?}", outcome.failures);
}

#[test]
fn verify_identities_passes_on_default_instances() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{N3}task = verify-identities\n"));
    let out = invoke(&cfg, &["--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}
