use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

const GAUSSIAN: &str = "alpha.kind = constant\nalpha.params = 2\ngrid.lo = -5\ngrid.hi = 5\ngrid.n = 51\ntime.points = 0.1, 1\n";

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("varorder-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.cfg");
    fs::write(&p, text).unwrap();
    p
}

fn varorder(args: &[&str]) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_varorder"));
    c.args(args);
    c
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn density_run_passes_and_writes_csv() {
    let dir = scratch("density");
    let cfg = write_config(&dir, GAUSSIAN);
    let out = dir.join("out");
    let status = varorder(&["density", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let report = fs::read_to_string(out.join("density_report.csv")).unwrap();
    assert!(report.starts_with("experiment,quantity,value,target,tolerance,pass,provenance"));
    assert!(report.contains("gaussian_closed_form"));
    let raw = fs::read_to_string(out.join("density_rho2_t0.1.csv")).unwrap();
    assert_eq!(raw.lines().next(), Some("x,p,p',p'',dp_drho"));
    assert_eq!(raw.lines().count(), 52);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn same_config_and_seed_give_identical_files() {
    let dir = scratch("repro");
    let cfg = write_config(&dir, GAUSSIAN);
    let runs: Vec<Vec<(String, Vec<u8>)>> = ["a", "b"]
        .iter()
        .map(|sub| {
            let out = dir.join(sub);
            let st = varorder(&["density", "--config", cfg.to_str().unwrap(), "--seed", "5", "--out", out.to_str().unwrap()]).status().unwrap();
            assert!(st.success());
            read_dir_sorted(&out)
        })
        .collect();
    assert!(!runs[0].is_empty());
    assert_eq!(runs[0], runs[1]);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_errors_exit_with_two() {
    let dir = scratch("config");
    let bad = write_config(&dir, "alpha.kind = wavy\n");
    let out = varorder(&["density", "--config", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha.kind"));
    assert_eq!(varorder(&["density", "--config", "/nonexistent/x.cfg"]).status().unwrap().code(), Some(2));
    assert_eq!(varorder(&["density"]).status().unwrap().code(), Some(2));
    assert_eq!(varorder(&["plot", "--config", bad.to_str().unwrap()]).status().unwrap().code(), Some(2));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn numeric_failure_exits_with_one() {
    let dir = scratch("numeric");
    let cfg = write_config(&dir, GAUSSIAN);
    let out = dir.join("out");
    let status = varorder(&["density", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env("VARORDER_TOL_CLOSED_FORM", "1e-300")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    let report = fs::read_to_string(out.join("density_report.csv")).unwrap();
    assert!(report.contains(",false,"));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = scratch("runtime");
    let cfg = write_config(&dir, GAUSSIAN);
    let blocker = dir.join("file");
    fs::write(&blocker, "x").unwrap();
    let status = varorder(&["density", "--config", cfg.to_str().unwrap(), "--out", blocker.join("sub").to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
    fs::remove_dir_all(&dir).ok();
}
