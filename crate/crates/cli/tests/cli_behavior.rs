//! End-to-end behavior of the binary: exit codes, --out, refusals, parse
//! diagnostics, and the convenience subcommands.

use std::path::PathBuf;
use std::process::Command;

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_frobset")
}

fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

#[test]
fn run_writes_report_to_out_path() {
    let dir = tempdir();
    let out_path = dir.join("report.json");
    let out = Command::new(exe())
        .args(["run"])
        .arg(scenario_path("recsolve_period_fib10.scn"))
        .arg("--out")
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let written = std::fs::read(&out_path).unwrap();
    assert_eq!(written, out.stdout, "--out bytes must match stdout");
    let v: serde_json::Value = serde_json::from_slice(&written).unwrap();
    assert_eq!(v["canonical"]["results"]["period"], serde_json::json!(60));
    assert_eq!(v["canonical"]["results"]["preperiod"], serde_json::json!(0));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn parse_error_reports_line_and_column() {
    let dir = tempdir();
    let bad = dir.join("bad.scn");
    std::fs::write(&bad, "kind = fset\n[module]\nfree_rank = [1,\n").unwrap();
    let out = Command::new(exe()).arg("run").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "stderr: {err}");
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn unknown_key_is_rejected_with_name() {
    let dir = tempdir();
    let bad = dir.join("unknown.scn");
    std::fs::write(&bad, "kind = drinfeld-sharp\n\n[sharp]\nq = 3\ndeg_bound = 6\nwhat = 1\n")
        .unwrap();
    let out = Command::new(exe()).arg("run").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("'what'"), "stderr: {err}");
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn refusal_exits_nonzero() {
    // F = 0 fails the zero-divisor axiom; the pipeline must refuse.
    let dir = tempdir();
    let path = dir.join("refused.scn");
    std::fs::write(
        &path,
        "kind = orbit-intersect\n\n[module]\nfree_rank = 1\ntorsion_orders = []\na_ff = [[0]]\na_tf = []\na_tt = []\nmin_poly = [0, 1]\n\n[orbit]\nbase = ([0], [])\nterm = (([1], []), 1)\n\n[subgroup]\ngenerator = ([1], [])\n",
    )
    .unwrap();
    let out = Command::new(exe()).arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("refused"), "stderr: {err}");
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn drinfeld_survey_subcommand() {
    let out = Command::new(exe())
        .args([
            "drinfeld", "survey", "--q", "3", "--phi-t", "0,1,1", "--deg-bound", "4",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["canonical"]["results"]["two_term_count"], serde_json::json!(2));
}

#[test]
fn drinfeld_sharp_subcommand() {
    let out = Command::new(exe())
        .args(["drinfeld", "sharp", "--q", "3", "--deg-bound", "4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(
        v["canonical"]["results"]["on_x_equals_even_subring"],
        serde_json::json!(true)
    );
}

#[test]
fn gm_intersect_subcommand_with_box_override() {
    let out = Command::new(exe())
        .args(["gm", "intersect"])
        .arg(scenario_path("gm_unit_equation.scn"))
        .args(["--box", "16"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // Box 16 keeps (1,1), (2,2), (4,4), (8,8), (16,16).
    assert_eq!(v["canonical"]["results"]["solution_count"], serde_json::json!(5));
}

#[test]
fn selftest_subcommand_passes() {
    let out = Command::new(exe())
        .args(["selftest", "--seed", "7", "--count", "3"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stdout: {}", String::from_utf8_lossy(&out.stdout));
}

fn tempdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "frobset-test-{}-{}",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .unwrap()
            .as_nanos()
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
