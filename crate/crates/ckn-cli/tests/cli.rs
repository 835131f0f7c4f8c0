//! End-to-end tests of the `ckn` binary: exit codes, output formats,
//! bit-for-bit reproducibility from the echoed configuration header.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ckn"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("ckn-cli-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn selfcheck_passes() {
    let out = run(&["selfcheck"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("# selfcheck passed"));
}

#[test]
fn spectrum_reports_base_levels() {
    let out = run(&["spectrum", "--N", "4", "--a", "0", "--b", "0", "--lambda", "0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("# bound_states=2"));
    assert!(text.contains("0,-4.0000000000000000e0"));
    assert!(text.contains("1,-1.0000000000000000e0"));
}

#[test]
fn curves_pin_the_mode1_zero() {
    let out = run(&[
        "curves", "--N", "4", "--lambda", "0", "--a-min", "-1", "--a-max", "1",
        "--a-points", "3", "--j", "1",
    ]);
    assert!(out.status.success());
    // Row at a = 0: h₁ = 0 for the derived variant.
    let text = stdout(&out);
    let row = text
        .lines()
        .find(|l| l.starts_with("0.0000000000000000e0,1,"))
        .expect("a = 0 row present");
    let h_derived: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!(h_derived.abs() < 1e-14);
}

#[test]
fn regions_agree_on_a_small_grid() {
    let out = run(&[
        "regions", "--N", "4", "--a-min", "-1.2", "--a-max", "0.4", "--a-points", "5",
        "--b-min", "-1.2", "--b-max", "0.8", "--b-points", "5",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut rows = 0;
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("a,")) {
        let agree = line.split(',').last().unwrap();
        assert_eq!(agree, "1", "row disagrees: {line}");
        rows += 1;
    }
    assert!(rows >= 5, "expected several valid grid points, got {rows}");
}

#[test]
fn groundstate_emits_a_parseable_profile() {
    let out = run(&[
        "groundstate", "--N", "5", "--a", "0.2", "--b", "0.5", "--lambda", "-1",
        "--L", "20", "--n", "500",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    // Strip the run header; the profile body starts at its own grid header.
    let body_start = text.find("# L=").expect("profile header present");
    let profile = ckn_core::grid::read_profile_csv(&text[body_start..]).unwrap();
    assert_eq!(profile.grid().len(), 500);
    assert!(profile.values().iter().all(|&v| v > 0.0));
}

#[test]
fn gamma_reports_second_derivative_data() {
    let out = run(&[
        "gamma", "--N", "4", "--a", "0", "--b", "0", "--lambda", "0",
        "--k", "rational:0,1", "--mu-points", "9",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("# gamma_at_0=0.0000000000000000e0"));
    let g2_line = text
        .lines()
        .find(|l| l.starts_with("# gamma2_at_0="))
        .expect("gamma2 header");
    let g2: f64 = g2_line.trim_start_matches("# gamma2_at_0=").parse().unwrap();
    let expected = 32.0 * std::f64::consts::PI.powi(2) / 3.0;
    assert!((g2 - expected).abs() <= 1e-9 * expected);
}

#[test]
fn solve_certifies_the_demo_point() {
    let w_path = tmp("w.csv");
    let out = run(&[
        "solve", "--N", "4", "--a", "0", "--b", "0.3", "--lambda", "0",
        "--k", "gaussian-bump:1,0,1", "--eps", "0.01", "--mu-points", "41",
        "--w-out", w_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("# critical_points=1"));
    let row = text
        .lines()
        .find(|l| !l.starts_with('#') && !l.starts_with("mu_star"))
        .expect("critical point row");
    let cols: Vec<&str> = row.split(',').collect();
    let residual: f64 = cols[2].parse().unwrap();
    let alpha: f64 = cols[3].parse().unwrap();
    assert!(residual <= 1e-6);
    assert!(alpha.abs() <= 1e-8);
    assert_eq!(cols[6], "1");

    // The correction profile is written with its certificate and parses back.
    let w_text = std::fs::read_to_string(&w_path).unwrap();
    assert!(w_text.contains("# alpha="));
    let w = ckn_core::grid::read_profile_csv(&w_text).unwrap();
    assert_eq!(w.grid().len(), 8000);
    std::fs::remove_file(&w_path).ok();
}

#[test]
fn reduce_handles_tabulated_and_multiple_eps() {
    let table_path = tmp("table.csv");
    std::fs::write(
        &table_path,
        "# k0=0 kinf=0 laplacian0=0\n0,0\n0.5,0.3\n1,1\n2,0.3\n8,0\n",
    )
    .unwrap();
    let out = run(&[
        "reduce", "--N", "4", "--a", "0", "--b", "0.3", "--lambda", "0",
        "--k", &format!("tabulated:{}", table_path.display()),
        "--eps", "0.01,0.005",
        "--mu-min", "0.2", "--mu-max", "5", "--mu-points", "7",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("# eps=0.01"));
    assert!(text.contains("# eps=0.005"));
    let rows = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("mu,"))
        .count();
    assert_eq!(rows, 14);
    std::fs::remove_file(&table_path).ok();
}

#[test]
fn exit_codes_classify_failures() {
    // Domain error: b outside the admissible strip.
    let out = run(&["spectrum", "--N", "4", "--a", "0", "--b", "1.5", "--lambda", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("b < a+1"));

    // Degenerate parameters are refused as a domain error.
    let out = run(&[
        "solve", "--N", "4", "--a", "0", "--b", "0", "--lambda", "0",
        "--k", "gaussian-bump:1,0,1", "--eps", "0.01", "--mu-points", "5",
    ]);
    assert_eq!(out.status.code(), Some(1));

    // Malformed perturbation spec.
    let out = run(&[
        "gamma", "--N", "4", "--a", "0", "--b", "0.3", "--lambda", "0",
        "--k", "unknown:1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn outputs_reproduce_bit_for_bit_from_the_header() {
    let path1 = tmp("curves1.csv");
    let path2 = tmp("curves2.csv");
    let out = run(&[
        "curves", "--N", "5", "--lambda", "-0.75", "--a-min", "-2", "--a-max", "1.2",
        "--a-points", "17", "--j", "1,2,3", "--out", path1.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let first = std::fs::read_to_string(&path1).unwrap();

    // Reconstruct the invocation from the echoed header.
    let cmd_line = first
        .lines()
        .find(|l| l.starts_with("# cmd: "))
        .unwrap()
        .trim_start_matches("# cmd: ")
        .to_string();
    let mut args: Vec<&str> = cmd_line.split_whitespace().collect();
    args.push("--out");
    args.push(path2.to_str().unwrap());
    let rerun = run(&args);
    assert!(rerun.status.success());
    let second = std::fs::read_to_string(&path2).unwrap();
    // The --out flag is not part of the data; the contents must be equal.
    assert_eq!(first, second, "re-run from the echoed header must reproduce the file");
    std::fs::remove_file(&path1).ok();
    std::fs::remove_file(&path2).ok();
}
