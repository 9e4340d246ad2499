//! End-to-end tests of the `lvem` binary: flags, files, exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn lvem(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lvem"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_code(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn mesh_is_deterministic_and_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = lvem(&["mesh", "--cells", "12", "--seed", "3", "-o", "a.json"], dir.path());
    assert_code(&a, 0);
    let b = lvem(&["mesh", "--cells", "12", "--seed", "3", "-o", "b.json"], dir.path());
    assert_code(&b, 0);
    let fa = std::fs::read(dir.path().join("a.json")).unwrap();
    let fb = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(fa, fb);
    let text = String::from_utf8(fa).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed["cells"].as_array().unwrap().len(), 12);
}

#[test]
fn mesh_zero_cells_exits_2_naming_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = lvem(&["mesh", "--cells", "0", "-o", "m.json"], dir.path());
    assert_code(&out, 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--cells"), "stderr: {err}");
}

#[test]
fn missing_mesh_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = lvem(&["solve", "--mesh", "nope.json", "--problem", "laplace"], dir.path());
    assert_code(&out, 2);
}

#[test]
fn unknown_flag_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = lvem(&["mesh", "--wibble", "7", "-o", "m.json"], dir.path());
    assert_code(&out, 2);
}

#[test]
fn one_cell_solve_returns_boundary_data() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(&lvem(&["mesh", "--cells", "1", "-o", "m.json"], dir.path()), 0);
    let out = lvem(
        &["solve", "--mesh", "m.json", "--problem", "laplace", "--backend", "lightning",
          "--eps_fit", "1e-6", "-o", "sol.json"],
        dir.path(),
    );
    assert_code(&out, 0);
    let sol: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sol.json")).unwrap())
            .unwrap();
    assert_eq!(sol["problem"], "laplace");
    assert_eq!(sol["backend"], "lightning");
    // a 1-cell mesh has only boundary vertices, so the solution is the
    // boundary datum u = sin(pi x) sin(pi y) + log(1 + x y) at the corners
    let dofs: Vec<f64> = sol["dofs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(dofs.len(), 4);
    let expected_max = 2f64.ln();
    let max = dofs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!((max - expected_max).abs() < 1e-12, "dofs: {dofs:?}");
    assert_eq!(dofs.iter().filter(|d| d.abs() < 1e-12).count(), 3);
}

#[test]
fn probe_matches_exact_solution_and_rejects_bad_points() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(&lvem(&["mesh", "--cells", "64", "--seed", "0", "-o", "m.json"], dir.path()), 0);
    let out = lvem(
        &["solve", "--mesh", "m.json", "--problem", "laplace", "--eps_fit", "1e-6",
          "--probe", "0.5,0.5"],
        dir.path(),
    );
    assert_code(&out, 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let value: f64 = stdout
        .lines()
        .find(|l| l.starts_with("u("))
        .and_then(|l| l.split('=').nth(1))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    let exact = 1.0 + 1.25f64.ln(); // u(0.5, 0.5)
    assert!((value - exact).abs() < 5e-2, "probe {value} vs exact {exact}");

    // outside the domain
    let out = lvem(
        &["solve", "--mesh", "m.json", "--problem", "laplace", "--eps_fit", "1e-6",
          "--probe", "1.5,0.5"],
        dir.path(),
    );
    assert_code(&out, 2);

    // vanilla backend has no pointwise reconstruction
    let out = lvem(
        &["solve", "--mesh", "m.json", "--problem", "laplace", "--backend", "vanilla",
          "--probe", "0.5,0.5"],
        dir.path(),
    );
    assert_code(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("reconstruction"));
}

#[test]
fn converge_emits_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = lvem(
        &["converge", "--problem", "laplace", "--cells", "4,16", "--eps_fit", "1e-6",
          "-o", "conv.csv", "--plot", "conv.svg"],
        dir.path(),
    );
    assert_code(&out, 0);
    let csv = std::fs::read_to_string(dir.path().join("conv.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n_cells,h_max,e_L2,e_H1,rate_L2,rate_H1,assembly_s,solve_s");
    assert_eq!(lines.len(), 3);
    let row1: Vec<&str> = lines[1].split(',').collect();
    let row2: Vec<&str> = lines[2].split(',').collect();
    assert!(row1[4].is_empty() && row1[5].is_empty());
    assert!(!row2[4].is_empty() && !row2[5].is_empty());
    assert!(row2[2].parse::<f64>().unwrap() < row1[2].parse::<f64>().unwrap());

    let svg = std::fs::read_to_string(dir.path().join("conv.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert_eq!(svg.matches("class=\"guide\"").count(), 2);
}

#[test]
fn compare_emits_timing_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = lvem(&["compare", "--cells", "4", "-o", "timing.csv"], dir.path());
    assert_code(&out, 0);
    let csv = std::fs::read_to_string(dir.path().join("timing.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n_cells,vanilla_avg_s,lightning_avg_s");
    assert_eq!(lines.len(), 2);
    let row: Vec<&str> = lines[1].split(',').collect();
    assert!(row[1].parse::<f64>().unwrap() > 0.0);
    assert!(row[2].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn config_file_respected_with_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.conf"), "cells = 4\nseed = 1\n").unwrap();
    // config supplies cells
    let out = lvem(&["--config", "run.conf", "mesh", "-o", "a.json"], dir.path());
    assert_code(&out, 0);
    let a: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.json")).unwrap())
            .unwrap();
    assert_eq!(a["cells"].as_array().unwrap().len(), 4);
    // flag overrides config
    let out = lvem(
        &["--config", "run.conf", "mesh", "--cells", "9", "-o", "b.json"],
        dir.path(),
    );
    assert_code(&out, 0);
    let b: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("b.json")).unwrap())
            .unwrap();
    assert_eq!(b["cells"].as_array().unwrap().len(), 9);
    // unknown config key rejected
    std::fs::write(dir.path().join("bad.conf"), "volume = 11\n").unwrap();
    let out = lvem(&["--config", "bad.conf", "mesh", "-o", "c.json"], dir.path());
    assert_code(&out, 2);
}
