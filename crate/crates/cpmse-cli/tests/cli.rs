//! End-to-end checks of the binary: exit codes, output determinism, and the
//! plate/wedge consistency contract.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cpmse"))
}

fn temp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("cpmse-cli-test-{}-{name}", std::process::id()));
    p
}

fn write_config(name: &str, body: &str) -> PathBuf {
    let path = temp_path(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn help_and_usage_exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn bad_config_is_a_configuration_error() {
    let path = write_config("bad.cfg", "[media]\nepsilon_one = 10\n");
    let out = run(&["plate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("unknown key"), "stderr: {stderr}");
}

#[test]
fn validate_passes_and_fault_injection_fails() {
    let ok = run(&["validate", "--threads", "2"]);
    assert_eq!(ok.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert!(stdout.contains("PASS,frame_orthonormality"));
    assert!(stdout.contains("PASS,green_reciprocity"));
    assert!(stdout.contains("0 failures"));

    let bad = run(&["validate", "--threads", "2", "--inject-fault", "frame"]);
    assert_eq!(bad.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&bad.stdout);
    assert!(stdout.contains("FAIL,frame_orthonormality"), "{stdout}");
}

#[test]
fn pec_wedge_table_matches_closed_form() {
    let out = run(&["pec-wedge"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let first_row = stdout
        .lines()
        .find(|l| !l.starts_with('#') && !l.starts_with("phi"))
        .expect("data row");
    let fields: Vec<&str> = first_row.split(',').collect();
    let phi: f64 = fields[0].parse().unwrap();
    let upsilon: f64 = fields[1].parse().unwrap();
    assert_eq!(phi, 0.0);
    assert!((upsilon - 0.050295).abs() < 1e-5, "upsilon {upsilon}");
}

#[test]
fn strict_mode_flags_tolerance_misses_with_exit_3() {
    let cfg = "\
[sweep]
epsilon1_list = 10
[integration]
max_order = 1
order_tolerances = 0.00001, 0.00001
max_evals = 16384
seed = 5
";
    let path = write_config("strict.cfg", cfg);
    let relaxed = run(&["plate", "--config", path.to_str().unwrap()]);
    assert_eq!(relaxed.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&relaxed.stdout).contains("tolerance_miss"));

    let strict = run(&["plate", "--config", path.to_str().unwrap(), "--strict"]);
    assert_eq!(strict.status.code(), Some(3));
}

#[test]
fn matched_media_plate_row_is_all_zero() {
    let cfg = "\
[sweep]
epsilon1_list = 1
[integration]
max_evals = 1048576
seed = 9
";
    let path = write_config("matched.cfg", cfg);
    let out = run(&["plate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let row = stdout
        .lines()
        .find(|l| !l.starts_with('#') && !l.starts_with("epsilon1,"))
        .expect("data row");
    let fields: Vec<&str> = row.split(',').collect();
    let exact: f64 = fields[1].parse().unwrap();
    let header: Vec<&str> = stdout
        .lines()
        .find(|l| l.starts_with("epsilon1,"))
        .unwrap()
        .split(',')
        .collect();
    let shanks_idx = header.iter().position(|h| *h == "upsilon_shanks").unwrap();
    let shanks: f64 = fields[shanks_idx].parse().unwrap();
    assert!(exact.abs() < 1e-12, "exact {exact}");
    assert!(shanks.abs() < 1e-10, "mse {shanks}");
}

#[test]
fn wedge_csv_is_deterministic_and_ordered_by_phi() {
    let cfg = "\
[media]
epsilon1 = 10
[geometry]
theta = -0.75
r_over_d = -0.1
[sweep]
phi = 0.3, 0.0    # deliberately unsorted
[integration]
order_tolerances = 0.02, 0.05, 0.1
max_evals = 4194304
seed = 11
threads = 2
";
    let path = write_config("det.cfg", cfg);
    let out_a = temp_path("wedge-a.csv");
    let out_b = temp_path("wedge-b.csv");
    let a = run(&[
        "wedge",
        "--config",
        path.to_str().unwrap(),
        "--output",
        out_a.to_str().unwrap(),
    ]);
    assert_eq!(a.status.code(), Some(0), "{:?}", a);
    let b = run(&[
        "wedge",
        "--config",
        path.to_str().unwrap(),
        "--output",
        out_b.to_str().unwrap(),
    ]);
    assert_eq!(b.status.code(), Some(0));
    let text_a = std::fs::read(&out_a).unwrap();
    let text_b = std::fs::read(&out_b).unwrap();
    assert_eq!(text_a, text_b, "reruns must be byte-identical");

    let text = String::from_utf8(text_a).unwrap();
    let data_rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("phi,"))
        .collect();
    assert_eq!(data_rows.len(), 2);
    let phi0: f64 = data_rows[0].split(',').next().unwrap().parse().unwrap();
    let phi1: f64 = data_rows[1].split(',').next().unwrap().parse().unwrap();
    assert!(phi0 < phi1, "rows must be emitted in phi order");
}

#[test]
fn wedge_at_zero_angle_agrees_with_plate() {
    // Identical geometry, seed and budgets: the theta = 0 wedge run must
    // produce the same accelerated amplitude as the plate run.
    let shared = "\
[integration]
order_tolerances = 0.01, 0.02, 0.05
max_evals = 16777216
seed = 21
threads = 2
";
    let wedge_cfg = write_config(
        "flat-wedge.cfg",
        &format!(
            "[media]\nepsilon1 = 10\n[geometry]\ntheta = 0\nr_over_d = 0\n[sweep]\nphi = 0\n{shared}"
        ),
    );
    let plate_cfg = write_config(
        "flat-plate.cfg",
        &format!("[sweep]\nepsilon1_list = 10\n{shared}"),
    );
    let wedge_out = run(&["wedge", "--config", wedge_cfg.to_str().unwrap()]);
    assert_eq!(wedge_out.status.code(), Some(0));
    let plate_out = run(&["plate", "--config", plate_cfg.to_str().unwrap()]);
    assert_eq!(plate_out.status.code(), Some(0));

    let extract = |text: &str, column: &str| -> f64 {
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let header: Vec<String> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|s| s.to_string())
            .collect();
        let idx = header
            .iter()
            .position(|h| h == column)
            .unwrap_or_else(|| panic!("column {column} in {header:?}"));
        lines.next().unwrap().split(',').nth(idx).unwrap().parse().unwrap()
    };
    let wedge_upsilon = extract(
        &String::from_utf8_lossy(&wedge_out.stdout),
        "upsilon_shanks",
    );
    let plate_upsilon = extract(
        &String::from_utf8_lossy(&plate_out.stdout),
        "upsilon_shanks",
    );
    assert_eq!(
        wedge_upsilon.to_bits(),
        plate_upsilon.to_bits(),
        "wedge {wedge_upsilon} vs plate {plate_upsilon}"
    );
}
