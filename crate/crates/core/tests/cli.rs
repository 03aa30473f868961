// SPDX-License-Identifier: Apache-2.0

//! End-to-end runs of the `cavqed` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn cavqed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavqed"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run(name: &str, out: &Path, extra: &[&str]) -> Output {
    let file = scenarios().join(name);
    let mut args = vec![
        "run",
        file.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let o = cavqed(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    o
}

#[test]
fn lifetime_vs_detuning_zero_detuning_row_is_87_us() {
    let dir = tempfile::tempdir().unwrap();
    run("lifetime_vs_detuning.scn", dir.path(), &[]);
    let csv = std::fs::read_to_string(dir.path().join("lifetime_vs_detuning.csv")).unwrap();
    assert!(csv.starts_with("detuning_m,lifetime_s\n"));
    let row = csv
        .lines()
        .find(|l| l.starts_with("0,"))
        .expect("Δλ = 0 row");
    let tau: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((tau - 87e-6).abs() < 1e-12, "{tau}");
}

#[test]
fn ensemble_scan_same_seed_same_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run("ensemble_scan.scn", a.path(), &["--seed", "1"]);
    run(
        "ensemble_scan.scn",
        b.path(),
        &["--seed", "1", "--threads", "3"],
    );
    let read = |d: &Path| std::fs::read(d.join("ensemble_scan.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    let c = tempfile::tempdir().unwrap();
    run("ensemble_scan.scn", c.path(), &["--seed", "2"]);
    assert_ne!(read(a.path()), read(c.path()));
}

#[test]
fn figs5_report_has_depth_and_width() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("single_ion.scn", dir.path(), &[]);
    let report = std::fs::read_to_string(dir.path().join("single_ion_report.csv")).unwrap();
    let mut lines = report.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    let get = |k: &str| row[header.iter().position(|h| *h == k).unwrap()];
    assert!(get("dip_depth") > 0.8);
    assert!((9e3..=21e3).contains(&get("dip_fwhm_hz")));
    assert!(String::from_utf8_lossy(&o.stdout).contains("dip_depth = "));
}

#[test]
fn manifest_echoes_inputs_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    run("ensemble_scan.scn", dir.path(), &["--seed", "7"]);
    let text = std::fs::read_to_string(dir.path().join("ensemble_scan.manifest.json")).unwrap();
    let m: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(m["seed"], 7);
    assert_eq!(m["command"], "sfs-scan");
    assert_eq!(m["inputs"]["n_peak"], "53");
    assert_eq!(m["software"]["version"], env!("CARGO_PKG_VERSION"));
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
    // the echoed text alone reproduces the run
    let again = tempfile::tempdir().unwrap();
    let file = again.path().join("ensemble_scan.scn");
    std::fs::write(&file, m["scenario_text"].as_str().unwrap()).unwrap();
    let o = cavqed(&[
        "run",
        file.to_str().unwrap(),
        "--seed",
        "7",
        "--out",
        again.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(
        std::fs::read(dir.path().join("ensemble_scan.csv")).unwrap(),
        std::fs::read(again.path().join("ensemble_scan.csv")).unwrap()
    );
}

#[test]
fn validate_lists_every_error_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.scn");
    std::fs::write(
        &file,
        "command = purcell\nq = -4400\nv_mode = 1.65 GHz\ncolour = blue\n",
    )
    .unwrap();
    let o = cavqed(&["validate", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(
        err.lines()
            .filter(|l| l.starts_with("error[validation]"))
            .count(),
        3,
        "{err}"
    );
    assert!(err.contains("`q`") && err.contains("`v_mode`") && err.contains("`colour`"));

    let good = cavqed(&[
        "validate",
        scenarios().join("purcell.scn").to_str().unwrap(),
    ]);
    assert!(good.status.success());
}

#[test]
fn fit_subcommand_and_numerical_failure() {
    let data = scenarios().join("data/lifetime_decay.csv");
    let o = cavqed(&["fit", "exponential", data.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = String::from_utf8_lossy(&o.stdout);
    let tau: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("tau = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((tau / 87e-6 - 1.0).abs() < 1e-9);

    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.csv");
    std::fs::write(&flat, "t,y\n0,1\n1,1\n2,1\n3,1\n4,1\n").unwrap();
    let o = cavqed(&["fit", "exponential", flat.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[numerical]"));

    let o = cavqed(&["fit", "spline", flat.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dit_dip_fit_needs_the_cavity() {
    let dir = tempfile::tempdir().unwrap();
    run("ensemble_scan.scn", dir.path(), &[]);
    let csv = dir.path().join("ensemble_scan.csv");
    let o = cavqed(&["fit", "dit_dip", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = cavqed(&[
        "fit",
        "dit_dip",
        csv.to_str().unwrap(),
        "--set",
        "q=4400",
        "--set",
        "v_mode=1.65",
        "--set",
        "g=6 MHz",
        "--set",
        "gamma_h=100 kHz",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = String::from_utf8_lossy(&o.stdout);
    let n: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("n_peak = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((n / 53.0 - 1.0).abs() < 1e-3, "{n}");
}
