// SPDX-License-Identifier: Apache-2.0

//! Every bundled scenario parses, runs, and reproduces its headline number.

use std::path::{Path, PathBuf};
use std::time::Instant;

use cavqed::scenario::{load_scenario, run_scenario, Command};

fn bundled() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "scn"))
        .collect();
    files.sort();
    files
}

fn result(results: &[(String, f64)], key: &str) -> f64 {
    results
        .iter()
        .find(|(k, _)| k == key)
        .unwrap_or_else(|| panic!("no {key}"))
        .1
}

#[test]
fn all_bundled_scenarios_run_quickly() {
    let out = tempfile::tempdir().unwrap();
    let files = bundled();
    assert!(files.len() >= 10);
    for file in files {
        let s = load_scenario(&file).unwrap_or_else(|e| panic!("{}: {e}", file.display()));
        let start = Instant::now();
        let r = run_scenario(&s, out.path()).unwrap_or_else(|e| panic!("{}: {e}", file.display()));
        assert!(start.elapsed().as_secs_f64() < 60.0, "{}", file.display());
        assert!(r.csv.exists() && r.manifest.exists());
        let res = &r.results;
        match s.name.as_str() {
            "purcell" => {
                assert!((result(res, "peak_purcell") - 202.6).abs() < 0.1);
                assert!((result(res, "purcell_from_lifetimes") - 42.7).abs() < 0.1);
            }
            "echo_decay" => assert!((result(res, "t2") / 94e-6 - 1.0).abs() < 0.02),
            "ensemble_scan" => assert!((0.20..=0.26).contains(&result(res, "center_transmission"))),
            "scalability" => {
                assert!((result(res, "emission_fraction_at_purcell") - 0.991).abs() < 1e-3)
            }
            "saturation" => {
                let half = result(res, "half_saturation_photon_number");
                assert!(half > 2e-5 / 3.0 && half < 2e-5 * 3.0);
            }
            "spectral_diffusion" => {
                assert!((result(res, "spectral_diffusion_rate") / 6.1e9 - 1.0).abs() < 0.02)
            }
            "fit_lifetime" => assert!((result(res, "tau") / 87e-6 - 1.0).abs() < 1e-9),
            _ => {}
        }
    }
}

#[test]
fn every_command_has_a_bundled_scenario() {
    let commands: Vec<Command> = bundled()
        .iter()
        .map(|f| load_scenario(f).unwrap().command)
        .collect();
    for c in Command::ALL {
        assert!(commands.contains(&c), "no scenario for {c}");
    }
}
