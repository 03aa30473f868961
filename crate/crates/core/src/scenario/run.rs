// SPDX-License-Identifier: Apache-2.0

//! Scenario execution and artifact writing.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Map, Value};

use super::parse::Fields;
use super::*;
use crate::dynamics::{
    biexponential_echo, dip_metrics, drive_for_photon_number, half_saturation,
    linear_response_transmission, rabi_echo_scan, saturated_transmission, saturation_curve,
    saturation_photon_number, steady_state_transmission, three_pulse_echo, two_pulse_echo,
    MasterEqConfig, Pulse, PulseSequence,
};
use crate::fitting::{
    fit_biexponential, fit_dit_dip, fit_exponential, fit_gaussian, fit_linear, fit_lorentzian,
    FitResult,
};
use crate::model::gaussian_density;
use crate::profile::{GridProfile, ModeProfile, SurrogateProfile};
use crate::purcell::{
    emission_fraction, ensemble_average_purcell, extract_purcell_from_lifetimes,
    lifetime_vs_detuning, peak_purcell_factor,
};
use crate::spectrum::{Spectrum, Table};
use crate::transmission::{cooperativity, scan_spectrum, transmission, tuning_dip_spectrum};
use crate::Error;

/// Failure category of a run; each maps to a process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    /// Inputs rejected by a physics module.
    Validation(String),
    /// A numerical routine failed or the data were degenerate.
    Numerical(String),
    Io(String),
}

impl RunError {
    pub fn category(&self) -> &'static str {
        match self {
            Self::Validation(_) => "validation",
            Self::Numerical(_) => "numerical",
            Self::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 2,
            Self::Numerical(_) => 3,
            Self::Io(_) => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (Self::Validation(m) | Self::Numerical(m) | Self::Io(m)) = self;
        write!(f, "error[{}]: {m}", self.category())
    }
}

impl std::error::Error for RunError {}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Numerical(_) | Error::Degenerate(_) => Self::Numerical(e.to_string()),
            _ => Self::Validation(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> RunError {
    RunError::Io(format!("{}: {e}", path.display()))
}

/// Paths written by a run and the scalar results it reported.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub csv: PathBuf,
    pub report: Option<PathBuf>,
    pub manifest: PathBuf,
    pub results: Vec<(String, f64)>,
}

struct Artifact {
    csv: String,
    /// Scalars; written as a one-row `<stem>_report.csv` unless the main
    /// CSV already is that row.
    results: Vec<(String, f64)>,
    separate_report: bool,
}

impl Artifact {
    fn curve(csv: String, results: Vec<(&str, f64)>) -> Self {
        let results: Vec<(String, f64)> = results
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let separate_report = !results.is_empty();
        Self {
            csv,
            results,
            separate_report,
        }
    }

    fn row(results: Vec<(String, f64)>) -> Self {
        Self {
            csv: report_csv(&results),
            results,
            separate_report: false,
        }
    }
}

fn report_csv(results: &[(String, f64)]) -> String {
    let names: Vec<&str> = results.iter().map(|(k, _)| k.as_str()).collect();
    let mut t = Table::new(&names);
    t.push_row(&results.iter().map(|(_, v)| *v).collect::<Vec<_>>());
    t.to_csv()
}

/// Runs a validated scenario and writes its CSV, an optional report row
/// and `<stem>.manifest.json` into `out_dir`. CSV bytes depend only on the
/// scenario and its seed.
pub fn run_scenario(scenario: &Scenario, out_dir: &Path) -> Result<RunOutput, RunError> {
    let start = Instant::now();
    let artifact = execute(scenario)?;
    let wall = start.elapsed().as_secs_f64();

    let csv_path = out_dir.join(&scenario.output);
    if let Some(parent) = csv_path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
    }
    std::fs::write(&csv_path, &artifact.csv).map_err(|e| io_error(&csv_path, e))?;
    let stem = csv_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("out")
        .to_string();
    let report_path = if artifact.separate_report {
        let p = csv_path.with_file_name(format!("{stem}_report.csv"));
        std::fs::write(&p, report_csv(&artifact.results)).map_err(|e| io_error(&p, e))?;
        Some(p)
    } else {
        None
    };
    let manifest_path = csv_path.with_file_name(format!("{stem}.manifest.json"));
    let manifest = manifest(
        scenario,
        &artifact.results,
        &csv_path,
        report_path.as_deref(),
        wall,
    );
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&manifest_path, text + "\n").map_err(|e| io_error(&manifest_path, e))?;
    Ok(RunOutput {
        csv: csv_path,
        report: report_path,
        manifest: manifest_path,
        results: artifact.results,
    })
}

fn manifest(
    s: &Scenario,
    results: &[(String, f64)],
    csv: &Path,
    report: Option<&Path>,
    wall: f64,
) -> Value {
    let inputs: Map<String, Value> = Fields::parse(&s.source)
        .pairs()
        .into_iter()
        .map(|(k, v)| (k, Value::String(v)))
        .collect();
    let results: Map<String, Value> = results.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    let file = |p: &Path| p.file_name().map(|n| n.to_string_lossy().into_owned());
    json!({
        "name": s.name,
        "command": s.command.name(),
        "seed": s.seed,
        "software": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "inputs": inputs,
        "scenario_text": s.source,
        "outputs": { "csv": file(csv), "report": report.and_then(file) },
        "results": results,
        "threads": rayon::current_num_threads(),
        "wall_time_s": wall,
    })
}

fn execute(s: &Scenario) -> Result<Artifact, RunError> {
    match &s.block {
        Block::Purcell(b) => purcell(b, &s.base_dir),
        Block::LifetimeCurve(b) => {
            let curve = lifetime_vs_detuning(&b.cavity, b.purcell, b.beta, b.tau0, &b.detunings)?;
            Ok(Artifact::curve(
                curve.to_csv(),
                vec![("purcell", b.purcell)],
            ))
        }
        Block::Transmission(b) => transmission_curve(b),
        Block::SfsScan(b) => {
            let cfg = ScanConfig {
                seed: s.seed,
                ..b.scan
            };
            let spec = scan_spectrum(&b.cavity, &b.transition, &b.ensemble, &cfg)?;
            let n = gaussian_density(b.ensemble.center_detuning, &b.ensemble);
            let eta = cooperativity(
                n,
                b.transition.g_peak,
                b.cavity.kappa(),
                b.transition.gamma_h,
            )?;
            Ok(Artifact::curve(
                spec.to_csv(),
                vec![("eta", eta), ("center_transmission", (1.0 + eta).powi(-2))],
            ))
        }
        Block::Echo(b) => echo(b),
        Block::ThreePulse(b) => {
            let r = three_pulse_echo(&b.transition, &b.waiting_times, b.rate, b.tau)?;
            let mut t = Table::new(&["t_w_s", "echo_intensity", "gamma_eff_hz"]);
            for i in 0..b.waiting_times.len() {
                t.push_row(&[b.waiting_times[i], r.echo.intensities[i], r.gamma_eff[i]]);
            }
            let fit = fit_linear(&b.waiting_times, &r.gamma_eff)?;
            Ok(Artifact::curve(
                t.to_csv(),
                vec![
                    ("spectral_diffusion_rate", fit.params[0]),
                    ("spectral_diffusion_rate_sigma", fit.sigmas[0]),
                    ("gamma_h", fit.params[1]),
                    ("gamma_h_sigma", fit.sigmas[1]),
                ],
            ))
        }
        Block::Rabi(b) => {
            let r = rabi_echo_scan(
                &b.transition,
                b.rabi_frequency,
                &b.widths,
                b.tau,
                b.n_samples,
            )?;
            let y = &r.intensities;
            let first_max =
                (1..y.len().saturating_sub(1)).find(|&i| y[i] >= y[i - 1] && y[i] >= y[i + 1]);
            let results = first_max
                .map(|i| vec![("first_maximum_width", b.widths[i])])
                .unwrap_or_default();
            Ok(Artifact::curve(
                r.to_spectrum("pulse_width_s").to_csv(),
                results,
            ))
        }
        Block::Saturation(b) => saturation(b),
        Block::SingleIon(b) => single_ion(b),
        Block::Fit(b) => fit(b, &s.base_dir),
    }
}

fn purcell(b: &PurcellBlock, base: &Path) -> Result<Artifact, RunError> {
    let mut results = vec![("peak_purcell".to_string(), peak_purcell_factor(&b.cavity))];
    if let Some((pair, beta)) = &b.lifetimes {
        let f = extract_purcell_from_lifetimes(pair, *beta)?;
        results.push(("purcell_from_lifetimes".into(), f));
        results.push(("emission_fraction".into(), emission_fraction(f, *beta)?));
    }
    if let Some((f, beta)) = b.given {
        results.push(("purcell".into(), f));
        results.push((
            "emission_fraction_at_purcell".into(),
            emission_fraction(f, beta)?,
        ));
    }
    if let Some((source, spatial)) = &b.profile {
        let profile = match source {
            ProfileSource::Surrogate => {
                ModeProfile::AnalyticSurrogate(SurrogateProfile::nanobeam())
            }
            ProfileSource::Grid(p) => ModeProfile::Grid(GridProfile::load(&base.join(p))?),
        };
        results.push((
            "ensemble_average_purcell".into(),
            ensemble_average_purcell(&b.cavity, &profile, *spatial)?,
        ));
    }
    Ok(Artifact::row(results))
}

fn transmission_curve(b: &TransmissionBlock) -> Result<Artifact, RunError> {
    let t = &b.transition;
    let kappa = b.cavity.kappa();
    match &b.scan {
        TransmissionScan::Detuning { n_ions, detunings } => {
            let eta = cooperativity(*n_ions, t.g_peak, kappa, t.gamma_h)?;
            let values = detunings
                .iter()
                .map(|&d| transmission(to_angular(d), kappa, *n_ions, t.g_peak, t.gamma_h))
                .collect();
            let spec = Spectrum::transmission(detunings.clone(), values);
            Ok(Artifact::curve(spec.to_csv(), vec![("eta", eta)]))
        }
        TransmissionScan::Tuning {
            ensemble,
            wavelengths,
        } => {
            let spec = tuning_dip_spectrum(&b.cavity, wavelengths, t, ensemble)?;
            let deepest = spec.mean.iter().cloned().fold(f64::INFINITY, f64::min);
            Ok(Artifact::curve(
                spec.to_csv(),
                vec![("deepest_dip_transmission", deepest)],
            ))
        }
    }
}

fn echo(b: &EchoBlock) -> Result<Artifact, RunError> {
    if let Some((slow, w)) = &b.slow {
        let r = biexponential_echo(&b.transition, slow, [*w, 1.0 - *w], &b.taus)?;
        let fit = fit_biexponential(&r.delays, &r.intensities)?;
        let results = vec![
            ("t2_fast", 4.0 * fit.params[1]),
            ("t2_fast_sigma", 4.0 * fit.sigmas[1]),
            ("t2_slow", 4.0 * fit.params[3]),
            ("t2_slow_sigma", 4.0 * fit.sigmas[3]),
        ];
        return Ok(Artifact::curve(r.to_spectrum("tau_s").to_csv(), results));
    }
    let seq = if b.shape == PulseShape::Instantaneous {
        PulseSequence::new(vec![
            Pulse::instantaneous(std::f64::consts::FRAC_PI_2),
            Pulse::instantaneous(std::f64::consts::PI),
        ])?
    } else {
        PulseSequence::two_pulse(b.shape, b.width)?
    };
    let r = two_pulse_echo(&b.transition, &seq, &b.taus, b.n_samples)?;
    let fit = fit_exponential(&r.delays, &r.intensities)?;
    let results = vec![
        ("t2", 4.0 * fit.params[1]),
        ("t2_sigma", 4.0 * fit.sigmas[1]),
    ];
    Ok(Artifact::curve(r.to_spectrum("tau_s").to_csv(), results))
}

fn saturation(b: &SaturationBlock) -> Result<Artifact, RunError> {
    let curve = saturation_curve(&b.cavity, &b.transition, &b.ensemble, &b.photon_numbers)?;
    let n = gaussian_density(b.ensemble.center_detuning, &b.ensemble);
    let eta = cooperativity(
        n,
        b.transition.g_peak,
        b.cavity.kappa(),
        b.transition.gamma_h,
    )?;
    let n_sat = saturation_photon_number(&b.transition);
    let mut results = vec![
        ("eta", eta),
        ("saturation_photon_number", n_sat),
        (
            "onset_transmission",
            saturated_transmission(eta, n_sat, n_sat),
        ),
    ];
    if let Ok(half) = half_saturation(&curve, eta) {
        results.push(("half_saturation_photon_number", half));
    }
    let csv = match &b.input_powers {
        Some(p) => {
            let mut t = Table::new(&["p_in_w", "n_cav", "mean_T"]);
            for (i, &pw) in p.iter().enumerate() {
                t.push_row(&[pw, curve.abscissa[i], curve.mean[i]]);
            }
            t.to_csv()
        }
        None => curve.to_csv(),
    };
    Ok(Artifact::curve(csv, results))
}

fn single_ion(b: &SingleIonBlock) -> Result<Artifact, RunError> {
    let cfg = MasterEqConfig {
        fock_cutoff: b.fock_cutoff,
        n_ions: b.n_ions,
        drive_amplitude: drive_for_photon_number(&b.cavity, b.photon_number),
        detunings: b.detunings.iter().map(|&d| to_angular(d)).collect(),
        tolerance: b.tolerance,
        axis: b.axis,
    };
    let spec = steady_state_transmission(&b.cavity, &b.transition, &cfg)?;
    let t = &b.transition;
    let eta = cooperativity(b.n_ions as f64, t.g_peak, b.cavity.kappa(), t.gamma_h)?;
    let deviation = cfg
        .detunings
        .iter()
        .zip(&spec.mean)
        .map(|(&d, &v)| {
            (v - linear_response_transmission(&b.cavity, t, b.n_ions as f64, b.axis, d)).abs()
        })
        .fold(0.0, f64::max);
    let mut results = vec![("eta", eta)];
    if let Ok(m) = dip_metrics(&spec) {
        results.extend([
            ("dip_center_hz", m.center),
            ("dip_minimum", m.minimum),
            ("dip_depth", m.depth),
            ("dip_fwhm_hz", m.fwhm),
            ("dip_fwhm_physical_hz", 0.5 * m.fwhm),
        ]);
    }
    results.push(("linear_response_max_deviation", deviation));
    Ok(Artifact::curve(spec.to_csv(), results))
}

fn column<'a>(table: &'a Table, name: Option<&str>, index: usize) -> Result<&'a [f64], RunError> {
    match name {
        Some(n) => table
            .column(n)
            .ok_or_else(|| RunError::Validation(format!("no column `{n}` in input"))),
        None => table.columns.get(index).map(Vec::as_slice).ok_or_else(|| {
            RunError::Validation(format!("input needs at least {} columns", index + 1))
        }),
    }
}

/// Fits one model to two columns of a CSV file.
fn fit_table(
    model: FitModel,
    table: &Table,
    x: Option<&str>,
    y: Option<&str>,
    dip: Option<DipModel>,
) -> Result<FitResult, RunError> {
    let xs = column(table, x, 0)?;
    let ys = column(table, y, 1)?;
    Ok(match model {
        FitModel::Exponential => fit_exponential(xs, ys)?,
        FitModel::Biexponential => fit_biexponential(xs, ys)?,
        FitModel::Lorentzian => fit_lorentzian(xs, ys)?,
        FitModel::Gaussian => fit_gaussian(xs, ys)?,
        FitModel::Linear => fit_linear(xs, ys)?,
        FitModel::DitDip => {
            let dip = dip.ok_or_else(|| {
                RunError::Validation("dit_dip needs the cavity and coupling".into())
            })?;
            fit_dit_dip(&Spectrum::transmission(xs.to_vec(), ys.to_vec()), dip)?
        }
    })
}

/// Reads the block's input CSV (relative to `base`) and fits it.
pub fn run_fit(b: &FitBlock, base: &Path) -> Result<FitResult, RunError> {
    let path = base.join(&b.input);
    let text = std::fs::read_to_string(&path).map_err(|e| io_error(&path, e))?;
    let table = Table::parse(&text)?;
    fit_table(
        b.model,
        &table,
        b.x_column.as_deref(),
        b.y_column.as_deref(),
        b.dip,
    )
}

fn fit(b: &FitBlock, base: &Path) -> Result<Artifact, RunError> {
    let r = run_fit(b, base)?;
    let mut results: Vec<(String, f64)> = Vec::new();
    for ((n, p), s) in r.names.iter().zip(&r.params).zip(&r.sigmas) {
        results.push((n.to_string(), *p));
        results.push((format!("{n}_sigma"), *s));
    }
    results.extend(r.derived.iter().map(|(n, v)| (n.to_string(), *v)));
    results.push(("residual_norm".into(), r.residual_norm));
    let csv = format!("{}\n{}\n", r.csv_header(), r.csv_row());
    Ok(Artifact {
        csv,
        results,
        separate_report: false,
    })
}
