// SPDX-License-Identifier: Apache-2.0

//! Scenario files: parsing, validation and execution.
//!
//! A scenario is a flat `key = value` file naming one `command` and its
//! parameters. Frequencies written as `g`, `gamma_h`, detunings etc. are
//! ordinary frequencies (Hz); coupling strengths are g/2π.

mod parse;
mod run;

use std::fmt;
use std::path::{Path, PathBuf};

pub use parse::{parse_list, parse_quantity, Dim, Issue};
pub use run::{run_fit, run_scenario, RunError, RunOutput};

use parse::Fields;

use crate::dynamics::{PulseShape, ScanAxis};
use crate::fitting::DipModel;
use crate::model::{
    CavityParams, EnsembleSpec, SpatialDistribution, TransitionParams, TransitionSpec,
};
use crate::purcell::LifetimePair;
use crate::transmission::ScanConfig;
use crate::units::to_angular;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Purcell,
    LifetimeCurve,
    Transmission,
    SfsScan,
    Echo,
    ThreePulse,
    Rabi,
    Saturation,
    SingleIon,
    Fit,
}

impl Command {
    pub const ALL: [Command; 10] = [
        Self::Purcell,
        Self::LifetimeCurve,
        Self::Transmission,
        Self::SfsScan,
        Self::Echo,
        Self::ThreePulse,
        Self::Rabi,
        Self::Saturation,
        Self::SingleIon,
        Self::Fit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Purcell => "purcell",
            Self::LifetimeCurve => "lifetime-curve",
            Self::Transmission => "transmission",
            Self::SfsScan => "sfs-scan",
            Self::Echo => "echo",
            Self::ThreePulse => "three-pulse",
            Self::Rabi => "rabi",
            Self::Saturation => "saturation",
            Self::SingleIon => "single-ion",
            Self::Fit => "fit",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSource {
    Surrogate,
    Grid(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PurcellBlock {
    pub cavity: CavityParams,
    /// Measured lifetimes and branching ratio for the extraction.
    pub lifetimes: Option<(LifetimePair, f64)>,
    /// A Purcell factor and branching ratio to evaluate the emission
    /// fraction at.
    pub given: Option<(f64, f64)>,
    pub profile: Option<(ProfileSource, SpatialDistribution)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LifetimeBlock {
    pub cavity: CavityParams,
    pub tau0: f64,
    pub beta: f64,
    /// On-resonance ensemble Purcell factor.
    pub purcell: f64,
    /// Cavity detunings Δλ, m.
    pub detunings: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransmissionScan {
    /// Fixed ion number, laser detuning Δ in Hz.
    Detuning { n_ions: f64, detunings: Vec<f64> },
    /// Dip depth versus cavity resonance wavelength, m.
    Tuning {
        ensemble: EnsembleSpec,
        wavelengths: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionBlock {
    pub cavity: CavityParams,
    pub transition: TransitionParams,
    pub scan: TransmissionScan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SfsBlock {
    pub cavity: CavityParams,
    pub transition: TransitionParams,
    pub ensemble: EnsembleSpec,
    /// `seed` is overwritten with the scenario seed at run time.
    pub scan: ScanConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EchoBlock {
    pub transition: TransitionParams,
    pub shape: PulseShape,
    /// π/2 pulse width, s.
    pub width: f64,
    pub taus: Vec<f64>,
    pub n_samples: usize,
    /// Second, slower class (T₂, weight of the fast class) for a
    /// biexponential decay.
    pub slow: Option<(TransitionParams, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreePulseBlock {
    pub transition: TransitionParams,
    /// Spectral diffusion rate, Hz/s.
    pub rate: f64,
    pub waiting_times: Vec<f64>,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RabiBlock {
    pub transition: TransitionParams,
    /// Rabi frequency Ω, rad/s.
    pub rabi_frequency: f64,
    pub widths: Vec<f64>,
    pub tau: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaturationBlock {
    pub cavity: CavityParams,
    pub transition: TransitionParams,
    pub ensemble: EnsembleSpec,
    pub photon_numbers: Vec<f64>,
    /// Input powers, when the curve was requested in power.
    pub input_powers: Option<Vec<f64>>,
    pub coupler_efficiency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleIonBlock {
    pub cavity: CavityParams,
    pub transition: TransitionParams,
    pub n_ions: usize,
    /// Δ grid, Hz (transmission-formula convention).
    pub detunings: Vec<f64>,
    pub fock_cutoff: usize,
    pub axis: ScanAxis,
    /// Empty-cavity photon number setting the drive.
    pub photon_number: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    Exponential,
    Biexponential,
    Lorentzian,
    Gaussian,
    Linear,
    DitDip,
}

impl FitModel {
    pub const NAMES: [&'static str; 6] = [
        "exponential",
        "biexponential",
        "lorentzian",
        "gaussian",
        "linear",
        "dit_dip",
    ];

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exponential" => Self::Exponential,
            "biexponential" => Self::Biexponential,
            "lorentzian" => Self::Lorentzian,
            "gaussian" => Self::Gaussian,
            "linear" => Self::Linear,
            "dit_dip" => Self::DitDip,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitBlock {
    pub model: FitModel,
    pub input: PathBuf,
    /// Column names; default the first two columns.
    pub x_column: Option<String>,
    pub y_column: Option<String>,
    pub dip: Option<DipModel>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Block {
    Purcell(PurcellBlock),
    LifetimeCurve(LifetimeBlock),
    Transmission(TransmissionBlock),
    SfsScan(SfsBlock),
    Echo(EchoBlock),
    ThreePulse(ThreePulseBlock),
    Rabi(RabiBlock),
    Saturation(SaturationBlock),
    SingleIon(SingleIonBlock),
    Fit(FitBlock),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub command: Command,
    pub block: Block,
    /// CSV file name, relative to the output directory.
    pub output: PathBuf,
    pub seed: u64,
    /// Directory that relative input paths refer to.
    pub base_dir: PathBuf,
    /// The scenario text as given, echoed into the run manifest.
    pub source: String,
}

/// All problems found in a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationErrors(pub Vec<Issue>);

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationErrors {}

/// Parses and validates scenario text. Relative paths resolve against the
/// working directory; see [`load_scenario`] for files.
pub fn parse_scenario(text: &str) -> Result<Scenario, ValidationErrors> {
    parse_with_base(text, Path::new("."), None)
}

/// Reads a scenario file; its name defaults to the file stem.
pub fn load_scenario(path: &Path) -> Result<Scenario, ValidationErrors> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        ValidationErrors(vec![Issue {
            line: None,
            key: path.display().to_string(),
            message: e.to_string(),
        }])
    })?;
    let base = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let stem = path.file_stem().and_then(|s| s.to_str());
    parse_with_base(&text, base, stem)
}

fn parse_with_base(
    text: &str,
    base: &Path,
    default_name: Option<&str>,
) -> Result<Scenario, ValidationErrors> {
    let mut f = Fields::parse(text);
    let name = f
        .text("name")
        .or(default_name.map(String::from))
        .unwrap_or_else(|| "scenario".into());
    let names: Vec<&'static str> = Command::ALL.iter().map(|c| c.name()).collect();
    if !f.has("command") {
        f.error(
            "command",
            format!("required key is missing (one of {})", names.join(", ")),
        );
    }
    let command = f
        .choice("command", &names)
        .and_then(|n| Command::ALL.into_iter().find(|c| c.name() == n));
    let output = f
        .text("output")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(format!("{name}.csv")));
    let seed = f.integer("seed").unwrap_or(0);
    let block = command.and_then(|c| parse_block(c, &mut f));
    let issues = f.finish();
    match (command, block) {
        (Some(command), Some(block)) if issues.is_empty() => Ok(Scenario {
            name,
            command,
            block,
            output,
            seed,
            base_dir: base.to_path_buf(),
            source: text.to_string(),
        }),
        _ => Err(ValidationErrors(issues)),
    }
}

/// Turns a module error into an issue on the named field.
fn module_issue(f: &mut Fields, e: crate::Error) {
    let key = match &e {
        crate::Error::InvalidParameter { name, .. } => config_key(name),
        _ => "scenario",
    };
    f.error(key, e.to_string());
}

/// Config key for a module parameter name, where they differ.
fn config_key(param: &str) -> &'static str {
    match param {
        "quality_factor" => "q",
        "lambda_cav" => "lambda_cav",
        "v_mode_normalized" => "v_mode",
        "refractive_index" => "n_index",
        "lambda_ion" => "lambda_ion",
        "g_peak" => "g",
        "gamma_h" => "gamma_h",
        "gamma_inhom_fwhm" => "gamma_inhom",
        "t1" => "t1",
        "t2" => "t2",
        "branching_ratio" | "beta" => "beta",
        "dipole_orientation_factor" => "orientation",
        "n_peak" => "n_peak",
        "span" => "span",
        "bin_width" => "bin_width",
        "step" => "step",
        "n_traces" => "n_traces",
        _ => "scenario",
    }
}

fn cavity(f: &mut Fields) -> Option<CavityParams> {
    let q = f.positive("q", Dim::Pure);
    let v = f.positive("v_mode", Dim::Pure);
    let lambda = f.opt_positive("lambda_cav", Dim::Length).unwrap_or(883e-9);
    let n = f.quantity("n_index", Dim::Pure).unwrap_or(1.8);
    let n = f.check("n_index", n, n >= 1.0, "must be >= 1")?;
    match CavityParams::new(q?, lambda, v?, n) {
        Ok(c) => Some(c),
        Err(e) => {
            module_issue(f, e);
            None
        }
    }
}

/// What a command needs from the transition keys.
#[derive(Clone, Copy)]
struct Needs {
    coupling: bool,
    inhomogeneous: bool,
}

fn transition(f: &mut Fields, needs: Needs, lambda_default: f64) -> Option<TransitionParams> {
    let g = if needs.coupling {
        f.positive("g", Dim::Frequency)
    } else {
        Some(0.0)
    };
    let gamma_h = f.opt_positive("gamma_h", Dim::Frequency);
    let t2 = f.opt_positive("t2", Dim::Time);
    let t1 = f.opt_positive("t1", Dim::Time);
    if !f.has("gamma_h") && !f.has("t2") {
        f.error("gamma_h", "required key is missing (give gamma_h or t2)");
    }
    let inhom = if needs.inhomogeneous {
        f.positive("gamma_inhom", Dim::Frequency)
    } else {
        Some(0.0)
    };
    let lambda = f
        .opt_positive("lambda_ion", Dim::Length)
        .unwrap_or(lambda_default);
    let beta = f.quantity("beta", Dim::Pure).unwrap_or(1.0);
    let orientation = f.quantity("orientation", Dim::Pure).unwrap_or(1.0);
    if gamma_h.is_none() && t2.is_none() {
        return None;
    }
    let spec = TransitionSpec {
        lambda_ion: lambda,
        g_peak: to_angular(g?),
        gamma_h,
        t2,
        gamma_inhom_fwhm: inhom?,
        t1,
        branching_ratio: beta,
        dipole_orientation_factor: orientation,
    };
    match spec.build() {
        Ok(t) => Some(t),
        Err(e) => {
            module_issue(f, e);
            None
        }
    }
}

fn ensemble(f: &mut Fields) -> Option<EnsembleSpec> {
    let n_peak = f.req_quantity("n_peak", Dim::Pure);
    let n_peak = n_peak.and_then(|n| f.check("n_peak", n, n >= 0.0, "must be >= 0"));
    let inhom = f.positive("gamma_inhom", Dim::Frequency);
    let center = f.quantity("center_detuning", Dim::Frequency).unwrap_or(0.0);
    let mut e = EnsembleSpec::gaussian(n_peak?, inhom?).ok()?;
    e.center_detuning = center;
    Some(e)
}

fn parse_block(command: Command, f: &mut Fields) -> Option<Block> {
    match command {
        Command::Purcell => purcell_block(f).map(Block::Purcell),
        Command::LifetimeCurve => lifetime_block(f).map(Block::LifetimeCurve),
        Command::Transmission => transmission_block(f).map(Block::Transmission),
        Command::SfsScan => sfs_block(f).map(Block::SfsScan),
        Command::Echo => echo_block(f).map(Block::Echo),
        Command::ThreePulse => three_pulse_block(f).map(Block::ThreePulse),
        Command::Rabi => rabi_block(f).map(Block::Rabi),
        Command::Saturation => saturation_block(f).map(Block::Saturation),
        Command::SingleIon => single_ion_block(f).map(Block::SingleIon),
        Command::Fit => fit_block(f).map(Block::Fit),
    }
}

fn beta(f: &mut Fields) -> Option<f64> {
    let b = f.req_quantity("beta", Dim::Pure)?;
    f.check("beta", b, b > 0.0 && b <= 1.0, "must lie in (0, 1]")
}

fn purcell_block(f: &mut Fields) -> Option<PurcellBlock> {
    let cavity = cavity(f);
    let lifetimes = if f.has("tau0") || f.has("tau_coupled") {
        let tau0 = f.positive("tau0", Dim::Time);
        let tau_c = f.positive("tau_coupled", Dim::Time);
        let beta = beta(f);
        match (tau0, tau_c, beta) {
            (Some(a), Some(b), Some(beta)) => match LifetimePair::new(a, b, 0.0) {
                Ok(p) => Some((p, beta)),
                Err(e) => {
                    module_issue(f, e);
                    return None;
                }
            },
            _ => return None,
        }
    } else {
        None
    };
    let given = if f.has("purcell") {
        let p = f.req_quantity("purcell", Dim::Pure);
        let p = p.and_then(|p| f.check("purcell", p, p >= 0.0, "must be >= 0"));
        let b = if lifetimes.is_some() {
            lifetimes.map(|l| l.1)
        } else {
            beta(f)
        };
        Some((p?, b?))
    } else {
        None
    };
    let source = match f.text("profile").as_deref() {
        None | Some("none") => None,
        Some("surrogate") => Some(ProfileSource::Surrogate),
        Some(path) => Some(ProfileSource::Grid(PathBuf::from(path))),
    };
    let spatial = match f.choice("spatial", &["uniform", "antinode"]) {
        Some("antinode") => SpatialDistribution::PointAtAntinode,
        _ => SpatialDistribution::UniformInModeVolume,
    };
    Some(PurcellBlock {
        cavity: cavity?,
        lifetimes,
        given,
        profile: source.map(|s| (s, spatial)),
    })
}

fn lifetime_block(f: &mut Fields) -> Option<LifetimeBlock> {
    let cavity = cavity(f);
    let tau0 = f.positive("tau0", Dim::Time);
    let beta = beta(f);
    let purcell = match (f.has("purcell"), f.has("tau_coupled")) {
        (true, false) => {
            let p = f.req_quantity("purcell", Dim::Pure)?;
            f.check("purcell", p, p >= 0.0, "must be >= 0")
        }
        (false, true) => {
            let tc = f.positive("tau_coupled", Dim::Time)?;
            let (t0, b) = (tau0?, beta?);
            f.check("tau_coupled", tc, tc < t0, "must be shorter than tau0")
                .map(|tc| (t0 / tc - 1.0) / b)
        }
        _ => {
            f.error("purcell", "give exactly one of purcell or tau_coupled");
            None
        }
    };
    let detunings = f.req_list("detunings", Dim::Length);
    Some(LifetimeBlock {
        cavity: cavity?,
        tau0: tau0?,
        beta: beta?,
        purcell: purcell?,
        detunings: detunings?,
    })
}

fn transmission_block(f: &mut Fields) -> Option<TransmissionBlock> {
    let cavity = cavity(f);
    let lambda = cavity.map_or(883e-9, |c| c.lambda_cav());
    let tuning = f.has("cavity_wavelengths");
    let transition = transition(
        f,
        Needs {
            coupling: true,
            inhomogeneous: tuning,
        },
        lambda,
    );
    let scan = if tuning {
        let ensemble = ensemble(f);
        let wavelengths = f.req_list("cavity_wavelengths", Dim::Length);
        TransmissionScan::Tuning {
            ensemble: ensemble?,
            wavelengths: wavelengths?,
        }
    } else {
        let n = f.req_quantity("n_ions", Dim::Pure);
        let n = n.and_then(|n| f.check("n_ions", n, n >= 0.0, "must be >= 0"));
        let detunings = f.req_list("detunings", Dim::Frequency);
        TransmissionScan::Detuning {
            n_ions: n?,
            detunings: detunings?,
        }
    };
    Some(TransmissionBlock {
        cavity: cavity?,
        transition: transition?,
        scan,
    })
}

fn sfs_block(f: &mut Fields) -> Option<SfsBlock> {
    let cavity = cavity(f);
    let lambda = cavity.map_or(883e-9, |c| c.lambda_cav());
    let transition = transition(
        f,
        Needs {
            coupling: true,
            inhomogeneous: true,
        },
        lambda,
    );
    let ensemble = ensemble(f);
    let span = f.positive("span", Dim::Frequency);
    let bin_width = f.opt_positive("bin_width", Dim::Frequency);
    let step = f.opt_positive("step", Dim::Frequency);
    let sfs = f.flag("sfs").unwrap_or(true);
    let n_traces = f.count("n_traces").unwrap_or(1);
    let scan = ScanConfig {
        span: span?,
        bin_width,
        step,
        seed: 0,
        sfs_enabled: sfs,
        n_traces,
    };
    let transition = transition?;
    if let Err(e) = scan.validate(transition.gamma_h) {
        module_issue(f, e);
        return None;
    }
    Some(SfsBlock {
        cavity: cavity?,
        transition,
        ensemble: ensemble?,
        scan,
    })
}

fn samples(f: &mut Fields, default: usize) -> Option<usize> {
    let n = f.count("n_samples").unwrap_or(default);
    f.check("n_samples", n as f64, n >= 1, "must be >= 1")
        .map(|_| n)
}

fn echo_block(f: &mut Fields) -> Option<EchoBlock> {
    let transition = transition(
        f,
        Needs {
            coupling: false,
            inhomogeneous: true,
        },
        883e-9,
    );
    let shape = match f.choice("shape", &["square", "gaussian", "instantaneous"]) {
        Some("gaussian") => PulseShape::Gaussian,
        Some("instantaneous") => PulseShape::Instantaneous,
        _ => PulseShape::Square,
    };
    let width = if shape == PulseShape::Instantaneous {
        f.opt_positive("width", Dim::Time).or(Some(1e-9))
    } else {
        f.positive("width", Dim::Time)
    };
    let taus = f.req_list("tau", Dim::Time);
    let taus = taus.and_then(|t| {
        let bad = t.iter().copied().find(|v| *v < 0.0);
        match bad {
            Some(v) => f.check("tau", v, false, "delays must be >= 0").map(|_| t),
            None => Some(t),
        }
    });
    let n_samples = samples(f, 64);
    let slow = if f.has("t2_slow") {
        let t2s = f.positive("t2_slow", Dim::Time);
        let w = f.req_quantity("weight_fast", Dim::Pure);
        let w = w.and_then(|w| {
            f.check(
                "weight_fast",
                w,
                (0.0..=1.0).contains(&w),
                "must lie in [0, 1]",
            )
        });
        let base = transition?;
        let slow = TransitionSpec {
            lambda_ion: base.lambda_ion,
            g_peak: base.g_peak,
            gamma_h: None,
            t2: Some(t2s?),
            gamma_inhom_fwhm: base.gamma_inhom_fwhm,
            t1: None,
            branching_ratio: base.branching_ratio,
            dipole_orientation_factor: base.dipole_orientation_factor,
        }
        .build();
        match slow {
            Ok(s) => Some((s, w?)),
            Err(e) => {
                module_issue(f, e);
                return None;
            }
        }
    } else {
        None
    };
    Some(EchoBlock {
        transition: transition?,
        shape,
        width: width?,
        taus: taus?,
        n_samples: n_samples?,
        slow,
    })
}

fn three_pulse_block(f: &mut Fields) -> Option<ThreePulseBlock> {
    let transition = transition(
        f,
        Needs {
            coupling: false,
            inhomogeneous: false,
        },
        883e-9,
    );
    let rate = f.req_quantity("rate", Dim::Rate);
    let rate = rate.and_then(|r| f.check("rate", r, r >= 0.0, "must be >= 0"));
    let tw = f.req_list("waiting_times", Dim::Time);
    let tau = f.positive("tau", Dim::Time);
    Some(ThreePulseBlock {
        transition: transition?,
        rate: rate?,
        waiting_times: tw?,
        tau: tau?,
    })
}

fn rabi_block(f: &mut Fields) -> Option<RabiBlock> {
    let transition = transition(
        f,
        Needs {
            coupling: false,
            inhomogeneous: true,
        },
        883e-9,
    );
    let omega = match (f.has("pi_time"), f.has("rabi_frequency")) {
        (true, false) => f
            .positive("pi_time", Dim::Time)
            .map(|t| std::f64::consts::PI / t),
        (false, true) => f.positive("rabi_frequency", Dim::Frequency).map(to_angular),
        _ => {
            f.error("pi_time", "give exactly one of pi_time or rabi_frequency");
            None
        }
    };
    let widths = f.req_list("widths", Dim::Time);
    let tau = f.positive("tau", Dim::Time);
    let n_samples = samples(f, 64);
    Some(RabiBlock {
        transition: transition?,
        rabi_frequency: omega?,
        widths: widths?,
        tau: tau?,
        n_samples: n_samples?,
    })
}

fn saturation_block(f: &mut Fields) -> Option<SaturationBlock> {
    let cavity = cavity(f);
    let lambda = cavity.map_or(883e-9, |c| c.lambda_cav());
    let transition = transition(
        f,
        Needs {
            coupling: true,
            inhomogeneous: true,
        },
        lambda,
    );
    let ensemble = ensemble(f);
    let eff = f.quantity("coupler_efficiency", Dim::Pure).unwrap_or(1.0);
    let eff = f.check(
        "coupler_efficiency",
        eff,
        eff > 0.0 && eff <= 1.0,
        "must lie in (0, 1]",
    );
    let (photon_numbers, powers) = match (f.has("photon_numbers"), f.has("input_powers")) {
        (true, false) => (f.req_list("photon_numbers", Dim::Pure), None),
        (false, true) => {
            let p = f.req_list("input_powers", Dim::Power);
            let (c, e) = (cavity?, eff?);
            let omega = crate::units::angular_frequency_of(c.lambda_cav());
            let n = p.as_ref().map(|p| {
                p.iter()
                    .map(|&p| crate::dynamics::intracavity_photon_number(p, e, c.kappa(), omega))
                    .collect()
            });
            match n {
                Some(Ok(n)) => (Some(n), p),
                Some(Err(e)) => {
                    f.error("input_powers", e.to_string());
                    (None, None)
                }
                None => (None, None),
            }
        }
        _ => {
            f.error(
                "photon_numbers",
                "give exactly one of photon_numbers or input_powers",
            );
            (None, None)
        }
    };
    let photon_numbers =
        photon_numbers.and_then(|n| match n.iter().copied().find(|v| !(*v > 0.0)) {
            Some(v) => f
                .check("photon_numbers", v, false, "photon numbers must be > 0")
                .map(|_| n),
            None => Some(n),
        });
    Some(SaturationBlock {
        cavity: cavity?,
        transition: transition?,
        ensemble: ensemble?,
        photon_numbers: photon_numbers?,
        input_powers: powers,
        coupler_efficiency: eff?,
    })
}

fn single_ion_block(f: &mut Fields) -> Option<SingleIonBlock> {
    let cavity = cavity(f);
    let lambda = cavity.map_or(883e-9, |c| c.lambda_cav());
    let transition = transition(
        f,
        Needs {
            coupling: true,
            inhomogeneous: false,
        },
        lambda,
    );
    let n_ions = f.count("n_ions").unwrap_or(1);
    let n_ions = f
        .check("n_ions", n_ions as f64, n_ions >= 1, "must be >= 1")
        .map(|_| n_ions);
    let detunings = f.req_list("detunings", Dim::Frequency);
    let cutoff = f.count("fock_cutoff").unwrap_or(3);
    let cutoff = f
        .check("fock_cutoff", cutoff as f64, cutoff >= 2, "must be >= 2")
        .map(|_| cutoff);
    let axis = match f.choice("axis", &["laser", "cavity"]) {
        Some("cavity") => ScanAxis::Cavity,
        _ => ScanAxis::Laser,
    };
    let photon_number = f.opt_positive("photon_number", Dim::Pure).unwrap_or(1e-12);
    let tol = f.quantity("tolerance", Dim::Pure).unwrap_or(1e-6);
    let tol = f.check(
        "tolerance",
        tol,
        tol > 0.0 && tol <= 1e-3,
        "must lie in (0, 1e-3]",
    );
    Some(SingleIonBlock {
        cavity: cavity?,
        transition: transition?,
        n_ions: n_ions?,
        detunings: detunings?,
        fock_cutoff: cutoff?,
        axis,
        photon_number,
        tolerance: tol?,
    })
}

fn fit_block(f: &mut Fields) -> Option<FitBlock> {
    if !f.has("model") {
        f.error(
            "model",
            format!(
                "required key is missing (one of {})",
                FitModel::NAMES.join(", ")
            ),
        );
    }
    let model = f
        .choice("model", &FitModel::NAMES)
        .and_then(FitModel::from_name);
    if !f.has("input") {
        f.error("input", "required key is missing");
    }
    let input = f.text("input").map(PathBuf::from);
    let x_column = f.text("x_column");
    let y_column = f.text("y_column");
    let dip = if model == Some(FitModel::DitDip) {
        let c = cavity(f);
        let lambda = c.map_or(883e-9, |c| c.lambda_cav());
        let t = transition(
            f,
            Needs {
                coupling: true,
                inhomogeneous: false,
            },
            lambda,
        );
        match DipModel::new(&c?, &t?) {
            Ok(d) => Some(d),
            Err(e) => {
                module_issue(f, e);
                return None;
            }
        }
    } else {
        None
    };
    Some(FitBlock {
        model: model?,
        input: input?,
        x_column,
        y_column,
        dip,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_purcell() {
        let s = parse_scenario("command = purcell\nq = 4400\nv_mode = 1.65\n").unwrap();
        assert_eq!(s.command, Command::Purcell);
        assert_eq!(s.seed, 0);
        assert_eq!(s.output, PathBuf::from("scenario.csv"));
        let Block::Purcell(b) = s.block else { panic!() };
        assert_eq!(b.cavity.quality_factor(), 4400.0);
        assert!(b.lifetimes.is_none() && b.profile.is_none());
    }

    #[test]
    fn homogeneous_linewidth_suffix() {
        let text =
            "command = transmission\nq = 4400\nv_mode = 1.65\ng = 6 MHz\ngamma_h = 100 kHz\n\
                    n_ions = 53\ndetunings = linspace(-1 GHz, 1 GHz, 5)\n";
        let s = parse_scenario(text).unwrap();
        let Block::Transmission(b) = s.block else {
            panic!()
        };
        assert_eq!(b.transition.gamma_h, 1.0e5);
        assert_eq!(b.transition.g_peak, to_angular(6e6));
    }

    #[test]
    fn negative_q_names_field_and_constraint() {
        let e = parse_scenario("command = purcell\nq = -4400\nv_mode = 1.65\n").unwrap_err();
        assert_eq!(e.0.len(), 1);
        assert_eq!(e.0[0].key, "q");
        assert_eq!(e.0[0].line, Some(2));
        assert!(e.0[0].message.contains("> 0"));
    }

    #[test]
    fn reports_all_problems_at_once() {
        let text = "command = sfs-scan\nq = 4400\nv_mode = abc\ng = 6 kHz/us\nwhatever = 1\nspan = 10 GHz\n";
        let e = parse_scenario(text).unwrap_err();
        let keys: Vec<&str> = e.0.iter().map(|i| i.key.as_str()).collect();
        for k in [
            "v_mode",
            "g",
            "whatever",
            "gamma_h",
            "gamma_inhom",
            "n_peak",
        ] {
            assert!(keys.contains(&k), "{k} missing from {keys:?}");
        }
    }

    #[test]
    fn missing_and_unknown_command() {
        let e = parse_scenario("q = 1\n").unwrap_err();
        assert!(e
            .0
            .iter()
            .any(|i| i.key == "command" && i.message.contains("missing")));
        assert!(e
            .0
            .iter()
            .any(|i| i.key == "q" && i.message.contains("unknown")));
        let e = parse_scenario("command = plot\n").unwrap_err();
        assert!(e.0[0].message.contains("not one of"));
    }

    #[test]
    fn module_errors_map_to_config_keys() {
        // T2 longer than 2·T1 is rejected by the transition builder
        let text = "command = three-pulse\ngamma_h = 1 kHz\nt1 = 10 us\nrate = 0\nwaiting_times = 0\ntau = 1 us\n";
        let e = parse_scenario(text).unwrap_err();
        assert_eq!(e.0[0].key, "t2");
    }

    #[test]
    fn lifetime_curve_from_lifetimes() {
        let text = "command = lifetime-curve\nq = 4400\nv_mode = 1.65\ntau0 = 254 us\ntau_coupled = 87 us\n\
                    beta = 0.045\ndetunings = 0, 0.1 nm\n";
        let Block::LifetimeCurve(b) = parse_scenario(text).unwrap().block else {
            panic!()
        };
        assert!((b.purcell - 42.66).abs() < 0.01);
    }
}
