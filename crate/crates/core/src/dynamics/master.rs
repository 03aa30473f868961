// SPDX-License-Identifier: Apache-2.0

//! Steady state of a driven cavity coupled to two-level ions.
//!
//! Lindblad master equation in the frame of the probe laser:
//!
//! ```text
//! H = δ_c a†a + δ_a Σ σ_ee + g Σ (a†σ₋ + a σ₊) + ε (a + a†)
//! L = { √κ a,  √(1/T₁) σ₋,  √(2γ_φ) σ_ee }
//! ```
//!
//! Up to three ions are represented exactly; larger identical ensembles use
//! the symmetric (Dicke) ladder truncated at the Fock cutoff, with
//! collective jump operators that reproduce independent decay and dephasing
//! in the low-excitation limit.
//!
//! Transmission is ⟨a†a⟩ divided by the empty resonant-cavity value
//! (2ε/κ)². The abscissa uses the same Δ as [`crate::transmission`]: the
//! physical detuning entering H is Δ/2.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, require_positive, Error, Result};
use crate::model::{CavityParams, TransitionParams};
use crate::numeric::crossing;
use crate::spectrum::Spectrum;
use crate::units::{frequency_of, to_angular, to_ordinary};

type CMat = DMatrix<Complex64>;

/// Largest ensemble simulated as a full tensor product.
pub const MAX_EXPLICIT_IONS: usize = 3;
/// Population allowed in the highest Fock level.
pub const TOP_FOCK_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanAxis {
    /// Laser scanned; cavity and ions fixed.
    Laser,
    /// Cavity scanned with the laser locked to the ion line.
    Cavity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MasterEqConfig {
    pub fock_cutoff: usize,
    pub n_ions: usize,
    /// Drive ε, rad/s.
    pub drive_amplitude: f64,
    /// Δ grid, rad/s.
    pub detunings: Vec<f64>,
    pub tolerance: f64,
    pub axis: ScanAxis,
}

impl MasterEqConfig {
    /// Weak-drive configuration: ε such that the empty resonant cavity
    /// holds `1e-12` photons.
    pub fn weak(cavity: &CavityParams, n_ions: usize, detunings: Vec<f64>) -> Self {
        Self {
            fock_cutoff: 3,
            n_ions,
            drive_amplitude: drive_for_photon_number(cavity, 1e-12),
            detunings,
            tolerance: 1e-6,
            axis: ScanAxis::Laser,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fock_cutoff < 2 {
            return Err(invalid("fock_cutoff", "must be >= 2"));
        }
        if self.n_ions < 1 {
            return Err(invalid("n_ions", "must be >= 1"));
        }
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-3) {
            return Err(invalid("tolerance", "must lie in (0, 1e-3]"));
        }
        require_positive("drive_amplitude", self.drive_amplitude)?;
        if self.detunings.is_empty() || self.detunings.iter().any(|d| !d.is_finite()) {
            return Err(invalid(
                "detunings",
                "must be a non-empty list of finite values",
            ));
        }
        Ok(())
    }
}

/// Drive amplitude giving `n` photons in the empty resonant cavity.
pub fn drive_for_photon_number(cavity: &CavityParams, n: f64) -> f64 {
    0.5 * cavity.kappa() * n.sqrt()
}

/// Observables of one steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub photon_number: f64,
    /// Mean number of excited ions.
    pub excitation: f64,
    pub top_fock_population: f64,
    pub trace_error: f64,
}

struct Model {
    dim: usize,
    h: CMat,
    jumps: Vec<CMat>,
    number: CMat,
    excitation: CMat,
    top_projector: CMat,
}

fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

fn annihilation(n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

/// Ion-space lowering operators and the excitation-number operator.
/// Returns (coupling operator J₋, jump operators, n_exc).
fn ion_operators(
    n_ions: usize,
    fock_cutoff: usize,
    gamma1: f64,
    gamma_phi: f64,
) -> (CMat, Vec<CMat>, CMat) {
    let z = Complex64::new(0.0, 0.0);
    if n_ions <= MAX_EXPLICIT_IONS {
        let dim = 1 << n_ions;
        let mut total = CMat::zeros(dim, dim);
        let mut exc = CMat::zeros(dim, dim);
        let mut jumps = Vec::new();
        for k in 0..n_ions {
            let bit = 1 << k;
            let lower = CMat::from_fn(dim, dim, |i, j| {
                if j & bit != 0 && i == j ^ bit {
                    Complex64::new(1.0, 0.0)
                } else {
                    z
                }
            });
            let ee = CMat::from_fn(dim, dim, |i, j| {
                if i == j && i & bit != 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    z
                }
            });
            total += &lower;
            exc += &ee;
            jumps.push(lower * Complex64::new(gamma1.sqrt(), 0.0));
            jumps.push(ee * Complex64::new((2.0 * gamma_phi).sqrt(), 0.0));
        }
        (total, jumps, exc)
    } else {
        // symmetric states |k⟩ with k excitations, k ≤ fock_cutoff − 1
        let n = n_ions as f64;
        let dim = n_ions.min(fock_cutoff - 1) + 1;
        let lower = CMat::from_fn(dim, dim, |i, j| {
            if j == i + 1 {
                let k = j as f64;
                Complex64::new((k * (n - k + 1.0)).sqrt(), 0.0)
            } else {
                z
            }
        });
        let exc = CMat::from_fn(dim, dim, |i, j| {
            if i == j {
                Complex64::new(i as f64, 0.0)
            } else {
                z
            }
        });
        let jumps = vec![
            &lower * Complex64::new((gamma1 / n).sqrt(), 0.0),
            &exc * Complex64::new((2.0 * gamma_phi).sqrt(), 0.0),
        ];
        (lower, jumps, exc)
    }
}

fn build_model(
    cavity: &CavityParams,
    transition: &TransitionParams,
    n_ions: usize,
    fock_cutoff: usize,
    drive: f64,
    delta_c: f64,
    delta_a: f64,
) -> Model {
    let c = |x: f64| Complex64::new(x, 0.0);
    let gamma1 = 1.0 / transition.t1;
    let gamma_phi = transition.pure_dephasing_rate();
    let (j_lower, ion_jumps, exc) = ion_operators(n_ions, fock_cutoff, gamma1, gamma_phi);
    let d_ion = j_lower.nrows();
    let i_ion = identity(d_ion);
    let i_cav = identity(fock_cutoff);
    let a = annihilation(fock_cutoff).kronecker(&i_ion);
    let ad = dagger(&a);
    let jm = i_cav.kronecker(&j_lower);
    let exc_full = i_cav.kronecker(&exc);
    let number = &ad * &a;
    let g = transition.g_peak;
    let h = &number * c(delta_c)
        + &exc_full * c(delta_a)
        + (&ad * &jm + &a * dagger(&jm)) * c(g)
        + (&a + &ad) * c(drive);
    let mut jumps = vec![&a * c(cavity.kappa().sqrt())];
    jumps.extend(ion_jumps.iter().map(|j| i_cav.kronecker(j)));
    let mut top = CMat::zeros(fock_cutoff, fock_cutoff);
    top[(fock_cutoff - 1, fock_cutoff - 1)] = c(1.0);
    Model {
        dim: fock_cutoff * d_ion,
        h,
        jumps,
        number,
        excitation: exc_full,
        top_projector: top.kronecker(&i_ion),
    }
}

/// Liouvillian acting on row-major vec(ρ): vec(AρB) = (A ⊗ Bᵀ) vec(ρ).
fn liouvillian(m: &Model) -> CMat {
    let id = identity(m.dim);
    let minus_i = Complex64::new(0.0, -1.0);
    let mut l = (m.h.kronecker(&id) - id.kronecker(&m.h.transpose())) * minus_i;
    for c in &m.jumps {
        let cdc = dagger(c) * c;
        l += c.kronecker(&c.conjugate());
        l -= (cdc.kronecker(&id) + id.kronecker(&cdc.transpose())) * Complex64::new(0.5, 0.0);
    }
    l
}

fn expectation(op: &CMat, rho: &CMat) -> f64 {
    (op * rho).trace().re
}

fn solve(m: &Model, tolerance: f64) -> Result<SteadyState> {
    let d = m.dim;
    let l = liouvillian(m);
    let mut a = l.clone();
    // replace the first equation by Tr ρ = 1
    for col in 0..d * d {
        a[(0, col)] = Complex64::new(0.0, 0.0);
    }
    for i in 0..d {
        a[(0, i * d + i)] = Complex64::new(1.0, 0.0);
    }
    let mut rhs = nalgebra::DVector::<Complex64>::zeros(d * d);
    rhs[0] = Complex64::new(1.0, 0.0);
    let x = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("singular Liouvillian".into()))?;
    let residual = (&l * &x).camax() / (l.camax() * x.camax());
    if !(residual < tolerance) {
        return Err(Error::Numerical(format!(
            "steady state residual {residual:e} exceeds tolerance {tolerance:e}"
        )));
    }
    let rho = CMat::from_row_slice(d, d, x.as_slice());
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let trace = rho.trace().re;
    if (0..d).any(|i| rho[(i, i)].re < -1e-12) {
        return Err(Error::Numerical(
            "negative population in steady state".into(),
        ));
    }
    let top = expectation(&m.top_projector, &rho);
    if top > TOP_FOCK_LIMIT {
        return Err(Error::Numerical(format!(
            "Fock cutoff too small: top level holds {top:e}"
        )));
    }
    Ok(SteadyState {
        photon_number: expectation(&m.number, &rho),
        excitation: expectation(&m.excitation, &rho),
        top_fock_population: top,
        trace_error: (trace - 1.0).abs(),
    })
}

/// Cavity (δ_c) and ion (δ_a) detunings from the laser for scan value Δ.
fn detunings_for(
    cavity: &CavityParams,
    transition: &TransitionParams,
    axis: ScanAxis,
    delta: f64,
) -> (f64, f64) {
    let physical = 0.5 * delta;
    match axis {
        ScanAxis::Laser => {
            let offset =
                to_angular(frequency_of(cavity.lambda_cav()) - frequency_of(transition.lambda_ion));
            (offset - physical, -physical)
        }
        ScanAxis::Cavity => (physical, 0.0),
    }
}

/// Steady state at one scan point Δ (rad/s).
pub fn steady_state(
    cavity: &CavityParams,
    transition: &TransitionParams,
    config: &MasterEqConfig,
    delta: f64,
) -> Result<SteadyState> {
    let (dc, da) = detunings_for(cavity, transition, config.axis, delta);
    let model = build_model(
        cavity,
        transition,
        config.n_ions,
        config.fock_cutoff,
        config.drive_amplitude,
        dc,
        da,
    );
    solve(&model, config.tolerance)
}

/// Normalized transmission ⟨a†a⟩/(2ε/κ)² over the configured Δ grid.
/// Abscissa in Hz.
pub fn steady_state_transmission(
    cavity: &CavityParams,
    transition: &TransitionParams,
    config: &MasterEqConfig,
) -> Result<Spectrum> {
    transition.validate()?;
    config.validate()?;
    let empty = (2.0 * config.drive_amplitude / cavity.kappa()).powi(2);
    let values = config
        .detunings
        .par_iter()
        .map(|&d| steady_state(cavity, transition, config, d).map(|s| s.photon_number / empty))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Spectrum::transmission(
        config.detunings.iter().map(|&d| to_ordinary(d)).collect(),
        values,
    ))
}

/// Weak-drive (linear-response) transmission for N identical ions:
/// |(κ/2) / (κ/2 + iδ_c + N g²/(γ⊥ + iδ_a))|² with γ⊥ = 1/T₂.
pub fn linear_response_transmission(
    cavity: &CavityParams,
    transition: &TransitionParams,
    n_ions: f64,
    axis: ScanAxis,
    delta: f64,
) -> f64 {
    let (dc, da) = detunings_for(cavity, transition, axis, delta);
    let half = Complex64::new(0.5 * cavity.kappa(), 0.0);
    let g2 = transition.g_peak * transition.g_peak;
    let ion = Complex64::new(n_ions * g2, 0.0) / Complex64::new(1.0 / transition.t2, da);
    (half / (half + Complex64::new(0.0, dc) + ion)).norm_sqr()
}

/// Depth and width of a transmission dip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipMetrics {
    pub center: f64,
    pub minimum: f64,
    /// 1 − T_min.
    pub depth: f64,
    /// Full width at half depth, in abscissa units.
    pub fwhm: f64,
}

/// Locates the deepest point and the half-depth crossings on each side,
/// taking the larger of the two edge values as baseline.
pub fn dip_metrics(spectrum: &Spectrum) -> Result<DipMetrics> {
    let y = &spectrum.mean;
    let x = &spectrum.abscissa;
    if y.len() < 3 {
        return Err(Error::Degenerate("need at least 3 points".into()));
    }
    let imin = (0..y.len()).fold(0, |b, i| if y[i] < y[b] { i } else { b });
    let baseline = y[0].max(y[y.len() - 1]);
    let level = 0.5 * (baseline + y[imin]);
    let left = crossing(x, y, level, imin, false);
    let right = crossing(x, y, level, imin, true);
    match (left, right) {
        (Some(l), Some(r)) => Ok(DipMetrics {
            center: x[imin],
            minimum: y[imin],
            depth: 1.0 - y[imin],
            fwhm: r - l,
        }),
        _ => Err(Error::Degenerate("dip not resolved inside the scan".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TransitionSpec;
    use crate::numeric::linspace;
    use crate::transmission::{cooperativity, transmission};

    fn cavity() -> CavityParams {
        CavityParams::new(4400.0, 883e-9, 1.65, 1.8).unwrap()
    }

    fn ion(g: f64, gamma_h: f64) -> TransitionParams {
        TransitionSpec {
            lambda_ion: 883e-9,
            g_peak: g,
            gamma_h: Some(gamma_h),
            gamma_inhom_fwhm: 0.0,
            branching_ratio: 0.045,
            dipole_orientation_factor: 1.0,
            ..Default::default()
        }
        .build()
        .unwrap()
    }

    #[test]
    fn single_ion_matches_linear_response() {
        let c = cavity();
        let t = ion(to_angular(10e6), 3.1e3);
        let grid: Vec<f64> = linspace(-60e3, 60e3, 13)
            .into_iter()
            .map(to_angular)
            .collect();
        let cfg = MasterEqConfig::weak(&c, 1, grid.clone());
        let s = steady_state_transmission(&c, &t, &cfg).unwrap();
        for (d, v) in grid.iter().zip(&s.mean) {
            let lr = linear_response_transmission(&c, &t, 1.0, ScanAxis::Laser, *d);
            assert!((v / lr - 1.0).abs() < 2e-3, "{d} {v} {lr}");
        }
        let eta = cooperativity(1.0, t.g_peak, c.kappa(), t.gamma_h).unwrap();
        assert!((s.mean[6] - (1.0 + eta).powi(-2)).abs() < 2e-3 * s.mean[6]);
    }

    #[test]
    fn cavity_axis_reproduces_closed_form() {
        let c = cavity();
        let t = ion(to_angular(10e6), 3.1e3);
        let k = c.kappa();
        let grid = vec![0.0, 0.3 * k, k, 2.0 * k];
        let cfg = MasterEqConfig {
            axis: ScanAxis::Cavity,
            ..MasterEqConfig::weak(&c, 1, grid.clone())
        };
        let s = steady_state_transmission(&c, &t, &cfg).unwrap();
        for (d, v) in grid.iter().zip(&s.mean) {
            let closed = transmission(*d, k, 1.0, t.g_peak, t.gamma_h);
            assert!((v / closed - 1.0).abs() < 2e-3, "{v} {closed}");
        }
    }

    #[test]
    fn uncoupled_ion_is_transparent() {
        let c = cavity();
        let cfg = MasterEqConfig::weak(&c, 1, vec![0.0, to_angular(5e3)]);
        let s = steady_state_transmission(&c, &ion(0.0, 3.1e3), &cfg).unwrap();
        assert!(s.mean.iter().all(|v| (v - 1.0).abs() < 1e-6));
    }

    #[test]
    fn explicit_and_collective_ensembles_agree_weakly() {
        let c = cavity();
        let t = ion(to_angular(10e6), 100e3);
        let expected = (1.0 + cooperativity(4.0, t.g_peak, c.kappa(), t.gamma_h).unwrap()).powi(-2);
        for n in [3usize, 4] {
            let cfg = MasterEqConfig::weak(&c, n, vec![0.0]);
            let s = steady_state_transmission(&c, &t, &cfg).unwrap();
            let want =
                (1.0 + cooperativity(n as f64, t.g_peak, c.kappa(), t.gamma_h).unwrap()).powi(-2);
            assert!(
                (s.mean[0] / want - 1.0).abs() < 2e-3,
                "n={n}: {} vs {want}",
                s.mean[0]
            );
        }
        assert!(expected < 1.0);
    }

    #[test]
    fn steady_state_invariants() {
        let c = cavity();
        let t = ion(to_angular(10e6), 3.1e3);
        let mut cfg = MasterEqConfig::weak(&c, 2, vec![0.0]);
        cfg.drive_amplitude = drive_for_photon_number(&c, 1e-6);
        let a = steady_state(&c, &t, &cfg, 0.0).unwrap();
        assert!(a.trace_error < cfg.tolerance);
        cfg.fock_cutoff += 2;
        let b = steady_state(&c, &t, &cfg, 0.0).unwrap();
        assert!(((a.photon_number - b.photon_number) / b.photon_number).abs() < cfg.tolerance);
    }

    #[test]
    fn config_validation_and_cutoff_check() {
        let c = cavity();
        let t = ion(to_angular(10e6), 3.1e3);
        let base = MasterEqConfig::weak(&c, 1, vec![0.0]);
        assert!(MasterEqConfig {
            fock_cutoff: 1,
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(MasterEqConfig {
            tolerance: 1e-2,
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(MasterEqConfig {
            n_ions: 0,
            ..base.clone()
        }
        .validate()
        .is_err());
        let strong = MasterEqConfig {
            drive_amplitude: drive_for_photon_number(&c, 0.5),
            fock_cutoff: 2,
            ..base
        };
        assert!(matches!(
            steady_state_transmission(&c, &t, &strong),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn dip_metrics_on_lorentzian() {
        let x = linspace(-100.0, 100.0, 20001);
        let y: Vec<f64> = x
            .iter()
            .map(|x| 1.0 - 0.8 / (1.0 + (x / 1.5).powi(2)))
            .collect();
        let m = dip_metrics(&Spectrum::transmission(x, y)).unwrap();
        assert!((m.depth - 0.8).abs() < 1e-12);
        assert!((m.fwhm - 3.0).abs() < 2e-3, "{}", m.fwhm);
    }
}
