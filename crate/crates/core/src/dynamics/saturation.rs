// SPDX-License-Identifier: Apache-2.0

//! Power saturation of the transmission dip.
//!
//! Each resonant ion sees the intracavity field as a drive of Rabi
//! frequency 2g√n. Its linear susceptibility is reduced by 1 + n/n_s with
//! n_s = γ∥γ⊥/(4g²), so the collective cooperativity becomes η/(1 + n/n_s)
//! and
//!
//! ```text
//! T(n) = (1 + η / (1 + n/n_s))⁻²
//! ```
//!
//! This mean-field picture treats ions independently; it holds while the
//! per-ion cooperativity is small, which the unit tests check against the full
//! master equation.

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::model::{gaussian_density, CavityParams, EnsembleSpec, TransitionParams};
use crate::numeric::crossing;
use crate::spectrum::Spectrum;
use crate::transmission::cooperativity;
use crate::units::HBAR;

/// Intracavity photon number at which one ion's absorption halves.
pub fn saturation_photon_number(transition: &TransitionParams) -> f64 {
    let gamma_par = 1.0 / transition.t1;
    let gamma_perp = 1.0 / transition.t2;
    gamma_par * gamma_perp / (4.0 * transition.g_peak * transition.g_peak)
}

pub fn saturated_transmission(eta: f64, n_cav: f64, n_sat: f64) -> f64 {
    (1.0 + eta / (1.0 + n_cav / n_sat)).powi(-2)
}

/// Line-center transmission versus intracavity photon number. Axis
/// `n_cav`, quantity `mean_T`.
pub fn saturation_curve(
    cavity: &CavityParams,
    transition: &TransitionParams,
    ensemble: &EnsembleSpec,
    n_cav_list: &[f64],
) -> Result<Spectrum> {
    transition.validate()?;
    ensemble.validate()?;
    for &n in n_cav_list {
        require_positive("n_cav", n)?;
    }
    require_positive("g_peak", transition.g_peak)?;
    let n_ions = gaussian_density(ensemble.center_detuning, ensemble);
    let eta = cooperativity(
        n_ions,
        transition.g_peak,
        cavity.kappa(),
        transition.gamma_h,
    )?;
    let n_sat = saturation_photon_number(transition);
    let t = n_cav_list
        .iter()
        .map(|&n| saturated_transmission(eta, n, n_sat))
        .collect();
    Ok(Spectrum::new("n_cav", "mean_T", n_cav_list.to_vec(), t))
}

/// Photon number at which the effective cooperativity T^{−1/2} − 1 has
/// dropped to half its unsaturated value `eta`, read off a saturation
/// curve by log-linear interpolation.
pub fn half_saturation(curve: &Spectrum, eta: f64) -> Result<f64> {
    let log_n: Vec<f64> = curve.abscissa.iter().map(|n| n.ln()).collect();
    let eta_eff: Vec<f64> = curve.mean.iter().map(|t| t.powf(-0.5) - 1.0).collect();
    crossing(&log_n, &eta_eff, 0.5 * eta, 0, true)
        .map(f64::exp)
        .ok_or_else(|| Error::Degenerate("curve does not reach half saturation".into()))
}

/// ⟨n_cav⟩ = η_c·P_in/(κħω). `kappa` and `omega` in rad/s.
pub fn intracavity_photon_number(
    p_in: f64,
    coupler_efficiency: f64,
    kappa: f64,
    omega: f64,
) -> Result<f64> {
    require_non_negative("p_in", p_in)?;
    require_positive("coupler_efficiency", coupler_efficiency)?;
    require_positive("kappa", kappa)?;
    require_positive("omega", omega)?;
    Ok(coupler_efficiency * p_in / (kappa * HBAR * omega))
}

/// Input power giving `n_cav` intracavity photons.
pub fn input_power_for_photon_number(
    n_cav: f64,
    coupler_efficiency: f64,
    kappa: f64,
    omega: f64,
) -> Result<f64> {
    require_non_negative("n_cav", n_cav)?;
    require_positive("coupler_efficiency", coupler_efficiency)?;
    require_positive("kappa", kappa)?;
    require_positive("omega", omega)?;
    Ok(n_cav * kappa * HBAR * omega / coupler_efficiency)
}
