// SPDX-License-Identifier: Apache-2.0

//! Purcell enhancement, lifetime prediction and extraction, branching
//! ratio, and the cavity emission fraction.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{invalid, require_non_negative, require_positive, Error, Result};
use crate::model::{CavityParams, SpatialDistribution};
use crate::profile::ModeProfile;
use crate::spectrum::Spectrum;
use crate::units::{ELECTRON_MASS, ELEMENTARY_CHARGE, EPSILON_0, SPEED_OF_LIGHT};

/// Uncoupled and coupled lifetimes at a given cavity detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifetimePair {
    pub tau_uncoupled: f64,
    pub tau_coupled: f64,
    /// Cavity detuning Δλ at which `tau_coupled` was measured, m.
    pub detuning: f64,
}

impl LifetimePair {
    pub fn new(tau_uncoupled: f64, tau_coupled: f64, detuning: f64) -> Result<Self> {
        require_positive("tau_uncoupled", tau_uncoupled)?;
        require_positive("tau_coupled", tau_coupled)?;
        if detuning == 0.0 && tau_coupled > tau_uncoupled {
            return Err(Error::NoEnhancement {
                tau_uncoupled,
                tau_coupled,
            });
        }
        Ok(Self {
            tau_uncoupled,
            tau_coupled,
            detuning,
        })
    }
}

/// F_cav = (3/4π²)·Q/V with V in units of (λ/n)³.
pub fn peak_purcell_factor(cavity: &CavityParams) -> f64 {
    3.0 / (4.0 * PI * PI) * cavity.quality_factor() / cavity.v_mode_normalized()
}

/// Lorentzian suppression [1 + 4Q²(λ/λ_cav − 1)²]⁻¹ for an emitter at
/// wavelength `lambda_ion`.
pub fn detuning_factor(cavity: &CavityParams, lambda_ion: f64) -> f64 {
    let q = cavity.quality_factor();
    let x = lambda_ion / cavity.lambda_cav() - 1.0;
    1.0 / (1.0 + 4.0 * q * q * x * x)
}

/// Purcell factor of a dipole at `position` (m) with orientation factor
/// cos²θ, emitting at `lambda_ion`.
pub fn local_purcell_factor(
    cavity: &CavityParams,
    profile: &ModeProfile,
    position: [f64; 3],
    orientation_factor: f64,
    lambda_ion: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&orientation_factor) {
        return Err(invalid("orientation_factor", "must lie in [0, 1]"));
    }
    require_positive("lambda_ion", lambda_ion)?;
    let intensity = profile.intensity_at(position)?;
    Ok(peak_purcell_factor(cavity)
        * intensity
        * orientation_factor
        * detuning_factor(cavity, lambda_ion))
}

/// Ensemble-averaged Purcell factor for resonant, aligned dipoles.
pub fn ensemble_average_purcell(
    cavity: &CavityParams,
    profile: &ModeProfile,
    spatial_distribution: SpatialDistribution,
) -> Result<f64> {
    ensemble_average_purcell_detuned(
        cavity,
        profile,
        spatial_distribution,
        1.0,
        cavity.lambda_cav(),
    )
}

/// Volume-weighted mean of [`local_purcell_factor`] over ions uniformly
/// filling the dielectric, or its antinode value for a point distribution.
pub fn ensemble_average_purcell_detuned(
    cavity: &CavityParams,
    profile: &ModeProfile,
    spatial_distribution: SpatialDistribution,
    orientation_factor: f64,
    lambda_ion: f64,
) -> Result<f64> {
    match spatial_distribution {
        SpatialDistribution::PointAtAntinode => local_purcell_factor(
            cavity,
            profile,
            profile.antinode(),
            orientation_factor,
            lambda_ion,
        ),
        SpatialDistribution::UniformInModeVolume => {
            if !(0.0..=1.0).contains(&orientation_factor) {
                return Err(invalid("orientation_factor", "must lie in [0, 1]"));
            }
            require_positive("lambda_ion", lambda_ion)?;
            let scale = peak_purcell_factor(cavity)
                * orientation_factor
                * detuning_factor(cavity, lambda_ion);
            Ok(scale * profile.volume_average(|c| c.intensity)?)
        }
    }
}

/// τ_c = τ₀/(1 + βF). Follows from 1/τ_c = (1+F)/τ_883 + 1/τ_other with
/// τ_883 = τ₀/β.
pub fn coupled_lifetime(tau0: f64, beta: f64, purcell: f64) -> Result<f64> {
    require_positive("tau0", tau0)?;
    check_beta(beta)?;
    require_non_negative("purcell", purcell)?;
    let tau_883 = tau0 / beta;
    let rate_other = 1.0 / tau0 - 1.0 / tau_883;
    let rate = (1.0 + purcell) / tau_883 + rate_other;
    Ok(1.0 / rate)
}

/// F = (τ₀/τ_c − 1)/β.
pub fn extract_purcell_from_lifetimes(pair: &LifetimePair, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if pair.tau_coupled >= pair.tau_uncoupled {
        return Err(Error::NoEnhancement {
            tau_uncoupled: pair.tau_uncoupled,
            tau_coupled: pair.tau_coupled,
        });
    }
    Ok((pair.tau_uncoupled / pair.tau_coupled - 1.0) / beta)
}

/// τ(Δλ) = τ₀/(1 + βF̄·[1 + 4Q²(Δλ/λ_cav)²]⁻¹) over cavity detunings Δλ (m).
pub fn lifetime_vs_detuning(
    cavity: &CavityParams,
    purcell_on_resonance: f64,
    beta: f64,
    tau0: f64,
    detunings: &[f64],
) -> Result<Spectrum> {
    require_positive("tau0", tau0)?;
    check_beta(beta)?;
    require_non_negative("purcell_on_resonance", purcell_on_resonance)?;
    if let Some(d) = detunings.iter().find(|d| !d.is_finite()) {
        return Err(invalid("detunings", format!("must be finite, got {d}")));
    }
    let q = cavity.quality_factor();
    let lifetimes = detunings
        .iter()
        .map(|&dl| {
            let x = dl / cavity.lambda_cav();
            let lorentz = 1.0 / (1.0 + 4.0 * q * q * x * x);
            tau0 / (1.0 + beta * purcell_on_resonance * lorentz)
        })
        .collect();
    Ok(Spectrum::new(
        "detuning_m",
        "lifetime_s",
        detunings.to_vec(),
        lifetimes,
    ))
}

/// β = τ₀/τ_883.
pub fn branching_ratio(tau0: f64, tau_883: f64) -> Result<f64> {
    require_positive("tau0", tau0)?;
    require_positive("tau_883", tau_883)?;
    Ok(tau0 / tau_883)
}

/// Local-field correction applied to the classical-oscillator rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalFieldModel {
    None,
    /// (1/n)·((n² + 2)/3)².
    VirtualCavity,
}

impl LocalFieldModel {
    pub fn factor(&self, n: f64) -> f64 {
        match self {
            LocalFieldModel::None => 1.0,
            LocalFieldModel::VirtualCavity => ((n * n + 2.0) / 3.0).powi(2) / n,
        }
    }
}

impl FromStr for LocalFieldModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "virtual_cavity" | "virtual-cavity" => Ok(Self::VirtualCavity),
            other => Err(invalid(
                "local_field_model",
                format!("unknown model `{other}`"),
            )),
        }
    }
}

/// Spontaneous emission rate (1/s) of a transition with oscillator strength
/// `f` at vacuum wavelength `lambda` (m): γ = 2πe²f/(ε₀ m_e c λ²) times the
/// local-field factor.
pub fn oscillator_strength_to_rate(
    f: f64,
    lambda: f64,
    refractive_index: f64,
    model: LocalFieldModel,
) -> Result<f64> {
    require_non_negative("oscillator_strength", f)?;
    require_positive("lambda", lambda)?;
    if !(refractive_index >= 1.0) {
        return Err(invalid("refractive_index", "must be >= 1"));
    }
    let classical = 2.0 * PI * ELEMENTARY_CHARGE.powi(2) * f
        / (EPSILON_0 * ELECTRON_MASS * SPEED_OF_LIGHT * lambda * lambda);
    Ok(classical * model.factor(refractive_index))
}

/// Probability that an emitter decays into the cavity mode,
/// βF/(1 + (F − 1)β).
pub fn emission_fraction(purcell: f64, beta: f64) -> Result<f64> {
    require_non_negative("purcell", purcell)?;
    check_beta(beta)?;
    Ok(beta * purcell / (1.0 + (purcell - 1.0) * beta))
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta <= 1.0 {
        Ok(())
    } else {
        Err(invalid("beta", format!("must lie in (0, 1], got {beta}")))
    }
}
