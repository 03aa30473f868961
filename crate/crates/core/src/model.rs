// SPDX-License-Identifier: Apache-2.0

//! Shared domain types: resonator, optical transition and ion ensemble.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_non_negative, require_positive, Result};
use crate::units::{angular_frequency_of, to_angular};

/// Relative tolerance for the Γ_h = 1/(πT₂) consistency check.
const LINEWIDTH_CONSISTENCY: f64 = 1e-9;

/// Resonator descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    quality_factor: f64,
    lambda_cav: f64,
    v_mode_normalized: f64,
    refractive_index: f64,
}

impl CavityParams {
    /// `lambda_cav` in meters, `v_mode_normalized` in units of (λ/n)³.
    pub fn new(
        quality_factor: f64,
        lambda_cav: f64,
        v_mode_normalized: f64,
        refractive_index: f64,
    ) -> Result<Self> {
        require_positive("quality_factor", quality_factor)?;
        require_positive("lambda_cav", lambda_cav)?;
        require_positive("v_mode_normalized", v_mode_normalized)?;
        if !(refractive_index.is_finite() && refractive_index >= 1.0) {
            return Err(invalid(
                "refractive_index",
                format!("must be >= 1, got {refractive_index}"),
            ));
        }
        Ok(Self {
            quality_factor,
            lambda_cav,
            v_mode_normalized,
            refractive_index,
        })
    }

    pub fn quality_factor(&self) -> f64 {
        self.quality_factor
    }

    pub fn lambda_cav(&self) -> f64 {
        self.lambda_cav
    }

    pub fn v_mode_normalized(&self) -> f64 {
        self.v_mode_normalized
    }

    pub fn refractive_index(&self) -> f64 {
        self.refractive_index
    }

    /// Same resonator retuned to another resonance wavelength.
    pub fn with_lambda_cav(&self, lambda_cav: f64) -> Result<Self> {
        Self::new(
            self.quality_factor,
            lambda_cav,
            self.v_mode_normalized,
            self.refractive_index,
        )
    }

    /// Full energy decay rate κ = ω_cav/Q, angular (rad/s).
    pub fn kappa(&self) -> f64 {
        angular_frequency_of(self.lambda_cav) / self.quality_factor
    }

    /// Mode volume in m³.
    pub fn mode_volume(&self) -> f64 {
        self.v_mode_normalized * (self.lambda_cav / self.refractive_index).powi(3)
    }
}

/// Optical transition of the ion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionParams {
    /// Transition wavelength, m.
    pub lambda_ion: f64,
    /// Peak single-ion coupling ḡ at the field antinode, angular.
    pub g_peak: f64,
    /// Homogeneous linewidth Γ_h, ordinary (Hz).
    pub gamma_h: f64,
    /// Inhomogeneous linewidth Γ_inhom (FWHM), ordinary (Hz).
    pub gamma_inhom_fwhm: f64,
    /// Population lifetime, s.
    pub t1: f64,
    /// Optical coherence time, s.
    pub t2: f64,
    /// Branching ratio β ∈ (0, 1].
    pub branching_ratio: f64,
    /// cos²θ between dipole and cavity polarization.
    pub dipole_orientation_factor: f64,
}

/// Builder input for [`TransitionParams`]; exactly one of `gamma_h`/`t2` is
/// required, the other is derived through Γ_h = 1/(πT₂).
#[derive(Debug, Clone, Copy, Default)]
pub struct TransitionSpec {
    pub lambda_ion: f64,
    pub g_peak: f64,
    pub gamma_h: Option<f64>,
    pub t2: Option<f64>,
    pub gamma_inhom_fwhm: f64,
    /// `None` selects the lifetime-limited two-level model, T₁ = T₂/2.
    pub t1: Option<f64>,
    pub branching_ratio: f64,
    pub dipole_orientation_factor: f64,
}

impl TransitionSpec {
    pub fn build(self) -> Result<TransitionParams> {
        let (gamma_h, t2) = match (self.gamma_h, self.t2) {
            (Some(gh), Some(t2)) => {
                require_positive("gamma_h", gh)?;
                let expected = homogeneous_linewidth_from_t2(t2)?;
                if ((gh - expected) / expected).abs() > LINEWIDTH_CONSISTENCY {
                    return Err(invalid(
                        "gamma_h",
                        format!(
                            "{gh} Hz is inconsistent with t2 = {t2} s (expected {expected} Hz)"
                        ),
                    ));
                }
                (gh, t2)
            }
            (Some(gh), None) => {
                require_positive("gamma_h", gh)?;
                (gh, 1.0 / (PI * gh))
            }
            (None, Some(t2)) => (homogeneous_linewidth_from_t2(t2)?, t2),
            (None, None) => return Err(invalid("gamma_h", "either gamma_h or t2 is required")),
        };
        let t1 = self.t1.unwrap_or(t2 / 2.0);
        let p = TransitionParams {
            lambda_ion: self.lambda_ion,
            g_peak: self.g_peak,
            gamma_h,
            gamma_inhom_fwhm: self.gamma_inhom_fwhm,
            t1,
            t2,
            branching_ratio: self.branching_ratio,
            dipole_orientation_factor: self.dipole_orientation_factor,
        };
        p.validate()?;
        Ok(p)
    }
}

impl TransitionParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("lambda_ion", self.lambda_ion)?;
        require_non_negative("g_peak", self.g_peak)?;
        require_positive("gamma_h", self.gamma_h)?;
        require_non_negative("gamma_inhom_fwhm", self.gamma_inhom_fwhm)?;
        require_positive("t1", self.t1)?;
        require_positive("t2", self.t2)?;
        // one ulp of slack so that the lifetime-limited case t2 = 2·t1 passes
        if self.t2 > 2.0 * self.t1 * (1.0 + 4.0 * f64::EPSILON) {
            return Err(invalid(
                "t2",
                format!("T2 = {} s exceeds 2·T1 = {} s", self.t2, 2.0 * self.t1),
            ));
        }
        let expected = 1.0 / (PI * self.t2);
        if ((self.gamma_h - expected) / expected).abs() > LINEWIDTH_CONSISTENCY {
            return Err(invalid("gamma_h", "inconsistent with t2"));
        }
        if !(self.branching_ratio > 0.0 && self.branching_ratio <= 1.0) {
            return Err(invalid(
                "branching_ratio",
                format!("must lie in (0, 1], got {}", self.branching_ratio),
            ));
        }
        if !(0.0..=1.0).contains(&self.dipole_orientation_factor) {
            return Err(invalid(
                "dipole_orientation_factor",
                format!("must lie in [0, 1], got {}", self.dipole_orientation_factor),
            ));
        }
        Ok(())
    }

    /// Homogeneous linewidth as an angular full width, 2πΓ_h.
    pub fn gamma_h_angular(&self) -> f64 {
        to_angular(self.gamma_h)
    }

    /// Pure-dephasing rate that, added to the 1/(2T₁) radiative part,
    /// gives the coherence decay rate 1/T₂ = πΓ_h.
    pub fn pure_dephasing_rate(&self) -> f64 {
        (1.0 / self.t2 - 0.5 / self.t1).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityProfile {
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialDistribution {
    UniformInModeVolume,
    PointAtAntinode,
}

/// Spectral density of ions: `n_peak` ions per homogeneous linewidth at the
/// line center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n_peak: f64,
    /// Line center relative to the nominal transition, Hz.
    pub center_detuning: f64,
    /// Inhomogeneous FWHM, Hz.
    pub gamma_inhom_fwhm: f64,
    pub profile: DensityProfile,
    pub spatial_distribution: SpatialDistribution,
}

impl EnsembleSpec {
    pub fn gaussian(n_peak: f64, gamma_inhom_fwhm: f64) -> Result<Self> {
        let e = Self {
            n_peak,
            center_detuning: 0.0,
            gamma_inhom_fwhm,
            profile: DensityProfile::Gaussian,
            spatial_distribution: SpatialDistribution::UniformInModeVolume,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        require_non_negative("n_peak", self.n_peak)?;
        require_positive("gamma_inhom_fwhm", self.gamma_inhom_fwhm)?;
        if !self.center_detuning.is_finite() {
            return Err(invalid("center_detuning", "must be finite"));
        }
        Ok(())
    }

    /// Standard deviation of the Gaussian profile, Hz.
    pub fn sigma(&self) -> f64 {
        self.gamma_inhom_fwhm / (2.0 * (2.0 * LN_2).sqrt())
    }
}

/// Ions per homogeneous linewidth at detuning `delta` (Hz):
/// N(Δ) = N_peak · exp(−4 ln2 (Δ − Δ₀)² / Γ_inhom²).
pub fn gaussian_density(delta: f64, ensemble: &EnsembleSpec) -> f64 {
    match ensemble.profile {
        DensityProfile::Gaussian => {
            let x = (delta - ensemble.center_detuning) / ensemble.gamma_inhom_fwhm;
            ensemble.n_peak * (-4.0 * LN_2 * x * x).exp()
        }
    }
}

/// Γ_h = 1/(πT₂), Hz.
pub fn homogeneous_linewidth_from_t2(t2: f64) -> Result<f64> {
    require_positive("t2", t2)?;
    Ok(1.0 / (PI * t2))
}
