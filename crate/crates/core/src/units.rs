// SPDX-License-Identifier: Apache-2.0

//! Physical constants and the single place where ordinary and angular
//! frequencies are converted.
//!
//! Convention used across the crate: fields named `*_hz` or documented as
//! "ordinary" carry cycles per second, everything documented as "angular"
//! carries rad/s. Linewidths (Γ_h, Γ_inhom) are ordinary; couplings, cavity
//! decay rates and Rabi frequencies are angular.

use std::f64::consts::PI;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Electron rest mass, kg.
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;

/// Ordinary frequency (Hz) to angular frequency (rad/s).
#[inline]
pub fn to_angular(hz: f64) -> f64 {
    2.0 * PI * hz
}

/// Angular frequency (rad/s) to ordinary frequency (Hz).
#[inline]
pub fn to_ordinary(rad_per_s: f64) -> f64 {
    rad_per_s / (2.0 * PI)
}

/// Vacuum wavelength (m) to angular optical frequency (rad/s).
#[inline]
pub fn angular_frequency_of(wavelength: f64) -> f64 {
    to_angular(SPEED_OF_LIGHT / wavelength)
}

/// Vacuum wavelength (m) to ordinary optical frequency (Hz).
#[inline]
pub fn frequency_of(wavelength: f64) -> f64 {
    SPEED_OF_LIGHT / wavelength
}
