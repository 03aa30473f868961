// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the physics and fitting layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates a documented precondition.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Position lies outside the mode-profile domain.
    #[error("position ({x:.3e}, {y:.3e}, {z:.3e}) m lies outside the mode profile domain")]
    OutsideDomain { x: f64, y: f64, z: f64 },

    /// The measured coupled lifetime is not shorter than the uncoupled one.
    #[error("no enhancement detected: coupled lifetime {tau_coupled:.3e} s >= uncoupled {tau_uncoupled:.3e} s")]
    NoEnhancement {
        tau_uncoupled: f64,
        tau_coupled: f64,
    },

    /// Empty or degenerate input data (profile, fit data).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A numerical routine failed to reach the requested accuracy.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Malformed mode-profile or CSV text.
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Fails with [`Error::InvalidParameter`] unless `value` is finite and `> 0`.
pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(
            name,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}

pub(crate) fn require_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(invalid(
            name,
            format!("must be finite and >= 0, got {value}"),
        ))
    }
}
