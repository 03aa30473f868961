// SPDX-License-Identifier: Apache-2.0

//! Cavity-QED simulation and parameter extraction for rare-earth-ion
//! ensembles coupled to nanophotonic resonators.
//!
//! * [`model`], [`profile`]: resonator, transition, ensemble and mode
//!   profile descriptions.
//! * [`purcell`]: Purcell factors and lifetimes.
//! * [`transmission`]: dipole-induced transparency and statistical fine
//!   structure scans.
//! * [`dynamics`]: photon echoes and the driven cavity master equation.
//! * [`fitting`]: least-squares extraction of physical parameters.
//! * [`scenario`]: config-file front end used by the `cavqed` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod fitting;
pub mod model;
pub mod numeric;
pub mod profile;
pub mod purcell;
pub mod rng;
pub mod scenario;
pub mod spectrum;
pub mod transmission;
pub mod units;

pub use error::{Error, Result};
pub use model::{CavityParams, EnsembleSpec, TransitionParams, TransitionSpec};
pub use spectrum::Spectrum;
