// SPDX-License-Identifier: Apache-2.0

//! Echo dynamics and driven cavity steady states.

pub mod bloch;
pub mod echo;
pub mod master;
pub mod saturation;

pub use bloch::{Pulse, PulseShape, Relaxation};
pub use echo::{
    biexponential_echo, rabi_echo_scan, three_pulse_echo, two_pulse_echo, EchoResult,
    PulseSequence, ThreePulseEcho,
};
pub use master::{
    dip_metrics, drive_for_photon_number, linear_response_transmission, steady_state,
    steady_state_transmission, DipMetrics, MasterEqConfig, ScanAxis, SteadyState,
};
pub use saturation::{
    half_saturation, input_power_for_photon_number, intracavity_photon_number,
    saturated_transmission, saturation_curve, saturation_photon_number,
};
