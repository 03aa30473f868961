// SPDX-License-Identifier: Apache-2.0

//! Optical Bloch equations for one spectral class.
//!
//! State r = (u, v, w) in the frame rotating at the laser frequency, with
//! w = −1 the ground state. Equation of motion
//!
//! ```text
//! dr/dt = Ω⃗ × r − (u/T₂, v/T₂, (w + 1)/T₁),   Ω⃗ = (Ω cos φ, Ω sin φ, Δ)
//! ```
//!
//! so the complex coherence S = u + iv precesses as e^{iΔt}.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Bloch = [f64; 3];

pub const GROUND: Bloch = [0.0, 0.0, -1.0];

/// Relaxation rates 1/T₁ and 1/T₂; zero means no damping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Relaxation {
    pub gamma1: f64,
    pub gamma2: f64,
}

impl Relaxation {
    pub const NONE: Self = Self {
        gamma1: 0.0,
        gamma2: 0.0,
    };

    pub fn from_times(t1: f64, t2: f64) -> Self {
        Self {
            gamma1: 1.0 / t1,
            gamma2: 1.0 / t2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseShape {
    /// Gaussian field envelope; `width` is its FWHM and the pulse is
    /// truncated to ±1.5 widths.
    Gaussian,
    Square,
    /// Zero-duration rotation; `width` only sets the excited bandwidth.
    Instantaneous,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub shape: PulseShape,
    /// Seconds.
    pub width: f64,
    /// Pulse area ∫Ω dt, rad.
    pub area: f64,
    /// Free evolution after the pulse, from its end to the next pulse, s.
    pub delay_after: f64,
    /// Drive phase φ, rad.
    pub phase: f64,
}

const GAUSS_SPAN: f64 = 1.5;

impl Pulse {
    pub fn square(width: f64, area: f64) -> Self {
        Self {
            shape: PulseShape::Square,
            width,
            area,
            delay_after: 0.0,
            phase: 0.0,
        }
    }

    pub fn gaussian(width: f64, area: f64) -> Self {
        Self {
            shape: PulseShape::Gaussian,
            ..Self::square(width, area)
        }
    }

    pub fn instantaneous(area: f64) -> Self {
        Self {
            shape: PulseShape::Instantaneous,
            ..Self::square(1e-9, area)
        }
    }

    /// Time the drive is on.
    pub fn duration(&self) -> f64 {
        match self.shape {
            PulseShape::Square => self.width,
            PulseShape::Gaussian => 2.0 * GAUSS_SPAN * self.width,
            PulseShape::Instantaneous => 0.0,
        }
    }

    /// Rabi frequency at time `t` into the pulse, normalized so that the
    /// integral over the duration equals `area`.
    pub fn rabi(&self, t: f64) -> f64 {
        match self.shape {
            PulseShape::Square => self.area / self.width,
            PulseShape::Gaussian => {
                let c = 4.0 * std::f64::consts::LN_2 / (self.width * self.width);
                let x = t - GAUSS_SPAN * self.width;
                // ∫_{-a}^{a} e^{-c x²} dx = √(π/c)·erf(a√c)
                let norm = (PI / c).sqrt() * erf(GAUSS_SPAN * self.width * c.sqrt());
                self.area / norm * (-c * x * x).exp()
            }
            PulseShape::Instantaneous => f64::INFINITY,
        }
    }
}

/// Error function by its Maclaurin series; only called near x ≈ 2.5.
fn erf(x: f64) -> f64 {
    let mut sum = x;
    let mut term = x;
    let x2 = x * x;
    for n in 1..200 {
        term *= -x2 / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    2.0 / PI.sqrt() * sum
}

fn norm(r: Bloch) -> f64 {
    (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
}

fn cross(a: Bloch, b: Bloch) -> Bloch {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Rotation of `r` by `theta` about the unit axis `n`.
pub fn rotate(r: Bloch, n: Bloch, theta: f64) -> Bloch {
    let (s, c) = theta.sin_cos();
    let nxr = cross(n, r);
    let ndr = n[0] * r[0] + n[1] * r[1] + n[2] * r[2];
    std::array::from_fn(|i| r[i] * c + nxr[i] * s + n[i] * ndr * (1.0 - c))
}

/// Exact free evolution for time `t` at detuning `delta`.
pub fn free_evolve(r: Bloch, delta: f64, t: f64, relax: Relaxation) -> Bloch {
    let (s, c) = (delta * t).sin_cos();
    let d2 = (-relax.gamma2 * t).exp();
    let d1 = (-relax.gamma1 * t).exp();
    [
        d2 * (r[0] * c - r[1] * s),
        d2 * (r[0] * s + r[1] * c),
        -1.0 + (r[2] + 1.0) * d1,
    ]
}

fn derivative(t: f64, r: &Bloch, pulse: &Pulse, delta: f64, relax: Relaxation) -> Bloch {
    let om = pulse.rabi(t);
    let (sp, cp) = pulse.phase.sin_cos();
    let field = [om * cp, om * sp, delta];
    let rot = cross(field, *r);
    [
        rot[0] - relax.gamma2 * r[0],
        rot[1] - relax.gamma2 * r[1],
        rot[2] - relax.gamma1 * (r[2] + 1.0),
    ]
}

/// Per-step tolerance of the pulse integrator, relative to |r|. Tighter
/// than the 1e-9 per-pulse target because local errors accumulate.
pub const PULSE_RTOL: f64 = 1e-10;
const PULSE_ATOL: f64 = 1e-12;
/// Minimum number of steps per pulse width.
const STEPS_PER_WIDTH: f64 = 32.0;

/// Applies `pulse` to `r` at detuning `delta`.
pub fn apply_pulse(r: Bloch, pulse: &Pulse, delta: f64, relax: Relaxation) -> Result<Bloch> {
    apply_pulse_with(r, pulse, delta, relax, STEPS_PER_WIDTH)
}

fn apply_pulse_with(
    r: Bloch,
    pulse: &Pulse,
    delta: f64,
    relax: Relaxation,
    steps_per_width: f64,
) -> Result<Bloch> {
    match pulse.shape {
        PulseShape::Instantaneous => {
            let (s, c) = pulse.phase.sin_cos();
            Ok(rotate(r, [c, s, 0.0], pulse.area))
        }
        _ => {
            let h_max = pulse.width / steps_per_width;
            dopri5(
                |t, y| derivative(t, y, pulse, delta, relax),
                pulse.duration(),
                r,
                h_max,
            )
        }
    }
}

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const MAX_STEPS: usize = 1_000_000;

/// Adaptive Dormand–Prince integration of a 3-vector from 0 to `t_end`.
fn dopri5<F>(f: F, t_end: f64, y0: Bloch, h_max: f64) -> Result<Bloch>
where
    F: Fn(f64, &Bloch) -> Bloch,
{
    let mut t = 0.0;
    let mut y = y0;
    let mut h = h_max.min(t_end);
    let mut k = [[0.0; 3]; 7];
    for _ in 0..MAX_STEPS {
        if t_end - t <= 1e-13 * t_end {
            return Ok(y);
        }
        h = h.min(t_end - t);
        for s in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for i in 0..3 {
                    ys[i] += h * A[s][j] * kj[i];
                }
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y5 = y;
        let mut e = [0.0; 3];
        for i in 0..3 {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * k[s][i];
                d4 += B4[s] * k[s][i];
            }
            y5[i] += h * d5;
            e[i] = h * (d5 - d4);
        }
        // error relative to the Bloch-vector length, not per component:
        // components crossing zero would otherwise force tiny steps
        let scale = PULSE_ATOL + PULSE_RTOL * norm(y).max(norm(y5));
        let err = norm(e) / scale;
        if err <= 1.0 {
            t += h;
            y = y5;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (h * factor).min(h_max);
        if h < 1e-14 * t_end {
            return Err(Error::Numerical(
                "pulse integrator step size underflow".into(),
            ));
        }
    }
    Err(Error::Numerical(
        "pulse integrator exceeded step budget".into(),
    ))
}
