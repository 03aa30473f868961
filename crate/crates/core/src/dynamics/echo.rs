// SPDX-License-Identifier: Apache-2.0

//! Photon echoes from an inhomogeneously broadened ensemble.
//!
//! Each spectral class is an independent Bloch vector. Classes sit on the
//! Gauss–Hermite nodes of the inhomogeneous profile multiplied by a
//! Gaussian window about twice as wide as the shortest pulse's bandwidth,
//! which keeps the sum deterministic. The rephased signal is isolated by
//! cycling the first pulse's phase through four quadrants: the echo
//! carries e^{−iφ₁}, while free-induction tails carry e⁰ or e^{+iφ₁}.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use super::bloch::{apply_pulse, free_evolve, Pulse, PulseShape, Relaxation, GROUND};
use crate::error::{invalid, require_non_negative, require_positive, Error, Result};
use crate::model::TransitionParams;
use crate::numeric::{gauss_hermite, pairwise_sum};
use crate::spectrum::Spectrum;
use crate::units::to_angular;

const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;
/// Spectral window std × shortest pulse width. A square π/2 pulse excites
/// |Δ| ≲ π/(2w), so 4/w keeps every excited class while leaving the
/// Gauss–Hermite nodes dense enough to resolve the pulse response.
const WINDOW_RATE: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    pub pulses: Vec<Pulse>,
    /// Shot repetition period, s; metadata only.
    pub repetition_period: Option<f64>,
}

impl PulseSequence {
    pub fn new(pulses: Vec<Pulse>) -> Result<Self> {
        let s = Self {
            pulses,
            repetition_period: None,
        };
        s.validate()?;
        Ok(s)
    }

    /// π/2 – π pair of the given shape; `width` is the π/2 pulse width and
    /// the π pulse is twice as long at the same Rabi frequency.
    pub fn two_pulse(shape: PulseShape, width: f64) -> Result<Self> {
        let p1 = Pulse {
            shape,
            ..Pulse::square(width, FRAC_PI_2)
        };
        let p2 = Pulse {
            shape,
            ..Pulse::square(2.0 * width, PI)
        };
        Self::new(vec![p1, p2])
    }

    pub fn validate(&self) -> Result<()> {
        for p in &self.pulses {
            require_positive("pulse width", p.width)?;
            require_non_negative("pulse delay", p.delay_after)?;
            if !p.area.is_finite() || !p.phase.is_finite() {
                return Err(invalid("pulse area", "must be finite"));
            }
        }
        if let Some(t) = self.repetition_period {
            require_positive("repetition_period", t)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EchoResult {
    /// τ, T_w or pulse width depending on the scan, s.
    pub delays: Vec<f64>,
    pub intensities: Vec<f64>,
    /// Intensity decay constant from a fit, when one was run.
    pub fitted_decay: Option<f64>,
}

impl EchoResult {
    pub fn to_spectrum(&self, axis: &str) -> Spectrum {
        Spectrum::new(
            axis,
            "echo_intensity",
            self.delays.clone(),
            self.intensities.clone(),
        )
    }
}

/// Simulated spectral classes: detunings (rad/s), weights, and the
/// standard deviation of the sampled distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralClasses {
    pub deltas: Vec<f64>,
    pub weights: Vec<f64>,
    pub sigma: f64,
}

pub fn spectral_classes(
    transition: &TransitionParams,
    pulses: &[Pulse],
    n: usize,
) -> SpectralClasses {
    let inhom = to_angular(transition.gamma_inhom_fwhm) / FWHM_PER_SIGMA;
    let shortest = pulses
        .iter()
        .filter(|p| p.shape != PulseShape::Instantaneous)
        .map(|p| p.width)
        .fold(f64::INFINITY, f64::min);
    let window = WINDOW_RATE / shortest;
    let sigma = match (inhom > 0.0, window.is_finite()) {
        (false, _) => 0.0,
        (true, false) => inhom,
        (true, true) => (inhom.powi(-2) + window.powi(-2)).powf(-0.5),
    };
    if sigma == 0.0 {
        return SpectralClasses {
            deltas: vec![0.0],
            weights: vec![1.0],
            sigma,
        };
    }
    let (x, weights) = gauss_hermite(n);
    SpectralClasses {
        deltas: x.into_iter().map(|x| x * sigma).collect(),
        weights,
        sigma,
    }
}

/// Echo-pathway coherence of every class right after the last pulse.
fn rephased_amplitudes(
    deltas: &[f64],
    pulses: &[Pulse],
    gaps: &[f64],
    relax: Relaxation,
) -> Result<Vec<Complex64>> {
    deltas
        .iter()
        .map(|&delta| {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..4 {
                let shift = j as f64 * FRAC_PI_2;
                let mut r = GROUND;
                for (k, p) in pulses.iter().enumerate() {
                    let p = if k == 0 {
                        Pulse {
                            phase: p.phase + shift,
                            ..*p
                        }
                    } else {
                        *p
                    };
                    r = apply_pulse(r, &p, delta, relax)?;
                    if let Some(&gap) = gaps.get(k) {
                        r = free_evolve(r, delta, gap, relax);
                    }
                }
                acc += Complex64::new(r[0], r[1]) * Complex64::from_polar(0.25, shift);
            }
            Ok(acc)
        })
        .collect()
}

/// Ensemble signal |Σ wₖ cₖ e^{iΔₖt}|² e^{−2t/T₂} at time `t` after the
/// last pulse.
fn signal(deltas: &[f64], weights: &[f64], amps: &[Complex64], gamma2: f64, t: f64) -> f64 {
    let terms: Vec<Complex64> = deltas
        .iter()
        .zip(weights)
        .zip(amps)
        .map(|((&d, &w), &c)| c * Complex64::from_polar(w, d * t))
        .collect();
    let re: Vec<f64> = terms.iter().map(|z| z.re).collect();
    let im: Vec<f64> = terms.iter().map(|z| z.im).collect();
    (pairwise_sum(&re).powi(2) + pairwise_sum(&im).powi(2)) * (-2.0 * gamma2 * t).exp()
}

const SEARCH_POINTS: usize = 257;

/// Peak echo intensity in the window `nominal ± half_width` (clipped at 0).
fn peak_signal(
    deltas: &[f64],
    weights: &[f64],
    amps: &[Complex64],
    gamma2: f64,
    nominal: f64,
    half_width: f64,
) -> f64 {
    let f = |t: f64| signal(deltas, weights, amps, gamma2, t);
    if half_width == 0.0 {
        return f(nominal);
    }
    let lo = (nominal - half_width).max(0.0);
    let hi = nominal + half_width;
    let h = (hi - lo) / (SEARCH_POINTS - 1) as f64;
    let (best, _) = (0..SEARCH_POINTS)
        .map(|i| (i, f(lo + i as f64 * h)))
        .fold((0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
    // golden-section refinement inside the neighbouring grid cells
    let mut a = lo + best.saturating_sub(1) as f64 * h;
    let mut b = lo + (best + 1).min(SEARCH_POINTS - 1) as f64 * h;
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd).max(f(lo + best as f64 * h))
}

/// Echo intensity of a two-pulse sequence with free-evolution gap `gap`.
/// Normalization: unit amplitude for ideal pulses without damping.
fn two_pulse_intensity(
    classes: &SpectralClasses,
    p1: &Pulse,
    p2: &Pulse,
    gap: f64,
    relax: Relaxation,
) -> Result<f64> {
    let amps = rephased_amplitudes(&classes.deltas, &[*p1, *p2], &[gap], relax)?;
    let d1 = p1.duration();
    let nominal = gap + 0.5 * d1;
    let half_width = if classes.sigma > 0.0 {
        d1 + 1.0 / classes.sigma
    } else {
        0.0
    };
    Ok(peak_signal(
        &classes.deltas,
        &classes.weights,
        &amps,
        relax.gamma2,
        nominal,
        half_width,
    ))
}

fn relaxation(transition: &TransitionParams) -> Relaxation {
    Relaxation::from_times(transition.t1, transition.t2)
}

/// Two-pulse echo intensity versus the free-evolution time τ between the
/// pulses (end of the first to start of the second). The echo is read at
/// its peak near τ after the second pulse, and the series is normalized
/// to its first point.
pub fn two_pulse_echo(
    transition: &TransitionParams,
    sequence: &PulseSequence,
    tau_list: &[f64],
    n_spectral_samples: usize,
) -> Result<EchoResult> {
    transition.validate()?;
    sequence.validate()?;
    if sequence.pulses.len() != 2 {
        return Err(invalid(
            "sequence",
            format!(
                "two-pulse echo needs exactly 2 pulses, got {}",
                sequence.pulses.len()
            ),
        ));
    }
    if tau_list.is_empty() {
        return Err(invalid("tau_list", "must not be empty"));
    }
    for &t in tau_list {
        require_non_negative("tau", t)?;
    }
    require_positive("n_spectral_samples", n_spectral_samples as f64)?;
    let (p1, p2) = (sequence.pulses[0], sequence.pulses[1]);
    let classes = spectral_classes(transition, &sequence.pulses, n_spectral_samples);
    let relax = relaxation(transition);
    let raw = tau_list
        .par_iter()
        .map(|&tau| two_pulse_intensity(&classes, &p1, &p2, tau, relax))
        .collect::<Result<Vec<f64>>>()?;
    if !(raw[0] > 0.0) {
        return Err(Error::Numerical("no echo at the first delay".into()));
    }
    Ok(EchoResult {
        delays: tau_list.to_vec(),
        intensities: raw.iter().map(|v| v / raw[0]).collect(),
        fitted_decay: None,
    })
}

/// Weighted sum of two single-T₂ echo decays, e.g. a superhyperfine-
/// modulated fast component on top of the intrinsic one. Ideal pulses, so
/// each component is exactly exp(−4τ/T₂).
pub fn biexponential_echo(
    fast: &TransitionParams,
    slow: &TransitionParams,
    weights: [f64; 2],
    tau_list: &[f64],
) -> Result<EchoResult> {
    fast.validate()?;
    slow.validate()?;
    require_non_negative("weight", weights[0])?;
    require_non_negative("weight", weights[1])?;
    if (weights[0] + weights[1] - 1.0).abs() > 1e-9 {
        return Err(invalid("weights", "must sum to 1"));
    }
    let intensities = tau_list
        .iter()
        .map(|&tau| {
            weights[0] * (-4.0 * tau / fast.t2).exp() + weights[1] * (-4.0 * tau / slow.t2).exp()
        })
        .collect();
    Ok(EchoResult {
        delays: tau_list.to_vec(),
        intensities,
        fitted_decay: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreePulseEcho {
    pub echo: EchoResult,
    /// Γ_eff(T_w) in Hz, recovered from the echo intensities.
    pub gamma_eff: Vec<f64>,
}

/// Stimulated echo versus waiting time T_w at fixed pulse separation τ,
/// with spectral diffusion entering through Γ_eff = Γ_h + R·T_w:
///
/// ```text
/// I(τ, T_w) ∝ exp(−4πτ·Γ_eff(T_w)) · exp(−2T_w/T₁)
/// ```
///
/// Γ_eff is recovered from the ratio to the τ → 0 echo at the same T_w,
/// which cancels the population decay. Intensities are normalized to the
/// first point. `r_spectral_diffusion` is in Hz/s.
pub fn three_pulse_echo(
    transition: &TransitionParams,
    t_w_list: &[f64],
    r_spectral_diffusion: f64,
    tau_fixed: f64,
) -> Result<ThreePulseEcho> {
    transition.validate()?;
    require_non_negative("r_spectral_diffusion", r_spectral_diffusion)?;
    require_positive("tau_fixed", tau_fixed)?;
    if t_w_list.is_empty() {
        return Err(invalid("t_w_list", "must not be empty"));
    }
    for &t in t_w_list {
        require_non_negative("t_w", t)?;
    }
    let intensity = |tau: f64, tw: f64| {
        let g_eff = transition.gamma_h + r_spectral_diffusion * tw;
        (-4.0 * PI * tau * g_eff).exp() * (-2.0 * tw / transition.t1).exp()
    };
    let raw: Vec<f64> = t_w_list
        .iter()
        .map(|&tw| intensity(tau_fixed, tw))
        .collect();
    let gamma_eff = t_w_list
        .iter()
        .zip(&raw)
        .map(|(&tw, &i)| -(i / intensity(0.0, tw)).ln() / (4.0 * PI * tau_fixed))
        .collect();
    if !(raw[0] > 0.0) {
        return Err(Error::Numerical(
            "stimulated echo underflows at the first T_w".into(),
        ));
    }
    Ok(ThreePulseEcho {
        echo: EchoResult {
            delays: t_w_list.to_vec(),
            intensities: raw.iter().map(|v| v / raw[0]).collect(),
            fitted_decay: None,
        },
        gamma_eff,
    })
}

/// Echo intensity versus rephasing-pulse width for square pulses at Rabi
/// frequency `rabi_frequency` (rad/s): a π/2 pulse, a gap `tau`, then the
/// variable pulse of area Ω·width. Unit intensity corresponds to a perfect
/// π/2 – π echo without damping.
pub fn rabi_echo_scan(
    transition: &TransitionParams,
    rabi_frequency: f64,
    pulse_widths: &[f64],
    tau: f64,
    n_spectral_samples: usize,
) -> Result<EchoResult> {
    transition.validate()?;
    require_positive("rabi_frequency", rabi_frequency)?;
    require_non_negative("tau", tau)?;
    require_positive("n_spectral_samples", n_spectral_samples as f64)?;
    for &w in pulse_widths {
        require_positive("pulse width", w)?;
    }
    let p1 = Pulse::square(FRAC_PI_2 / rabi_frequency, FRAC_PI_2);
    let classes = spectral_classes(transition, &[p1], n_spectral_samples);
    let relax = relaxation(transition);
    let intensities = pulse_widths
        .par_iter()
        .map(|&w| {
            let p2 = Pulse::square(w, rabi_frequency * w);
            two_pulse_intensity(&classes, &p1, &p2, tau, relax)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(EchoResult {
        delays: pulse_widths.to_vec(),
        intensities,
        fitted_decay: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TransitionSpec;
    use rand::{Rng, SeedableRng};

    fn transition(t2: f64, inhom: f64) -> TransitionParams {
        TransitionSpec {
            lambda_ion: 883e-9,
            g_peak: to_angular(6e6),
            t2: Some(t2),
            gamma_inhom_fwhm: inhom,
            branching_ratio: 0.045,
            dipole_orientation_factor: 1.0,
            ..Default::default()
        }
        .build()
        .unwrap()
    }

    /// Slope of ln(y) against x by least squares.
    fn log_slope(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
        let mx = x.iter().sum::<f64>() / n;
        let my = ly.iter().sum::<f64>() / n;
        let sxy: f64 = x.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        sxy / sxx
    }

    #[test]
    fn ideal_echo_refocuses_every_class() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let pulses = [Pulse::instantaneous(FRAC_PI_2), Pulse::instantaneous(PI)];
        for _ in 0..100 {
            let delta: f64 = rng.random_range(-1e9..1e9);
            let tau: f64 = rng.random_range(0.0..1e-5);
            let amps = rephased_amplitudes(&[delta], &pulses, &[tau], Relaxation::NONE).unwrap();
            let at_echo = amps[0] * Complex64::from_polar(1.0, delta * tau);
            assert!((at_echo.norm() - 1.0).abs() < 1e-12, "{at_echo}");
        }
    }

    #[test]
    fn phase_cycle_removes_free_induction() {
        // a single π/2 pulse has no rephased component
        let amps = rephased_amplitudes(
            &[1e6],
            &[Pulse::instantaneous(FRAC_PI_2)],
            &[],
            Relaxation::NONE,
        )
        .unwrap();
        assert!(amps[0].norm() < 1e-15);
    }

    #[test]
    fn decay_constant_is_quarter_t2() {
        let t = transition(100e-6, 16e9);
        let taus: Vec<f64> = (0..8).map(|i| i as f64 * 10e-6).collect();
        let ideal = PulseSequence::new(vec![
            Pulse::instantaneous(FRAC_PI_2),
            Pulse::instantaneous(PI),
        ])
        .unwrap();
        let r = two_pulse_echo(&t, &ideal, &taus, 32).unwrap();
        assert_eq!(r.intensities[0], 1.0);
        for (tau, i) in taus.iter().zip(&r.intensities) {
            assert!((i - (-4.0 * tau / 100e-6).exp()).abs() < 1e-9);
        }
        let sq = PulseSequence::two_pulse(PulseShape::Square, 0.2e-6).unwrap();
        let r = two_pulse_echo(&t, &sq, &taus, 64).unwrap();
        let tau_d = -1.0 / log_slope(&taus, &r.intensities);
        assert!((tau_d / 25e-6 - 1.0).abs() < 1e-3, "{tau_d}");
    }

    #[test]
    fn echo_errors() {
        let t = transition(100e-6, 16e9);
        let one = PulseSequence::new(vec![Pulse::instantaneous(PI)]).unwrap();
        assert!(two_pulse_echo(&t, &one, &[0.0], 8).is_err());
        let seq = PulseSequence::two_pulse(PulseShape::Square, 1e-7).unwrap();
        assert!(two_pulse_echo(&t, &seq, &[], 8).is_err());
        assert!(PulseSequence::new(vec![Pulse::square(0.0, 1.0)]).is_err());
    }

    #[test]
    fn biexponential_limits() {
        let a = transition(20e-6, 1e9);
        let b = transition(94e-6, 1e9);
        let taus = [0.0, 5e-6, 10e-6];
        let r = biexponential_echo(&a, &b, [0.3, 0.7], &taus).unwrap();
        assert_eq!(r.intensities[0], 1.0);
        let same = biexponential_echo(&b, &b, [0.3, 0.7], &taus).unwrap();
        for (tau, i) in taus.iter().zip(&same.intensities) {
            assert!((i - (-4.0 * tau / 94e-6).exp()).abs() < 1e-15);
        }
        assert!(biexponential_echo(&a, &b, [0.3, 0.6], &taus).is_err());
    }

    #[test]
    fn three_pulse_linear_linewidth() {
        let t = transition(100e-6, 1e9);
        let tw: Vec<f64> = (0..6).map(|i| i as f64 * 2e-6).collect();
        let r = three_pulse_echo(&t, &tw, 380e6, 1e-6).unwrap();
        for (w, g) in tw.iter().zip(&r.gamma_eff) {
            assert!((g - (t.gamma_h + 380e6 * w)).abs() < 1e-6 * g);
        }
        let flat = three_pulse_echo(&t, &tw, 0.0, 1e-6).unwrap();
        assert!(flat
            .gamma_eff
            .iter()
            .all(|g| (g - t.gamma_h).abs() < 1e-6 * t.gamma_h));
        assert!(three_pulse_echo(&t, &tw, -1.0, 1e-6).is_err());
    }

    fn argmax(v: &[f64]) -> usize {
        v.iter()
            .enumerate()
            .fold((0, f64::MIN), |a, (i, &x)| if x > a.1 { (i, x) } else { a })
            .0
    }

    #[test]
    fn rabi_scan_maxima() {
        let om = PI / 0.4e-6;
        let widths: Vec<f64> = (1..=60).map(|i| i as f64 * 0.025e-6).collect();
        // a single resonant class peaks at area π
        let single = rabi_echo_scan(&transition(100e-6, 0.0), om, &widths, 2e-6, 1).unwrap();
        assert_eq!(widths[argmax(&single.intensities[..24])], 0.4e-6);
        // off-resonant classes pull the ensemble maximum earlier, but the
        // period in area stays 2π
        let ens = rabi_echo_scan(&transition(100e-6, 16e9), om, &widths, 2e-6, 64).unwrap();
        let first = argmax(&ens.intensities[..24]);
        let second = 24 + argmax(&ens.intensities[24..]);
        assert!(widths[first] < 0.4e-6);
        assert!(((widths[second] - widths[first]) / 0.8e-6 - 1.0).abs() < 0.07);
        let tiny = rabi_echo_scan(&transition(100e-6, 16e9), om, &[1e-12], 2e-6, 64).unwrap();
        assert!(tiny.intensities[0] < 1e-6);
    }
}
