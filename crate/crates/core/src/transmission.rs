// SPDX-License-Identifier: Apache-2.0

//! Dipole-induced transparency and statistical fine structure.
//!
//! Normalized cavity transmission with N resonant ions per homogeneous
//! linewidth:
//!
//! ```text
//! T = | κ / (iΔ + κ + 4Ng²/γ_h) |²,   γ_h = 2πΓ_h
//! ```
//!
//! so that T = (1 + η)⁻² at Δ = 0 with η = 4Ng²/(κγ_h). Here Δ is the
//! detuning variable of this formula: the empty-cavity line has half width κ
//! in Δ, i.e. Δ is twice the physical laser–cavity angular detuning.

use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{invalid, require_non_negative, require_positive, Result};
use crate::model::{gaussian_density, CavityParams, EnsembleSpec, TransitionParams};
use crate::numeric::gauss_hermite;
use crate::rng;
use crate::spectrum::Spectrum;
use crate::units::{frequency_of, to_angular, to_ordinary};

/// Collective cooperativity η = 4Ng²/(κ·2πΓ_h). `g` and `kappa` angular,
/// `gamma_h` ordinary.
pub fn cooperativity(n: f64, g: f64, kappa: f64, gamma_h: f64) -> Result<f64> {
    require_non_negative("n", n)?;
    require_positive("kappa", kappa)?;
    require_positive("gamma_h", gamma_h)?;
    Ok(4.0 * n * g * g / (kappa * to_angular(gamma_h)))
}

/// Closed-form cavity transmission. `delta` and `kappa` angular, `gamma_h` ordinary.
pub fn transmission(delta: f64, kappa: f64, n: f64, g: f64, gamma_h: f64) -> f64 {
    let b = kappa + 4.0 * n * g * g / to_angular(gamma_h);
    kappa * kappa / (b * b + delta * delta)
}

/// ∂T/∂N of [`transmission`].
pub fn transmission_slope(delta: f64, kappa: f64, n: f64, g: f64, gamma_h: f64) -> f64 {
    let per_ion = 4.0 * g * g / to_angular(gamma_h);
    let b = kappa + n * per_ion;
    let d = b * b + delta * delta;
    -2.0 * kappa * kappa * b * per_ion / (d * d)
}

/// Laser scan settings for [`scan_spectrum`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    /// Total scan width, Hz, centered on the line center.
    pub span: f64,
    /// Spectral width of one sample (one exposure), Hz. `None` means Γ_h.
    pub bin_width: Option<f64>,
    /// Spacing between sample centers, Hz. `None` means the bin width.
    pub step: Option<f64>,
    pub seed: u64,
    pub sfs_enabled: bool,
    pub n_traces: usize,
}

impl ScanConfig {
    pub fn validate(&self, gamma_h: f64) -> Result<()> {
        let bin = self.bin_width.unwrap_or(gamma_h);
        require_positive("bin_width", bin)?;
        require_positive("span", self.span)?;
        if self.span < bin {
            return Err(invalid("span", format!("must be >= bin width {bin} Hz")));
        }
        if let Some(step) = self.step {
            require_positive("step", step)?;
        }
        if self.sfs_enabled && self.n_traces == 0 {
            return Err(invalid("n_traces", "must be >= 1 when sfs is enabled"));
        }
        Ok(())
    }

    /// Sample centers, symmetric about zero and always containing zero.
    pub fn detunings(&self, gamma_h: f64) -> Vec<f64> {
        let step = self.step.unwrap_or(self.bin_width.unwrap_or(gamma_h));
        let half = (self.span / 2.0 / step + 1e-9).floor() as i64;
        (-half..=half).map(|i| i as f64 * step).collect()
    }
}

fn check_inputs(transition: &TransitionParams, ensemble: &EnsembleSpec) -> Result<()> {
    transition.validate()?;
    ensemble.validate()
}

/// Transmission while the laser is scanned across the inhomogeneous line
/// with the cavity held on the laser. The ion density at each sample is
/// the Gaussian profile; with SFS enabled every trace draws the ion number
/// per bin from a Poisson law, using one random stream per bin.
pub fn scan_spectrum(
    cavity: &CavityParams,
    transition: &TransitionParams,
    ensemble: &EnsembleSpec,
    config: &ScanConfig,
) -> Result<Spectrum> {
    check_inputs(transition, ensemble)?;
    config.validate(transition.gamma_h)?;
    let kappa = cavity.kappa();
    let (g, gh) = (transition.g_peak, transition.gamma_h);
    let detunings = config.detunings(gh);
    let densities: Vec<f64> = detunings
        .iter()
        .map(|&d| gaussian_density(d, ensemble))
        .collect();
    let mean: Vec<f64> = densities
        .iter()
        .map(|&n| transmission(0.0, kappa, n, g, gh))
        .collect();

    let mut spectrum = sfs_envelope_from(&detunings, &densities, kappa, g, gh);
    spectrum.mean = mean;
    if config.sfs_enabled {
        let per_bin: Vec<Vec<f64>> = densities
            .par_iter()
            .enumerate()
            .map(|(i, &n)| {
                let mut r = rng::stream(config.seed, i as u64);
                let poisson = (n > 0.0).then(|| Poisson::new(n).expect("positive finite mean"));
                (0..config.n_traces)
                    .map(|_| {
                        let k = poisson.as_ref().map_or(0.0, |p| p.sample(&mut r));
                        transmission(0.0, kappa, k, g, gh)
                    })
                    .collect()
            })
            .collect();
        let traces = (0..config.n_traces)
            .map(|k| per_bin.iter().map(|bin| bin[k]).collect())
            .collect();
        spectrum.traces = Some(traces);
    }
    Ok(spectrum)
}

/// Mean transmission with the ±1σ band |∂T/∂N|·√N(Δ) from first-order
/// propagation of Poisson ion-number fluctuations.
pub fn sfs_envelope(
    cavity: &CavityParams,
    transition: &TransitionParams,
    ensemble: &EnsembleSpec,
    detunings: &[f64],
) -> Result<Spectrum> {
    check_inputs(transition, ensemble)?;
    let densities: Vec<f64> = detunings
        .iter()
        .map(|&d| gaussian_density(d, ensemble))
        .collect();
    Ok(sfs_envelope_from(
        detunings,
        &densities,
        cavity.kappa(),
        transition.g_peak,
        transition.gamma_h,
    ))
}

/// Envelope half width at each sample.
pub fn sfs_half_width(kappa: f64, n: f64, g: f64, gamma_h: f64) -> f64 {
    transmission_slope(0.0, kappa, n, g, gamma_h).abs() * n.sqrt()
}

fn sfs_envelope_from(
    detunings: &[f64],
    densities: &[f64],
    kappa: f64,
    g: f64,
    gh: f64,
) -> Spectrum {
    let mean: Vec<f64> = densities
        .iter()
        .map(|&n| transmission(0.0, kappa, n, g, gh))
        .collect();
    let (lo, hi) = densities
        .iter()
        .zip(&mean)
        .map(|(&n, &t)| {
            let w = sfs_half_width(kappa, n, g, gh);
            ((t - w).max(0.0), (t + w).min(1.0))
        })
        .unzip();
    let mut s = Spectrum::transmission(detunings.to_vec(), mean);
    s.envelope = Some((lo, hi));
    s
}

/// Number of quadrature nodes for the density–Lorentzian overlap.
const OVERLAP_NODES: usize = 64;

/// Effective number of ions per Γ_h seen by a cavity detuned by
/// `cavity_detuning` (Hz) from the line center: the Gaussian density
/// weighted by the cavity Lorentzian 1/(1 + (2x/κ_fwhm)²), normalized by the
/// profile area in units of N_peak.
pub fn effective_density(ensemble: &EnsembleSpec, cavity_detuning: f64, kappa_fwhm: f64) -> f64 {
    let (nodes, weights) = gauss_hermite(OVERLAP_NODES);
    let sigma = ensemble.sigma();
    let overlap: f64 = nodes
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| {
            let offset = ensemble.center_detuning + sigma * x - cavity_detuning;
            w / (1.0 + (2.0 * offset / kappa_fwhm).powi(2))
        })
        .sum();
    ensemble.n_peak * overlap
}

/// Transmission at the ion line versus cavity tuning. For each cavity
/// resonance wavelength the dip transmission is (1 + η_eff)⁻² with η_eff
/// built from [`effective_density`].
pub fn tuning_dip_spectrum(
    cavity: &CavityParams,
    cavity_wavelengths: &[f64],
    transition: &TransitionParams,
    ensemble: &EnsembleSpec,
) -> Result<Spectrum> {
    check_inputs(transition, ensemble)?;
    let nu_ion = frequency_of(transition.lambda_ion);
    let dips = cavity_wavelengths
        .iter()
        .map(|&lc| {
            let tuned = cavity.with_lambda_cav(lc)?;
            let kappa = tuned.kappa();
            let detuning = frequency_of(lc) - nu_ion;
            let n_eff = effective_density(ensemble, detuning, to_ordinary(kappa));
            let eta = cooperativity(n_eff, transition.g_peak, kappa, transition.gamma_h)?;
            Ok((1.0 + eta).powi(-2))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Spectrum::new(
        "cavity_wavelength_m",
        "dip_T",
        cavity_wavelengths.to_vec(),
        dips,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TransitionSpec;
    use proptest::prelude::*;
    use rand::SeedableRng;

    pub(crate) fn nominal_ensemble() -> (CavityParams, TransitionParams, EnsembleSpec) {
        let cavity = CavityParams::new(4400.0, 883e-9, 1.65, 1.8).unwrap();
        let transition = TransitionSpec {
            lambda_ion: 883e-9,
            g_peak: to_angular(6e6),
            gamma_h: Some(100e3),
            gamma_inhom_fwhm: 16e9,
            t1: Some(87e-6),
            branching_ratio: 0.045,
            dipole_orientation_factor: 1.0,
            ..Default::default()
        }
        .build()
        .unwrap();
        (
            cavity,
            transition,
            EnsembleSpec::gaussian(53.0, 16e9).unwrap(),
        )
    }

    #[test]
    fn cooperativity_examples() {
        let kappa = CavityParams::new(4400.0, 883e-9, 1.65, 1.8)
            .unwrap()
            .kappa();
        let single = cooperativity(1.0, to_angular(10e6), kappa, 3.1e3).unwrap();
        assert!((single - 1.672).abs() < 0.001, "{single}");
        assert_eq!(
            cooperativity(0.0, to_angular(10e6), kappa, 3.1e3).unwrap(),
            0.0
        );
        let ens = cooperativity(53.0, to_angular(6e6), kappa, 100e3).unwrap();
        assert!((ens - 0.989).abs() < 0.001, "{ens}");
        assert!(cooperativity(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(cooperativity(1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn transmission_examples() {
        let kappa = 1e11;
        let gh = 1e5;
        // N chosen so that η = 1
        let g = 1e7;
        let n_unit = kappa * to_angular(gh) / (4.0 * g * g);
        assert!((transmission(0.0, kappa, n_unit, g, gh) - 0.25).abs() < 1e-15);
        assert_eq!(transmission(0.0, kappa, 0.0, g, gh), 1.0);
        assert!((transmission(kappa, kappa, 0.0, g, gh) - 0.5).abs() < 1e-15);
        let t = transmission(0.0, kappa, 1.2 * n_unit, g, gh);
        assert!((t - 0.2066).abs() < 1e-4);
        assert!((1.0 - t) > 0.75 && (1.0 - t) < 0.80);
    }

    #[test]
    fn slope_matches_central_difference() {
        let (c, t, _) = nominal_ensemble();
        let (k, g, gh) = (c.kappa(), t.g_peak, t.gamma_h);
        for &(delta, n) in &[(0.0, 53.0), (0.3 * k, 10.0), (2.0 * k, 1.0)] {
            let h = 1e-3;
            let fd = (transmission(delta, k, n + h, g, gh) - transmission(delta, k, n - h, g, gh))
                / (2.0 * h);
            let an = transmission_slope(delta, k, n, g, gh);
            assert!(((fd - an) / an).abs() < 1e-6, "{fd} vs {an}");
        }
    }

    #[test]
    fn envelope_examples() {
        let (c, t, e) = nominal_ensemble();
        let s = sfs_envelope(&c, &t, &e, &[0.0, 200e9]).unwrap();
        let (lo, hi) = s.envelope.clone().unwrap();
        let expected =
            transmission_slope(0.0, c.kappa(), 53.0, t.g_peak, t.gamma_h).abs() * 53f64.sqrt();
        assert!(((hi[0] - s.mean[0]) - expected).abs() < 1e-15);
        assert!(((s.mean[0] - lo[0]) - expected).abs() < 1e-15);
        assert_eq!(lo[1], hi[1]);
        s.check(true).unwrap();
    }

    #[test]
    fn scan_center_and_far_wings() {
        let (c, t, e) = nominal_ensemble();
        let cfg = ScanConfig {
            span: 70e9,
            bin_width: None,
            step: Some(500e6),
            seed: 11,
            sfs_enabled: true,
            n_traces: 200,
        };
        let s = scan_spectrum(&c, &t, &e, &cfg).unwrap();
        s.check(true).unwrap();
        let center = s.abscissa.iter().position(|&d| d == 0.0).unwrap();
        // η = 0.989 here, so the dip sits just above (1 + 1)⁻²
        assert!((s.mean[center] - 0.2527).abs() < 1e-3, "{}", s.mean[center]);
        let traces = s.traces.as_ref().unwrap();
        let last = s.len() - 1;
        assert!(s.abscissa[last] > 34e9);
        assert!((s.mean[last] - 1.0).abs() < 1e-3);
        let far: Vec<f64> = traces.iter().map(|tr| tr[last]).collect();
        assert!(far.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn scan_is_deterministic_and_thread_independent() {
        let (c, t, e) = nominal_ensemble();
        let cfg = ScanConfig {
            span: 40e9,
            bin_width: None,
            step: Some(1e9),
            seed: 5,
            sfs_enabled: true,
            n_traces: 16,
        };
        let a = scan_spectrum(&c, &t, &e, &cfg).unwrap();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = one.install(|| scan_spectrum(&c, &t, &e, &cfg).unwrap());
        assert_eq!(a.to_csv(), b.to_csv());
        let other = scan_spectrum(&c, &t, &e, &ScanConfig { seed: 6, ..cfg }).unwrap();
        assert_ne!(a.traces, other.traces);
    }

    #[test]
    fn scan_config_validation() {
        let bad = ScanConfig {
            span: 1.0,
            bin_width: Some(10.0),
            step: None,
            seed: 0,
            sfs_enabled: false,
            n_traces: 0,
        };
        assert!(bad.validate(1.0).is_err());
        let no_traces = ScanConfig {
            span: 100.0,
            bin_width: Some(10.0),
            step: None,
            seed: 0,
            sfs_enabled: true,
            n_traces: 0,
        };
        assert!(no_traces.validate(1.0).is_err());
        let ok = ScanConfig {
            n_traces: 1,
            ..no_traces
        };
        assert_eq!(ok.detunings(1.0).len(), 11);
    }

    #[test]
    fn poisson_sampling_statistics() {
        for &mean in &[10.0, 53.0] {
            let p = Poisson::new(mean).unwrap();
            let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(99);
            let draws: Vec<f64> = (0..100_000).map(|_| p.sample(&mut r)).collect();
            let m = draws.iter().sum::<f64>() / draws.len() as f64;
            let v = draws.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
            assert!((m / mean - 1.0).abs() < 0.02);
            assert!((v / mean - 1.0).abs() < 0.02);
        }
    }

    /// Trapezoid integration of the density–Lorentzian overlap on a fine
    /// grid, independent of the Gauss–Hermite route.
    fn overlap_brute_force(e: &EnsembleSpec, detuning: f64, kappa_fwhm: f64) -> f64 {
        let sigma = e.sigma();
        let (lo, hi) = (
            e.center_detuning - 12.0 * sigma,
            e.center_detuning + 12.0 * sigma,
        );
        let n = 200_000;
        let h = (hi - lo) / n as f64;
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..=n {
            let nu = lo + i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            let dens = gaussian_density(nu, e);
            num += w * dens / (1.0 + (2.0 * (nu - detuning) / kappa_fwhm).powi(2));
            den += w * dens / e.n_peak;
        }
        num / den
    }

    #[test]
    fn tuning_dip_examples() {
        let (c, t, e) = nominal_ensemble();
        let lams: Vec<f64> = (-20..=20).map(|i| 883e-9 + i as f64 * 0.05e-9).collect();
        let s = tuning_dip_spectrum(&c, &lams, &t, &e).unwrap();
        let (imin, _) =
            s.mean
                .iter()
                .enumerate()
                .fold((0, f64::MAX), |a, (i, &v)| if v < a.1 { (i, v) } else { a });
        assert_eq!(lams[imin], 883e-9);
        let far = tuning_dip_spectrum(&c, &[898e-9], &t, &e).unwrap();
        assert!(1.0 - far.mean[0] < 0.01, "{}", far.mean[0]);

        for &lc in &[883e-9, 883.1e-9, 882.7e-9] {
            let tuned = c.with_lambda_cav(lc).unwrap();
            let kfwhm = to_ordinary(tuned.kappa());
            let det = frequency_of(lc) - frequency_of(883e-9);
            let brute = overlap_brute_force(&e, det, kfwhm);
            let quad = effective_density(&e, det, kfwhm);
            assert!(((quad - brute) / brute).abs() < 1e-6, "{quad} vs {brute}");
            let eta = cooperativity(brute, t.g_peak, tuned.kappa(), t.gamma_h).unwrap();
            let dip = tuning_dip_spectrum(&c, &[lc], &t, &e).unwrap().mean[0];
            assert!(((1.0 - dip) - (1.0 - (1.0 + eta).powi(-2))).abs() < 1e-6);
        }
    }

    proptest! {
        #[test]
        fn zero_detuning_identity(
            n in 0.0f64..1e3,
            g in 1e5f64..1e9,
            kappa in 1e8f64..1e13,
            gh in 1e2f64..1e7,
        ) {
            let eta = cooperativity(n, g, kappa, gh).unwrap();
            let t = transmission(0.0, kappa, n, g, gh);
            let id = (1.0 + eta).powi(-2);
            prop_assert!(((t - id) / id).abs() < 1e-12);
        }

        #[test]
        fn transmission_even_bounded_monotone(
            n in 0.0f64..1e3,
            dn in 1e-3f64..10.0,
            delta in -1e13f64..1e13,
            g in 1e5f64..1e9,
            kappa in 1e8f64..1e13,
            gh in 1e2f64..1e7,
        ) {
            let t = transmission(delta, kappa, n, g, gh);
            prop_assert!(t > 0.0 && t <= 1.0);
            prop_assert_eq!(t, transmission(-delta, kappa, n, g, gh));
            prop_assert!(transmission(0.0, kappa, n + dn, g, gh) < transmission(0.0, kappa, n, g, gh));
        }
    }
}
