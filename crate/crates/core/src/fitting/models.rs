// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};

use super::lm::{minimize, standard_errors, Outcome};
use super::{FitFlag, FitResult};
use crate::error::{invalid, Error, Result};
use crate::model::{CavityParams, TransitionParams};
use crate::numeric::crossing;
use crate::spectrum::Spectrum;
use crate::transmission::cooperativity;

const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;
const FOUR_LN2: f64 = 4.0 * LN_2;

fn check_data(x: &[f64], y: &[f64], min_points: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(invalid("data", "x and y lengths differ"));
    }
    if x.len() < min_points {
        return Err(invalid(
            "data",
            format!("need at least {min_points} points, got {}", x.len()),
        ));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(invalid("data", "non-finite value"));
    }
    let (lo, hi) = min_max(x);
    if !(hi > lo) {
        return Err(Error::Degenerate("no spread in the abscissa".into()));
    }
    Ok(())
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        })
}

fn is_constant(y: &[f64]) -> bool {
    let (lo, hi) = min_max(y);
    hi - lo <= 1e-12 * lo.abs().max(hi.abs())
}

/// Model callback: parameters and abscissa → (value, gradient).
fn residuals<M>(x: &[f64], y: &[f64], model: M) -> impl Fn(&[f64]) -> (DVector<f64>, DMatrix<f64>)
where
    M: Fn(&[f64], f64) -> (f64, Vec<f64>),
{
    let x = x.to_vec();
    let y = y.to_vec();
    move |p: &[f64]| {
        let mut r = DVector::zeros(x.len());
        let mut j = DMatrix::zeros(x.len(), p.len());
        for (i, (&xi, &yi)) in x.iter().zip(&y).enumerate() {
            let (f, grad) = model(p, xi);
            r[i] = f - yi;
            for (k, g) in grad.into_iter().enumerate() {
                j[(i, k)] = g;
            }
        }
        (r, j)
    }
}

fn finish(
    model: &'static str,
    names: Vec<&'static str>,
    out: Outcome,
    y: &[f64],
    derived: Vec<(&'static str, f64)>,
    flags: Vec<FitFlag>,
) -> FitResult {
    let sigmas = standard_errors(&out.jacobian, out.ssr);
    let norm_y = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    FitResult {
        model,
        names,
        params: out.params,
        sigmas,
        derived,
        residual_norm: if norm_y > 0.0 {
            out.ssr.sqrt() / norm_y
        } else {
            out.ssr.sqrt()
        },
        converged: out.converged,
        n_iter: out.n_iter,
        flags,
    }
}

/// Straight-line least squares of ln y on t over the positive samples,
/// returning (A, τ) for y = A·e^{−t/τ}.
fn log_linear(t: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(y)
        .filter(|(_, &y)| y > 0.0)
        .map(|(&t, &y)| (t, y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let slope = sxy / sxx;
    (slope < 0.0 && slope.is_finite()).then(|| ((my - slope * mt).exp(), -1.0 / slope))
}

fn exp_model(p: &[f64], t: f64) -> (f64, Vec<f64>) {
    let e = (-t / p[1]).exp();
    (p[0] * e, vec![e, p[0] * e * t / (p[1] * p[1])])
}

/// y = A·exp(−t/τ). Initialized by log-linear regression.
pub fn fit_exponential(t: &[f64], y: &[f64]) -> Result<FitResult> {
    check_data(t, y, 4)?;
    if is_constant(y) {
        return Err(Error::Degenerate("constant data carry no decay".into()));
    }
    let (t_lo, t_hi) = min_max(t);
    let start = log_linear(t, y).unwrap_or((y[0], 10.0 * (t_hi - t_lo)));
    let out = minimize(residuals(t, y, exp_model), &[start.0, start.1], |p| {
        p[1] > 0.0
    });
    Ok(finish(
        "exponential",
        vec!["A", "tau"],
        out,
        y,
        vec![],
        vec![],
    ))
}

fn biexp_model(p: &[f64], t: f64) -> (f64, Vec<f64>) {
    let (f1, g1) = exp_model(&p[..2], t);
    let (f2, g2) = exp_model(&p[2..], t);
    (f1 + f2, vec![g1[0], g1[1], g2[0], g2[1]])
}

/// y = A1·exp(−t/τ1) + A2·exp(−t/τ2) with τ1 ≤ τ2. Several starts (tail
/// peeling plus fixed τ ratios around a single-exponential fit); the best
/// is kept.
pub fn fit_biexponential(t: &[f64], y: &[f64]) -> Result<FitResult> {
    check_data(t, y, 8)?;
    if is_constant(y) {
        return Err(Error::Degenerate("constant data carry no decay".into()));
    }
    let single = fit_exponential(t, y)?;
    let (a, tau) = (single.params[0], single.params[1]);
    let mut starts: Vec<[f64; 4]> = [0.05, 0.1, 0.2, 0.35, 0.5]
        .iter()
        .map(|&r| [0.5 * a, r * tau, 0.5 * a, tau * (1.0 + r)])
        .collect();
    let mut order: Vec<usize> = (0..t.len()).collect();
    order.sort_by(|&i, &j| t[i].total_cmp(&t[j]));
    let (ts, ys): (Vec<f64>, Vec<f64>) = order.iter().map(|&i| (t[i], y[i])).unzip();
    let half = ts.len() / 2;
    if let Some((a2, tau2)) = log_linear(&ts[half..], &ys[half..]) {
        let early: Vec<f64> = ts[..half]
            .iter()
            .zip(&ys[..half])
            .map(|(t, y)| y - a2 * (-t / tau2).exp())
            .collect();
        if let Some((a1, tau1)) = log_linear(&ts[..half], &early) {
            starts.push([a1, tau1, a2, tau2]);
        }
    }
    let eval = residuals(t, y, biexp_model);
    let best = starts
        .iter()
        .map(|s| minimize(&eval, s, |p| p[1] > 0.0 && p[3] > 0.0))
        .min_by(|a, b| a.ssr.total_cmp(&b.ssr))
        .expect("at least one start");
    let mut out = best;
    if out.params[1] > out.params[3] {
        out.params.swap(0, 2);
        out.params.swap(1, 3);
        let j = &mut out.jacobian;
        j.swap_columns(0, 2);
        j.swap_columns(1, 3);
    }
    let p = &out.params;
    let mut flags = Vec::new();
    if p[0].abs().min(p[2].abs()) < 1e-3 * (p[0].abs() + p[2].abs()) {
        flags.push(FitFlag::Tau2Unidentifiable);
    }
    if (p[3] - p[1]).abs() <= 1e-3 * p[3] {
        flags.push(FitFlag::EqualTau);
    }
    Ok(finish(
        "biexponential",
        vec!["A1", "tau1", "A2", "tau2"],
        out,
        y,
        vec![],
        flags,
    ))
}

fn edge_baseline(y: &[f64]) -> f64 {
    let k = (y.len() / 10).max(1);
    let edges: Vec<f64> = y[..k].iter().chain(&y[y.len() - k..]).copied().collect();
    edges.iter().sum::<f64>() / edges.len() as f64
}

fn sorted_by_x(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    order.iter().map(|&i| (x[i], y[i])).unzip()
}

fn lorentz_model(p: &[f64], f: f64) -> (f64, Vec<f64>) {
    let (c, w, h, b) = (p[0], p[1], p[2], p[3]);
    let u = 2.0 * (f - c) / w;
    let l = 1.0 / (1.0 + u * u);
    (
        b + h * l,
        vec![h * 4.0 * u * l * l / w, h * 2.0 * u * u * l * l / w, l, 1.0],
    )
}

/// y = baseline + h/(1 + (2(f − center)/fwhm)²); h < 0 for a dip. Reports
/// Q = center/fwhm.
pub fn fit_lorentzian(freq: &[f64], y: &[f64]) -> Result<FitResult> {
    check_data(freq, y, 5)?;
    if is_constant(y) {
        return Err(Error::Degenerate("flat data have no line".into()));
    }
    let (xs, ys) = sorted_by_x(freq, y);
    let b = edge_baseline(&ys);
    let ext = (0..ys.len()).fold(0, |k, i| {
        if (ys[i] - b).abs() > (ys[k] - b).abs() {
            i
        } else {
            k
        }
    });
    let h = ys[ext] - b;
    let level = b + 0.5 * h;
    let fwhm = match (
        crossing(&xs, &ys, level, ext, false),
        crossing(&xs, &ys, level, ext, true),
    ) {
        (Some(l), Some(r)) if r > l => r - l,
        _ => 0.25 * (xs[xs.len() - 1] - xs[0]),
    };
    let out = minimize(
        residuals(&xs, &ys, lorentz_model),
        &[xs[ext], fwhm, h, b],
        |p| p[1] > 0.0,
    );
    let q = out.params[0] / out.params[1];
    Ok(finish(
        "lorentzian",
        vec!["center", "fwhm", "depth_or_height", "baseline"],
        out,
        &ys,
        vec![("Q", q)],
        vec![],
    ))
}

fn gauss_model(p: &[f64], f: f64) -> (f64, Vec<f64>) {
    let (c, w, a) = (p[0], p[1], p[2]);
    let d = f - c;
    let e = (-FOUR_LN2 * d * d / (w * w)).exp();
    let k = 2.0 * FOUR_LN2 * a * e;
    (a * e, vec![k * d / (w * w), k * d * d / (w * w * w), e])
}

fn median_spacing(xs: &[f64]) -> f64 {
    let mut d: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    d.sort_by(f64::total_cmp);
    d[d.len() / 2]
}

/// y = amplitude·exp(−4 ln2 (f − center)²/fwhm²), moment-initialized.
/// Lines covering fewer than three samples above half maximum, or with a
/// fitted FWHM below two sample spacings, are flagged under-resolved.
pub fn fit_gaussian(freq: &[f64], y: &[f64]) -> Result<FitResult> {
    check_data(freq, y, 5)?;
    if is_constant(y) {
        return Err(Error::Degenerate("flat data have no line".into()));
    }
    let (xs, ys) = sorted_by_x(freq, y);
    let w: Vec<f64> = ys.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Degenerate("no positive signal".into()));
    }
    let center = xs.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / total;
    let var = xs
        .iter()
        .zip(&w)
        .map(|(x, w)| w * (x - center).powi(2))
        .sum::<f64>()
        / total;
    let amp = ys.iter().cloned().fold(f64::MIN, f64::max);
    let spacing = median_spacing(&xs);
    let above = ys.iter().filter(|&&v| v > 0.5 * amp).count();
    let names = vec!["center", "fwhm", "amplitude"];
    if above < 3 {
        let n = names.len();
        return Ok(FitResult {
            model: "gaussian",
            names,
            params: vec![center, FWHM_PER_SIGMA * var.sqrt(), amp],
            sigmas: vec![f64::INFINITY; n],
            derived: vec![],
            residual_norm: f64::NAN,
            converged: false,
            n_iter: 0,
            flags: vec![FitFlag::UnderResolved],
        });
    }
    let start = [center, FWHM_PER_SIGMA * var.sqrt().max(spacing), amp];
    let out = minimize(residuals(&xs, &ys, gauss_model), &start, |p| p[1] > 0.0);
    let flags = if out.params[1] < 2.0 * spacing {
        vec![FitFlag::UnderResolved]
    } else {
        vec![]
    };
    Ok(finish("gaussian", names, out, &ys, vec![], flags))
}

/// Ordinary least squares y = slope·x + intercept, closed form.
pub fn fit_linear(x: &[f64], y: &[f64]) -> Result<FitResult> {
    check_data(x, y, 2)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum();
    let s2 = if x.len() > 2 { ssr / (n - 2.0) } else { 0.0 };
    let norm_y = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(FitResult {
        model: "linear",
        names: vec!["slope", "intercept"],
        params: vec![slope, intercept],
        sigmas: vec![(s2 / sxx).sqrt(), (s2 * (1.0 / n + mx * mx / sxx)).sqrt()],
        derived: vec![],
        residual_norm: if norm_y > 0.0 {
            ssr.sqrt() / norm_y
        } else {
            ssr.sqrt()
        },
        converged: true,
        n_iter: 0,
        flags: vec![],
    })
}

/// Per-ion cooperativity used to turn a dip depth into an ion density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipModel {
    pub eta_per_ion: f64,
}

impl DipModel {
    pub fn new(cavity: &CavityParams, transition: &TransitionParams) -> Result<Self> {
        Ok(Self {
            eta_per_ion: cooperativity(1.0, transition.g_peak, cavity.kappa(), transition.gamma_h)?,
        })
    }
}

/// Fits T(Δ) = (1 + η₁·N(Δ))⁻² with N(Δ) = n_peak·exp(−4 ln2 (Δ − center)²/Γ²)
/// to the mean curve of a scan. Reports η = η₁·n_peak at line center.
pub fn fit_dit_dip(spectrum: &Spectrum, model: DipModel) -> Result<FitResult> {
    let (x, y) = (&spectrum.abscissa, &spectrum.mean);
    check_data(x, y, 5)?;
    if !(model.eta_per_ion > 0.0) {
        return Err(invalid("eta_per_ion", "must be > 0"));
    }
    let names = vec!["n_peak", "gamma_inhom", "center"];
    if y.iter().all(|&v| v >= 1.0 - 1e-9) {
        return Ok(FitResult {
            model: "dit_dip",
            names,
            params: vec![0.0, 0.0, 0.0],
            sigmas: vec![0.0, f64::INFINITY, f64::INFINITY],
            derived: vec![("eta", 0.0)],
            residual_norm: 0.0,
            converged: true,
            n_iter: 0,
            flags: vec![FitFlag::NoSignal],
        });
    }
    let a = model.eta_per_ion;
    let eta: Vec<f64> = y
        .iter()
        .map(|v| (v.max(1e-12).powf(-0.5) - 1.0).max(0.0))
        .collect();
    let total: f64 = eta.iter().sum();
    let center = x.iter().zip(&eta).map(|(x, e)| x * e).sum::<f64>() / total;
    let var = x
        .iter()
        .zip(&eta)
        .map(|(x, e)| e * (x - center).powi(2))
        .sum::<f64>()
        / total;
    let eta_max = eta.iter().cloned().fold(0.0, f64::max);
    let start = [eta_max / a, FWHM_PER_SIGMA * var.sqrt(), center];
    let dip = move |p: &[f64], d: f64| {
        let (n, g, c) = (p[0], p[1], p[2]);
        let u = d - c;
        let gauss = (-FOUR_LN2 * u * u / (g * g)).exp();
        let base = 1.0 + a * n * gauss;
        let t = base.powi(-2);
        let k = -2.0 * t / base * a * gauss;
        let shape = 2.0 * FOUR_LN2 * n;
        (
            t,
            vec![k, k * shape * u * u / (g * g * g), k * shape * u / (g * g)],
        )
    };
    let out = minimize(residuals(x, y, dip), &start, |p| p[0] >= 0.0 && p[1] > 0.0);
    let eta_c = a * out.params[0];
    Ok(finish(
        "dit_dip",
        names,
        out,
        y,
        vec![("eta", eta_c)],
        vec![],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::linspace;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn rel(a: f64, b: f64) -> f64 {
        (a / b - 1.0).abs()
    }

    #[test]
    fn exponential_round_trip_and_errors() {
        let t = linspace(0.0, 400e-6, 40);
        let y: Vec<f64> = t.iter().map(|t| (-t / 87e-6).exp()).collect();
        let r = fit_exponential(&t, &y).unwrap();
        assert!(r.converged);
        assert!(rel(r.get("tau").unwrap(), 87e-6) < 1e-6);
        assert!(matches!(
            fit_exponential(&t, &vec![0.3; 40]),
            Err(Error::Degenerate(_))
        ));
        assert!(fit_exponential(&t[..3], &y[..3]).is_err());
    }

    #[test]
    fn exponential_noise_calibration() {
        // τ within 3σ of truth in at least 95% of seeded noisy trials
        let t = linspace(0.0, 300e-6, 50);
        let truth = 87e-6;
        let noise = Normal::new(0.0, 0.01).unwrap();
        let trials = 1000;
        let mut inside = 0;
        for seed in 0..trials {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let y: Vec<f64> = t
                .iter()
                .map(|t| (-t / truth).exp() + noise.sample(&mut rng))
                .collect();
            let r = fit_exponential(&t, &y).unwrap();
            if (r.get("tau").unwrap() - truth).abs() <= 3.0 * r.sigma("tau").unwrap() {
                inside += 1;
            }
        }
        assert!(inside as f64 >= 0.95 * trials as f64, "{inside}");
    }

    #[test]
    fn sigma_shrinks_with_sample_count() {
        let noise = Normal::new(0.0, 0.01).unwrap();
        let mean_sigma = |n: usize| {
            let t = linspace(0.0, 300e-6, n);
            (0..200)
                .map(|seed| {
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                    let y: Vec<f64> = t
                        .iter()
                        .map(|t| (-t / 87e-6).exp() + noise.sample(&mut rng))
                        .collect();
                    fit_exponential(&t, &y).unwrap().sigma("tau").unwrap()
                })
                .sum::<f64>()
                / 200.0
        };
        let ratio = mean_sigma(50) / mean_sigma(200);
        assert!((ratio - 2.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn biexponential_round_trip() {
        let t = linspace(0.0, 100e-6, 60);
        let y: Vec<f64> = t
            .iter()
            .map(|t| 0.4 * (-t / 5e-6).exp() + 0.6 * (-t / 25e-6).exp())
            .collect();
        let r = fit_biexponential(&t, &y).unwrap();
        assert!(rel(r.get("tau1").unwrap(), 5e-6) < 1e-6, "{}", r.report());
        assert!(rel(r.get("tau2").unwrap(), 25e-6) < 1e-6);
        assert!(rel(r.get("A1").unwrap(), 0.4) < 1e-6);
        assert!(r.flags.is_empty());
    }

    #[test]
    fn biexponential_flags_missing_component() {
        let t = linspace(0.0, 100e-6, 60);
        let y: Vec<f64> = t.iter().map(|t| (-t / 25e-6).exp()).collect();
        let r = fit_biexponential(&t, &y).unwrap();
        assert!(
            r.has_flag(FitFlag::Tau2Unidentifiable) || r.has_flag(FitFlag::EqualTau),
            "{}",
            r.report()
        );
    }

    #[test]
    fn lorentzian_quality_factor() {
        let nu0 = 3.3951e14;
        let fwhm = nu0 / 4400.0;
        let f = linspace(nu0 - 5.0 * fwhm, nu0 + 5.0 * fwhm, 201);
        let y: Vec<f64> = f
            .iter()
            .map(|f| 0.1 + 0.9 / (1.0 + (2.0 * (f - nu0) / fwhm).powi(2)))
            .collect();
        let r = fit_lorentzian(&f, &y).unwrap();
        assert!(rel(r.get("Q").unwrap(), 4400.0) < 1e-6, "{}", r.report());
        // symmetric dip: center at the symmetry point
        let x = linspace(-3.0, 3.0, 61);
        let d: Vec<f64> = x
            .iter()
            .map(|x| 1.0 - 0.5 / (1.0 + (x / 0.4).powi(2)))
            .collect();
        let r = fit_lorentzian(&x, &d).unwrap();
        assert!(r.get("center").unwrap().abs() < 1e-9);
        assert!((r.get("depth_or_height").unwrap() + 0.5).abs() < 1e-9);
    }

    #[test]
    fn gaussian_linewidths() {
        for &fwhm in &[16.0e9, 5.9e9] {
            let f = linspace(-4.0 * fwhm, 4.0 * fwhm, 161);
            let y: Vec<f64> = f
                .iter()
                .map(|f| 3.0 * (-FOUR_LN2 * (f - 1e8) * (f - 1e8) / (fwhm * fwhm)).exp())
                .collect();
            let r = fit_gaussian(&f, &y).unwrap();
            assert!(rel(r.get("fwhm").unwrap(), fwhm) < 1e-6);
            assert!(r.flags.is_empty());
        }
        let f = linspace(-10.0, 10.0, 21);
        let spike: Vec<f64> = f
            .iter()
            .map(|&f| if f == 0.0 { 1.0 } else { 0.0 })
            .collect();
        assert!(fit_gaussian(&f, &spike)
            .unwrap()
            .has_flag(FitFlag::UnderResolved));
    }

    #[test]
    fn linear_examples() {
        let x = linspace(0.0, 10e-6, 11);
        let y: Vec<f64> = x.iter().map(|x| 100e3 + 6.1e9 * x).collect();
        let r = fit_linear(&x, &y).unwrap();
        assert!(rel(r.get("slope").unwrap(), 6.1e9) < 1e-9);
        assert!(rel(r.get("intercept").unwrap(), 100e3) < 1e-9);
        let flat = fit_linear(&x, &[2.0; 11]).unwrap();
        assert_eq!(flat.get("slope").unwrap(), 0.0);
        assert!(fit_linear(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn dit_dip_round_trip_and_flat() {
        let a = 0.018_66;
        let x = linspace(-40e9, 40e9, 161);
        let y: Vec<f64> = x
            .iter()
            .map(|d| (1.0 + a * 53.0 * (-FOUR_LN2 * d * d / (16e9 * 16e9)).exp()).powi(-2))
            .collect();
        let s = Spectrum::transmission(x.clone(), y);
        let r = fit_dit_dip(&s, DipModel { eta_per_ion: a }).unwrap();
        assert!(rel(r.get("n_peak").unwrap(), 53.0) < 1e-6, "{}", r.report());
        assert!(rel(r.get("gamma_inhom").unwrap(), 16e9) < 1e-6);
        let flat = Spectrum::transmission(x.clone(), vec![1.0; x.len()]);
        assert_eq!(
            fit_dit_dip(&flat, DipModel { eta_per_ion: a })
                .unwrap()
                .get("eta"),
            Some(0.0)
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn scaling_invariance(scale in 1e-3f64..1e3, tau in 5e-6f64..200e-6) {
            let t = linspace(0.0, 300e-6, 30);
            let y: Vec<f64> = t.iter().map(|t| 2.0 * (-t / tau).exp()).collect();
            let ys: Vec<f64> = y.iter().map(|v| v * scale).collect();
            let a = fit_exponential(&t, &y).unwrap();
            let b = fit_exponential(&t, &ys).unwrap();
            prop_assert!(rel(b.get("tau").unwrap(), a.get("tau").unwrap()) < 1e-9);
            prop_assert!(rel(b.get("A").unwrap(), scale * a.get("A").unwrap()) < 1e-9);
        }

        #[test]
        fn biexponential_recovery(
            t1 in 2e-6f64..10e-6,
            ratio in 2.5f64..10.0,
            w in 0.2f64..0.8,
        ) {
            let t2 = t1 * ratio;
            let t = linspace(0.0, 6.0 * t2, 80);
            let y: Vec<f64> = t.iter().map(|t| w * (-t / t1).exp() + (1.0 - w) * (-t / t2).exp()).collect();
            let r = fit_biexponential(&t, &y).unwrap();
            prop_assert!(rel(r.get("tau1").unwrap(), t1) < 5e-3);
            prop_assert!(rel(r.get("tau2").unwrap(), t2) < 5e-3);
        }

        #[test]
        fn lorentzian_round_trip(c in -1.0f64..1.0, w in 0.2f64..2.0, h in -0.9f64..-0.1) {
            let x = linspace(-10.0, 10.0, 201);
            let y: Vec<f64> = x.iter().map(|x| 1.0 + h / (1.0 + (2.0 * (x - c) / w).powi(2))).collect();
            let r = fit_lorentzian(&x, &y).unwrap();
            prop_assert!((r.get("center").unwrap() - c).abs() < 5e-3 * w);
            prop_assert!(rel(r.get("fwhm").unwrap(), w) < 5e-3);
        }
    }
}
