// SPDX-License-Identifier: Apache-2.0

//! Small numeric helpers shared across modules.

use nalgebra::{DMatrix, SymmetricEigen};

/// Pairwise (cascade) summation. The result depends only on the order of
/// `values`, so parallel producers that collect in index order reduce
/// deterministically.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// `count` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            // blended form: exact endpoints, and an exact zero at the
            // midpoint of a symmetric range
            let last = (count - 1) as f64;
            (0..count)
                .map(|i| {
                    let t = i as f64 / last;
                    start * (1.0 - t) + stop * t
                })
                .collect()
        }
    }
}

/// `count` logarithmically spaced points from `start` to `stop` inclusive.
pub fn logspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    linspace(start.ln(), stop.ln(), count)
        .into_iter()
        .map(f64::exp)
        .collect()
}

/// Linear interpolation of the abscissa where `ys` first crosses `level`,
/// scanning from index `from` in direction `step` (+1 or −1).
pub(crate) fn crossing(
    xs: &[f64],
    ys: &[f64],
    level: f64,
    from: usize,
    forward: bool,
) -> Option<f64> {
    let n = xs.len();
    let mut i = from;
    loop {
        let j = if forward {
            if i + 1 >= n {
                return None;
            }
            i + 1
        } else {
            if i == 0 {
                return None;
            }
            i - 1
        };
        let (a, b) = (ys[i] - level, ys[j] - level);
        if a == 0.0 {
            return Some(xs[i]);
        }
        if a * b <= 0.0 {
            return Some(xs[i] + (xs[j] - xs[i]) * a / (a - b));
        }
        i = j;
    }
}

/// Gauss–Hermite rule for the standard normal density: returns `(nodes,
/// weights)` with `Σ wᵢ f(xᵢ) ≈ E[f(X)]`, X ~ N(0, 1). Golub–Welsch on the
/// probabilists' Hermite Jacobi matrix; nodes ascending, weights sum to 1.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_hermite needs at least one node");
    if n == 1 {
        return (vec![0.0], vec![1.0]);
    }
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // symmetrize to remove eigen-solver round-off
    for k in 0..n / 2 {
        let (a, b) = (pairs[k], pairs[n - 1 - k]);
        let x = 0.5 * (b.0 - a.0);
        let w = 0.5 * (a.1 + b.1);
        pairs[k] = (-x, w);
        pairs[n - 1 - k] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    pairs.into_iter().map(|(x, w)| (x, w / total)).unzip()
}
