use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{e, unit_root};
use crate::arith::gcd;
use crate::error::{Error, Result};
use crate::voronoi::CoefficientProvider;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MillerScanConfig {
    pub x_min: u64,
    pub x_max: u64,
    pub grid_points: usize,
    pub alpha_samples: usize,
    /// Rational points `a/q` with `q` up to this bound are scanned but kept out of the fit.
    pub max_rational_denominator: u64,
    pub seed: u64,
}

impl Default for MillerScanConfig {
    fn default() -> Self {
        MillerScanConfig {
            x_min: 1_000,
            x_max: 1_000_000,
            grid_points: 13,
            alpha_samples: 64,
            max_rational_denominator: 10,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MillerReport {
    pub provider: String,
    pub x_grid: Vec<u64>,
    pub alphas: Vec<f64>,
    /// `max_alpha |sum_{n <= X} lambda(1,n) e(alpha n)|` over the random samples, per grid point.
    pub max_random: Vec<f64>,
    /// The same maximum over the rational points with small denominator.
    pub max_rational: Vec<f64>,
    /// Partial sums at `alpha = 0`.
    pub alpha_zero: Vec<f64>,
    /// Least-squares slope of `log max_random` against `log X`.
    pub fitted_exponent: f64,
    /// Slope of the rational-point maxima, reported for comparison.
    pub rational_exponent: f64,
}

/// Least-squares slope of `ys` against `xs`.
pub(crate) fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn log_grid(x_min: u64, x_max: u64, points: usize) -> Vec<u64> {
    let (a, b) = ((x_min as f64).ln(), (x_max as f64).ln());
    let mut grid: Vec<u64> = (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1).max(1) as f64).exp().round() as u64)
        .collect();
    grid.dedup();
    grid
}

fn partial_sums_at<F: Fn(u64) -> Complex64>(coeffs: &[f64], grid: &[u64], twist: F) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = Complex64::new(0.0, 0.0);
    let mut next = 0;
    for n in 1..coeffs.len() as u64 {
        acc += twist(n) * coeffs[n as usize];
        while next < grid.len() && grid[next] == n {
            out.push(acc.norm());
            next += 1;
        }
    }
    out
}

/// Scans `sum_{n <= X} lambda(1,n) e(alpha n)` over random and small-denominator `alpha`.
pub fn miller_scan(config: &MillerScanConfig, provider: &dyn CoefficientProvider) -> Result<MillerReport> {
    if config.x_min < 2 || config.x_max <= config.x_min || config.grid_points < 2 {
        return Err(Error::domain(
            "Miller scan needs 2 <= x_min < x_max and at least two grid points",
        ));
    }
    let coeffs = provider.lambda_table(config.x_max as usize);
    let grid = log_grid(config.x_min, config.x_max, config.grid_points);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let alphas: Vec<f64> = (0..config.alpha_samples).map(|_| rng.gen::<f64>()).collect();

    let random: Vec<Vec<f64>> = alphas
        .par_iter()
        .map(|&alpha| partial_sums_at(&coeffs, &grid, |n| e(alpha * n as f64)))
        .collect();
    let rationals: Vec<(u64, u64)> = (1..=config.max_rational_denominator)
        .flat_map(|q| (1..q).filter(move |&a| gcd(a, q) == 1).map(move |a| (a, q)))
        .collect();
    let rational: Vec<Vec<f64>> = rationals
        .par_iter()
        .map(|&(a, q)| partial_sums_at(&coeffs, &grid, |n| unit_root(a * n % q, q)))
        .collect();
    let alpha_zero = partial_sums_at(&coeffs, &grid, |_| Complex64::new(1.0, 0.0));

    let column_max = |rows: &[Vec<f64>]| -> Vec<f64> {
        (0..grid.len())
            .map(|i| rows.iter().map(|r| r[i]).fold(0.0, f64::max))
            .collect()
    };
    let max_random = column_max(&random);
    let max_rational = column_max(&rational);
    let logx: Vec<f64> = grid.iter().map(|&x| (x as f64).ln()).collect();
    let fit = |ys: &[f64]| slope(&logx, &ys.iter().map(|y| y.max(1e-300).ln()).collect::<Vec<_>>());
    Ok(MillerReport {
        provider: provider.name().to_string(),
        fitted_exponent: fit(&max_random),
        rational_exponent: fit(&max_rational),
        x_grid: grid,
        alphas,
        max_random,
        max_rational,
        alpha_zero,
    })
}
