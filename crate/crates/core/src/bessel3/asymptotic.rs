use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{bessel_kernel, tolerance_for_digits, KernelValue, Sign, SpectralParams};
use crate::error::{Error, Result};
use crate::expsums::e;
use crate::quad::integrate_panels;
use crate::special::ln_gamma;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Writing `G_d(w) = (2 pi)^{-w} Gamma(w) sum_{eps = +-1} c_d(eps) e^{i pi eps w / 2}` with
/// `c_0 = 1`, `c_1(eps) = eps`, the kernel `J(+-u^3)` splits over sign patterns `eps` in
/// `{+-1}^3` by `k = eps_1 + eps_2 + eps_3`. The pattern `k = +-3` is oscillatory of size `1/u`;
/// the patterns `|k| = 1` are exponentially small. This returns the total coefficient of the
/// exponentially small patterns and their common `k`.
fn exponential_patterns(sign: Sign, params: &SpectralParams) -> (Complex64, i32) {
    let mut total = Complex64::new(0.0, 0.0);
    let (want_k, want_product) = match sign {
        Sign::Plus => (-1, 1),
        Sign::Minus => (1, -1),
    };
    for mask in 0..8u32 {
        let eps: [i32; 3] = std::array::from_fn(|j| if mask >> j & 1 == 1 { -1 } else { 1 });
        let k: i32 = eps.iter().sum();
        let product: i32 = eps.iter().product();
        if k != want_k || product != want_product {
            continue;
        }
        let mut coeff = Complex64::new(1.0, 0.0);
        for j in 0..3 {
            if params.delta[j] == 1 {
                coeff *= eps[j] as f64;
            }
            coeff *= (Complex64::new(0.0, PI * eps[j] as f64 / 2.0) * params.alpha[j]).exp();
        }
        total += coeff;
    }
    (total, want_k)
}

/// `(1/2 pi i) int (2 pi)^{-3s} prod Gamma(s + alpha_j) e^{i pi k s / 2} u^{-3s} ds` for `|k| = 1`,
/// on the vertical line through the saddle `2 pi u e^{-i pi k / 6}`, where the integrand has a
/// Gaussian profile and no cancellation occurs.
fn pattern_integral(u: f64, k: i32, params: &SpectralParams, relative_tol: f64) -> Result<KernelValue> {
    let ln_x = 3.0 * u.ln();
    let saddle = Complex64::from_polar(2.0 * PI * u, -PI * k as f64 / 6.0);
    let sigma = saddle.re.max(params.default_abscissa());
    let f = |tau: f64| {
        let s = Complex64::new(sigma, tau);
        let mut log = -3.0 * s * LN_2PI + Complex64::new(0.0, PI * k as f64 / 2.0) * s - s * ln_x;
        for a in params.alpha {
            log += ln_gamma(s + a);
        }
        log.exp()
    };
    let center = saddle.im;
    let peak = f(center).norm().max(1e-300);
    // rounding noise of the integrand is proportional to its L1 norm
    let mut mass = peak;
    let mut ends = [center, center];
    let mut tails = [0.0; 2];
    for (side, dir) in [-1.0f64, 1.0].iter().enumerate() {
        let mut previous = peak;
        for step in 1..100_000 {
            let tau = center + dir * step as f64;
            let v = f(tau).norm();
            mass += v;
            if v < 1e-17 * peak && v < 0.5 * previous {
                ends[side] = tau;
                tails[side] = 2.0 * v;
                break;
            }
            previous = v;
        }
        if tails[side] == 0.0 && ends[side] == center {
            return Err(Error::resource("exponential pattern integrand does not decay", None));
        }
    }
    let panels = ((ends[1] - ends[0]) / 0.5).ceil() as usize;
    let breaks: Vec<f64> = (0..=panels)
        .map(|i| ends[0] + (ends[1] - ends[0]) * i as f64 / panels as f64)
        .collect();
    let q = integrate_panels(&f, &breaks, relative_tol * mass, 100_000)?;
    Ok(KernelValue {
        value: q.value / (2.0 * PI),
        truncation_error: (tails[0] + tails[1]) / (2.0 * PI),
        quadrature_error: q.error / (2.0 * PI),
    })
}

/// The exponentially small part `E(+-u^3)` of the kernel at `x = u^3`.
pub fn exponential_part(u: f64, sign: Sign, params: &SpectralParams, precision: u32) -> Result<KernelValue> {
    if !(u > 0.0) {
        return Err(Error::domain("argument must be positive"));
    }
    let (coeff, k) = exponential_patterns(sign, params);
    let v = pattern_integral(u, k, params, tolerance_for_digits(precision))?;
    Ok(KernelValue {
        value: v.value * coeff,
        truncation_error: v.truncation_error * coeff.norm(),
        quadrature_error: v.quadrature_error * coeff.norm(),
    })
}

/// The oscillatory part `J(+-u^3) - E(+-u^3)`.
pub fn oscillatory_part(u: f64, sign: Sign, params: &SpectralParams, precision: u32) -> Result<KernelValue> {
    let full = bessel_kernel(u * u * u, sign, params, precision)?;
    let small = exponential_part(u, sign, params, precision)?;
    Ok(KernelValue {
        value: full.value - small.value,
        truncation_error: full.truncation_error + small.truncation_error,
        quadrature_error: full.quadrature_error + small.quadrature_error,
    })
}

/// Options for fitting `u e(-+3u) (J - E)(+-u^3) ~ sum_{m<K} B_m u^{-m}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub order: usize,
    pub range: (f64, f64),
    pub x_min: f64,
    pub precision: u32,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            order: 3,
            range: (10.0, 20.0),
            x_min: 3.0,
            precision: 30,
        }
    }
}

/// `J(+-x^3) = e(+-3x)/x sum_{m<K} B_m x^{-m} + E(+-x^3) + O(x^{-K-1})` with fitted `B_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticExpansion {
    pub sign: Sign,
    pub params: SpectralParams,
    pub order: usize,
    pub coefficients: Vec<Complex64>,
    pub x_min: f64,
    pub fit_range: (f64, f64),
    /// Largest fit residual of the scaled model.
    pub residual: f64,
    /// `|B_K| u^{-K}` at the lower end of the range, from a fit with one more term.
    pub remainder_estimate: f64,
}

impl AsymptoticExpansion {
    /// `e(+-3x)/x sum_m B_m x^{-m}`.
    pub fn eval(&self, x: f64) -> Result<Complex64> {
        if x < self.x_min {
            return Err(Error::domain(format!(
                "asymptotic expansion used below x_min = {}",
                self.x_min
            )));
        }
        let series: Complex64 = self
            .coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &b| acc / x + b);
        Ok(e(self.sign.value() * 3.0 * x) * series / x)
    }
}

/// Least squares with a real design matrix and complex data, by Householder-free
/// modified Gram-Schmidt.
fn least_squares(columns: &[Vec<f64>], data: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = data.len();
    let k = columns.len();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut r = vec![vec![0.0; k]; k];
    for j in 0..k {
        let mut v = columns[j].clone();
        for i in 0..j {
            let proj: f64 = q[i].iter().zip(&v).map(|(a, b)| a * b).sum();
            r[i][j] = proj;
            for (vv, qq) in v.iter_mut().zip(&q[i]) {
                *vv -= proj * qq;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 * columns[j].iter().map(|x| x * x).sum::<f64>().sqrt() {
            return Err(Error::numerical("rank-deficient least-squares design"));
        }
        r[j][j] = norm;
        q.push(v.into_iter().map(|x| x / norm).collect());
    }
    let qtb: Vec<Complex64> = q.iter().map(|col| (0..n).map(|i| data[i] * col[i]).sum()).collect();
    let mut x = vec![Complex64::new(0.0, 0.0); k];
    for j in (0..k).rev() {
        let mut acc = qtb[j];
        for i in j + 1..k {
            acc -= x[i] * r[j][i];
        }
        x[j] = acc / r[j][j];
    }
    Ok(x)
}

fn fit_terms(us: &[f64], data: &[Complex64], order: usize, reference: f64) -> Result<Vec<Complex64>> {
    // columns (reference/u)^m keep the design well scaled
    let columns: Vec<Vec<f64>> = (0..order)
        .map(|m| us.iter().map(|&u| (reference / u).powi(m as i32)).collect())
        .collect();
    let scaled = least_squares(&columns, data)?;
    Ok(scaled
        .into_iter()
        .enumerate()
        .map(|(m, b)| b * reference.powi(m as i32))
        .collect())
}

/// Fits `B_0..B_{K-1}` to the scaled oscillatory part at `4K` points of the range.
pub fn fit_asymptotic(sign: Sign, params: &SpectralParams, options: FitOptions) -> Result<AsymptoticExpansion> {
    let k = options.order;
    if k == 0 {
        return Err(Error::domain("asymptotic order must be at least 1"));
    }
    let (lo, hi) = options.range;
    if !(lo >= options.x_min && hi > lo) {
        return Err(Error::domain("fit range must lie above x_min"));
    }
    let count = 4 * k + 4;
    let us: Vec<f64> = (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect();
    let mut data = Vec::with_capacity(count);
    for &u in &us {
        let osc = oscillatory_part(u, sign, params, options.precision)?;
        data.push(osc.value * u * e(-sign.value() * 3.0 * u));
    }
    let coefficients = fit_terms(&us, &data, k, lo)?;
    let extended = fit_terms(&us, &data, k + 1, lo)?;
    let model = |u: f64| {
        coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &b| acc / u + b)
    };
    let residual = us
        .iter()
        .zip(&data)
        .map(|(&u, d)| (d - model(u)).norm())
        .fold(0.0, f64::max);
    let remainder_estimate = extended[k].norm() * lo.powi(-(k as i32));
    let floor = 1e-9 * coefficients[0].norm();
    if residual > 2.0 * remainder_estimate + floor {
        return Err(Error::Calibration(format!(
            "fit residual {residual:.3e} exceeds the model remainder {remainder_estimate:.3e}"
        )));
    }
    Ok(AsymptoticExpansion {
        sign,
        params: *params,
        order: k,
        coefficients,
        x_min: options.x_min,
        fit_range: options.range,
        residual,
        remainder_estimate,
    })
}

/// `e(+-3x)/x sum_{m<K} B_m x^{-m}` with coefficients fitted on the default range.
pub fn bessel_asymptotic(x: f64, sign: Sign, params: &SpectralParams, order: usize) -> Result<Complex64> {
    let options = FitOptions {
        order,
        ..FitOptions::default()
    };
    if x < options.x_min {
        return Err(Error::domain(format!(
            "asymptotic expansion needs x >= {}",
            options.x_min
        )));
    }
    fit_asymptotic(sign, params, options)?.eval(x)
}

/// Comparison of the contour integral with the fitted expansion at held-out points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossValidation {
    pub expansion: AsymptoticExpansion,
    /// `(u, |J(u^3) - expansion(u) - E(u^3)| / |J(u^3)|)`.
    pub points: Vec<(f64, f64)>,
    pub max_rel_error: f64,
    /// `|B_0|` refitted on a sample set disjoint from the first fit.
    pub refit_leading: f64,
    pub leading_discrepancy: f64,
}

/// Fits on `options.range`, then evaluates both paths at `us` and refits on a shifted range.
pub fn cross_validate(sign: Sign, params: &SpectralParams, options: FitOptions, us: &[f64]) -> Result<CrossValidation> {
    let expansion = fit_asymptotic(sign, params, options)?;
    let points = us
        .iter()
        .map(|&u| {
            let full = bessel_kernel(u * u * u, sign, params, options.precision)?.value;
            let model = expansion.eval(u)? + exponential_part(u, sign, params, options.precision)?.value;
            Ok((u, (full - model).norm() / full.norm()))
        })
        .collect::<Result<Vec<_>>>()?;
    let (lo, hi) = options.range;
    // the interleaved set: same range shifted by half a sample spacing
    let shift = 0.5 * (hi - lo) / (4 * options.order + 3) as f64;
    let refit = fit_asymptotic(
        sign,
        params,
        FitOptions {
            range: (lo + shift, hi + shift),
            ..options
        },
    )?;
    let refit_leading = refit.coefficients[0].norm();
    Ok(CrossValidation {
        max_rel_error: points.iter().map(|p| p.1).fold(0.0, f64::max),
        leading_discrepancy: (refit_leading - expansion.coefficients[0].norm()).abs(),
        refit_leading,
        expansion,
        points,
    })
}

/// `C(u) = |E(+-u^3)| u exp(3 sqrt(3) pi u)` at each `u`, and the fitted constant `max C(u)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvelopeFit {
    pub points: Vec<(f64, f64)>,
    pub constant: f64,
}

pub fn exponential_envelope(sign: Sign, params: &SpectralParams, us: &[f64], precision: u32) -> Result<EnvelopeFit> {
    let rate = 3.0 * 3f64.sqrt() * PI;
    let points = us
        .iter()
        .map(|&u| {
            Ok((
                u,
                exponential_part(u, sign, params, precision)?.value.norm() * u * (rate * u).exp(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnvelopeFit {
        constant: points.iter().map(|p| p.1).fold(0.0, f64::max),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_reassembles_the_kernel_at_small_argument() {
        // at u ~ 1 both parts are of comparable size; the main pattern is computed independently
        // on the full contour with only the k = 3 exponential
        let p = SpectralParams::trivial();
        let u = 0.3;
        let full = bessel_kernel(u * u * u, Sign::Plus, &p, 30).unwrap().value;
        let small = exponential_part(u, Sign::Plus, &p, 30).unwrap().value;
        let ln_x = 3.0 * u.ln();
        let main = |s: Complex64| -> Result<Complex64> {
            let mut log = -3.0 * s * LN_2PI + Complex64::new(0.0, 1.5 * PI) * s - s * ln_x;
            for a in p.alpha {
                log += ln_gamma(s + a);
            }
            Ok(log.exp())
        };
        let contour = super::super::Contour::for_argument(u * u * u, &p, 0.0);
        let main = super::super::contour_integral(&main, contour, 1e-13).unwrap().value;
        assert!(small.norm() > 1e-3 * full.norm());
        assert!((main + small - full).norm() < 1e-10, "{main} + {small} vs {full}");
    }

    #[test]
    fn least_squares_recovers_exact_model() {
        let us: Vec<f64> = (0..12).map(|i| 10.0 + i as f64).collect();
        let truth = [
            Complex64::new(0.3, -0.2),
            Complex64::new(1.5, 0.7),
            Complex64::new(-4.0, 2.0),
        ];
        let data: Vec<Complex64> = us
            .iter()
            .map(|&u| truth[0] + truth[1] / u + truth[2] / (u * u))
            .collect();
        let fit = fit_terms(&us, &data, 3, 10.0).unwrap();
        for (a, b) in fit.iter().zip(&truth) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn expansion_matches_the_contour_integral() {
        let p = SpectralParams::trivial();
        let cv = cross_validate(Sign::Plus, &p, FitOptions::default(), &[10.5, 14.2, 21.0]).unwrap();
        assert!(cv.max_rel_error < 1e-3, "{:?}", cv.points);
        // B_0 = i / sqrt(3) for trivial parameters
        assert!((cv.expansion.coefficients[0] - Complex64::new(0.0, 1.0 / 3f64.sqrt())).norm() < 1e-6);
        assert!(cv.leading_discrepancy < 1e-4);
        let env = exponential_envelope(Sign::Minus, &p, &[3.0, 4.5, 6.0], 30).unwrap();
        assert!(env.constant < 10.0);
    }
}
