//! The GL(3) Bessel kernel `J(+-x) = (j_delta(x) +- j_{delta+e}(x)) / 2` with
//! `j_delta(x) = (1/2 pi i) int G_delta(s) x^{-s} ds`, its oscillatory/exponentially-small
//! split, fitted asymptotic expansions and Hankel transforms of smooth weights.

mod asymptotic;
mod cache;
mod hankel;

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::integrate_panels;
use crate::special::{ln_cos, ln_gamma, ln_sin};

pub use asymptotic::{
    bessel_asymptotic, cross_validate, exponential_envelope, exponential_part, fit_asymptotic, oscillatory_part,
    AsymptoticExpansion, CrossValidation, EnvelopeFit, FitOptions,
};
pub use cache::KernelCache;
pub use hankel::{hankel_direct, hankel_transform, HankelOptions, HankelPlan};

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const POLE_DISTANCE: f64 = 1e-8;

/// Sign of the kernel argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Archimedean parameters `(alpha, delta)` of a GL(3) representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralParams {
    pub alpha: [Complex64; 3],
    pub delta: [u8; 3],
}

impl SpectralParams {
    pub fn new(alpha: [Complex64; 3], delta: [u8; 3]) -> Result<Self> {
        let sum: Complex64 = alpha.iter().sum();
        if sum.norm() > 1e-12 {
            return Err(Error::domain(format!(
                "spectral parameters must sum to zero, got {sum}"
            )));
        }
        if delta.iter().any(|&d| d > 1) {
            return Err(Error::domain("delta entries must be 0 or 1"));
        }
        Ok(SpectralParams { alpha, delta })
    }

    /// `alpha = 0`, `delta = 0`: the parameters of the ternary divisor function.
    pub fn trivial() -> Self {
        SpectralParams {
            alpha: [Complex64::new(0.0, 0.0); 3],
            delta: [0; 3],
        }
    }

    /// `alpha = (i t0, -i t0, 0)`, `delta = 0`.
    pub fn tempered(t0: f64) -> Self {
        SpectralParams {
            alpha: [
                Complex64::new(0.0, t0),
                Complex64::new(0.0, -t0),
                Complex64::new(0.0, 0.0),
            ],
            delta: [0; 3],
        }
    }

    pub fn conj(&self) -> Self {
        SpectralParams {
            alpha: self.alpha.map(|a| a.conj()),
            delta: self.delta,
        }
    }

    /// `delta + (1, 1, 1)` modulo 2.
    pub fn shifted_delta(&self) -> Self {
        SpectralParams {
            alpha: self.alpha,
            delta: self.delta.map(|d| 1 - d),
        }
    }

    /// `max_j (-Re alpha_j)`: every pole of the gamma factor has real part at most this.
    pub fn pole_abscissa(&self) -> f64 {
        self.alpha.iter().map(|a| -a.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Default abscissa of the vertical part of the contour.
    pub fn default_abscissa(&self) -> f64 {
        self.pole_abscissa() + 0.75
    }

    pub(crate) fn key(&self) -> [u64; 9] {
        let mut k = [0u64; 9];
        for j in 0..3 {
            k[2 * j] = self.alpha[j].re.to_bits();
            k[2 * j + 1] = self.alpha[j].im.to_bits();
            k[6 + j] = self.delta[j] as u64;
        }
        k
    }
}

/// `log G_d(w)` with `G_0(w) = 2 (2 pi)^{-w} Gamma(w) cos(pi w/2)`,
/// `G_1(w) = 2 i (2 pi)^{-w} Gamma(w) sin(pi w/2)`.
fn ln_g_single(w: Complex64, d: u8) -> Result<Complex64> {
    let half_pi_w = w * FRAC_PI_2;
    if w.re >= 0.5 {
        let trig = if d == 0 {
            ln_cos(half_pi_w)
        } else {
            ln_sin(half_pi_w) + Complex64::new(0.0, FRAC_PI_2)
        };
        return Ok(LN_2 - w * LN_2PI + ln_gamma(w) + trig);
    }
    // poles at w = -d, -d - 2, -d - 4, ...
    let k = ((-w.re - d as f64) / 2.0).round().max(0.0);
    let pole = -(d as f64) - 2.0 * k;
    if (w - pole).norm() < POLE_DISTANCE {
        return Err(Error::domain(format!(
            "s is within {POLE_DISTANCE} of a pole of the gamma factor at {pole}"
        )));
    }
    // reflected forms: G_0 = (2 pi)^{-w} pi / (sin(pi w/2) Gamma(1-w)),
    // G_1 = i (2 pi)^{-w} pi / (cos(pi w/2) Gamma(1-w))
    let one_minus = Complex64::new(1.0, 0.0) - w;
    let common = -w * LN_2PI + PI.ln() - ln_gamma(one_minus);
    Ok(if d == 0 {
        common - ln_sin(half_pi_w)
    } else {
        common - ln_cos(half_pi_w) + Complex64::new(0.0, FRAC_PI_2)
    })
}

/// `log G_(alpha, delta)(s) = sum_j log G_{delta_j}(s + alpha_j)`.
pub fn ln_gamma_factor(s: Complex64, params: &SpectralParams) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..3 {
        total += ln_g_single(s + params.alpha[j], params.delta[j])?;
    }
    Ok(total)
}

/// `G_(alpha, delta)(s) = prod_j G_{delta_j}(s + alpha_j)`.
pub fn gamma_factor(s: Complex64, params: &SpectralParams) -> Result<Complex64> {
    Ok(ln_gamma_factor(s, params)?.exp())
}

/// `(G_delta(s) +- G_{delta+e}(s)) x^{-s} / 2`, the Mellin-Barnes integrand of `J(+-x)`.
pub(crate) fn kernel_integrand(s: Complex64, ln_x: f64, sign: Sign, params: &SpectralParams) -> Result<Complex64> {
    let a = ln_gamma_factor(s, params)? - s * ln_x;
    let b = ln_gamma_factor(s, &params.shifted_delta())? - s * ln_x;
    Ok(0.5 * (a.exp() + sign.value() * b.exp()))
}

/// A kernel value with its error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: Complex64,
    /// Bound on the neglected tails of the two rays.
    pub truncation_error: f64,
    /// Adaptive quadrature error estimate.
    pub quadrature_error: f64,
}

impl KernelValue {
    pub fn error(&self) -> f64 {
        self.truncation_error + self.quadrature_error
    }
}

/// Contour: the vertical segment `Re s = sigma`, `|Im s| <= height`, continued by the rays
/// `sigma +- i height + rho e^{+- 3 pi i / 4}`, which bend left so that the gamma factors decay
/// factorially.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub sigma: f64,
    pub height: f64,
}

impl Contour {
    /// The segment must reach past the saddle at `|s| ~ 2 pi x^{1/3}` and clear the poles.
    pub fn for_argument(x: f64, params: &SpectralParams, shift: f64) -> Self {
        let max_im = params.alpha.iter().map(|a| a.im.abs()).fold(0.0, f64::max);
        Contour {
            sigma: params.default_abscissa() + shift,
            height: (1.5 * 2.0 * PI * x.cbrt()).max(10.0 + max_im),
        }
    }
}

/// `(1/2 pi i) int_C f(s) ds` over the contour; `f` must decay along left-going rays.
pub(crate) fn contour_integral<F>(f: &F, contour: Contour, relative_tol: f64) -> Result<KernelValue>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let Contour { sigma, height } = contour;
    // scale of the integrand on the segment, for relative tolerances
    let mut scale = 0.0;
    let probe = 0.25;
    let steps = (2.0 * height / probe).ceil() as usize;
    for i in 0..=steps {
        let tau = -height + 2.0 * height * i as f64 / steps as f64;
        scale += f(Complex64::new(sigma, tau))?.norm() * (2.0 * height / steps as f64);
    }
    let scale = scale.max(1e-300);
    let abs_tol = relative_tol * scale;

    let failure = std::cell::Cell::new(None::<Error>);
    let guard = |v: Result<Complex64>| -> Complex64 {
        match v {
            Ok(z) => z,
            Err(err) => {
                failure.set(Some(err));
                Complex64::new(0.0, 0.0)
            }
        }
    };

    // vertical segment: ds = i dtau, so (1/2 pi i) ds = dtau / 2 pi
    let seg = |tau: f64| guard(f(Complex64::new(sigma, tau)));
    let panels = (2.0 * height / 0.5).ceil() as usize;
    let breaks: Vec<f64> = (0..=panels)
        .map(|i| -height + 2.0 * height * i as f64 / panels as f64)
        .collect();
    let segment = integrate_panels(&seg, &breaks, abs_tol / 3.0, 200_000)?;
    if let Some(err) = failure.take() {
        return Err(err);
    }

    let mut value = segment.value / (2.0 * PI);
    let mut quadrature_error = segment.error / (2.0 * PI);
    let mut truncation_error = 0.0;
    for (start_im, direction) in [
        (height, Complex64::from_polar(1.0, 0.75 * PI)),
        (-height, Complex64::from_polar(1.0, -0.75 * PI)),
    ] {
        let start = Complex64::new(sigma, start_im);
        let ray = |rho: f64| guard(f(start + direction * rho)) * direction;
        // walk outward until the integrand is negligible and decaying geometrically
        let mut rho_max = 0.0;
        let mut previous = f64::INFINITY;
        let mut tail = f64::INFINITY;
        for step in 1..100_000 {
            let rho = step as f64;
            let v = ray(rho).norm();
            if let Some(err) = failure.take() {
                return Err(err);
            }
            if v < 1e-3 * abs_tol && v < 0.5 * previous {
                rho_max = rho;
                tail = 2.0 * v;
                break;
            }
            previous = v;
        }
        if !tail.is_finite() {
            return Err(Error::resource("contour ray integrand does not decay", Some(value)));
        }
        let panels = (rho_max / 0.5).ceil() as usize;
        let breaks: Vec<f64> = (0..=panels).map(|i| rho_max * i as f64 / panels as f64).collect();
        let q = integrate_panels(&ray, &breaks, abs_tol / 3.0, 200_000)?;
        if let Some(err) = failure.take() {
            return Err(err);
        }
        // upper ray runs outward, lower ray inward
        let oriented = if start_im > 0.0 { q.value } else { -q.value };
        value += oriented / Complex64::new(0.0, 2.0 * PI);
        quadrature_error += q.error / (2.0 * PI);
        truncation_error += tail / (2.0 * PI);
    }
    Ok(KernelValue {
        value,
        truncation_error,
        quadrature_error,
    })
}

/// Working relative tolerance for a requested number of digits; double precision caps it.
pub fn tolerance_for_digits(precision: u32) -> f64 {
    10f64.powf(-(precision as f64) / 2.0).max(1e-13)
}

/// `J(+-x)` by Mellin-Barnes integration over the bent contour.
pub fn bessel_kernel(x: f64, sign: Sign, params: &SpectralParams, precision: u32) -> Result<KernelValue> {
    bessel_kernel_derivative(x, sign, params, precision, 0, 0.0)
}

/// `x^j J^{(j)}(+-x)`, with the contour abscissa moved right by `shift`.
pub fn bessel_kernel_derivative(
    x: f64,
    sign: Sign,
    params: &SpectralParams,
    precision: u32,
    order: u32,
    shift: f64,
) -> Result<KernelValue> {
    if !(x > 0.0) {
        return Err(Error::domain("kernel argument must be positive"));
    }
    if precision > 60 {
        return Err(Error::domain("precision is limited to 60 digits"));
    }
    let ln_x = x.ln();
    let f = |s: Complex64| -> Result<Complex64> {
        let mut factor = Complex64::new(1.0, 0.0);
        for i in 0..order {
            factor *= -s - i as f64;
        }
        Ok(kernel_integrand(s, ln_x, sign, params)? * factor)
    };
    let contour = Contour::for_argument(x, params, shift);
    contour_integral(&f, contour, tolerance_for_digits(precision))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gamma_factor_examples() {
        let g = gamma_factor(c(0.5, 0.0), &SpectralParams::trivial()).unwrap();
        assert!((g - c(1.0, 0.0)).norm() < 1e-14);
        // delta = (1,1,1), real s: i^3 times a real number
        let odd = SpectralParams::new([c(0.0, 0.0); 3], [1, 1, 1]).unwrap();
        for s in [0.3, 0.8, 1.7, 2.4] {
            let g = gamma_factor(c(s, 0.0), &odd).unwrap();
            assert!(g.re.abs() < 1e-13 * g.norm(), "s={s}: {g}");
        }
        // a -> -a with the first two factors swapped
        let a = c(0.2, 0.7);
        let p = SpectralParams::new([a, -a, c(0.0, 0.0)], [0, 0, 0]).unwrap();
        let q = SpectralParams::new([-a, a, c(0.0, 0.0)], [0, 0, 0]).unwrap();
        let s = c(1.1, 3.0);
        assert!((gamma_factor(s, &p).unwrap() - gamma_factor(s, &q).unwrap()).norm() < 1e-13);
    }

    #[test]
    fn reflected_and_direct_forms_agree() {
        for d in [0u8, 1] {
            for w in [c(0.45, 2.0), c(0.55, -3.0), c(-1.3, 0.4), c(0.7, 40.0)] {
                let direct = LN_2 - w * LN_2PI + ln_gamma(w);
                let trig = if d == 0 {
                    (w * FRAC_PI_2).cos()
                } else {
                    Complex64::i() * (w * FRAC_PI_2).sin()
                };
                let want = direct.exp() * trig;
                let got = ln_g_single(w, d).unwrap().exp();
                assert!((got - want).norm() < 1e-12 * want.norm(), "d={d} w={w}");
            }
        }
        assert!(gamma_factor(c(-2.0 + 1e-10, 0.0), &SpectralParams::trivial()).is_err());
        // G_0 has no pole at odd negative integers
        assert!(gamma_factor(c(-1.0, 0.0), &SpectralParams::trivial()).is_ok());
    }

    #[test]
    fn contour_independence() {
        let params = SpectralParams::tempered(1.0);
        for (x, sign) in [(0.7, Sign::Plus), (5.0, Sign::Minus), (60.0, Sign::Plus)] {
            let a = bessel_kernel_derivative(x, sign, &params, 30, 0, 0.0).unwrap();
            let b = bessel_kernel_derivative(x, sign, &params, 30, 0, 0.25).unwrap();
            assert!((a.value - b.value).norm() <= a.error() + b.error() + 1e-12, "x={x}");
        }
    }

    #[test]
    fn sign_symmetry_for_real_parameters() {
        let p = SpectralParams::trivial();
        for x in [0.5, 8.0, 100.0] {
            let plus = bessel_kernel(x, Sign::Plus, &p, 30).unwrap().value;
            let minus = bessel_kernel(x, Sign::Minus, &p, 30).unwrap().value;
            assert!((plus - minus.conj()).norm() < 1e-10 * plus.norm().max(1e-3), "x={x}");
        }
    }
}
