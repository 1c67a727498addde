use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{bessel_kernel, kernel_integrand, Sign, SpectralParams};
use crate::error::{Error, Result};
use crate::oscint::SmoothWeight;
use crate::quad::integrate_panels;

/// Options for the Mellin-side evaluation of Hankel transforms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HankelOptions {
    /// Trapezoid step in `Im s`.
    pub step: f64,
    /// Relative size below which the Mellin integrand is dropped.
    pub cutoff: f64,
    /// Number of extra abscissas `sigma0 + 1, sigma0 + 2, ...` with tabulated tail integrals.
    pub tail_abscissas: usize,
}

impl Default for HankelOptions {
    fn default() -> Self {
        HankelOptions {
            step: 0.05,
            cutoff: 1e-14,
            tail_abscissas: 13,
        }
    }
}

/// Samples of `u -> w(e^u) e^{u (1 - sigma)}`, whose Fourier transform is the Mellin transform
/// `int w(y) y^{-sigma - i tau} dy` of `w` at `1 - sigma - i tau`.
struct MellinGrid {
    nodes: Vec<f64>,
    values: Vec<f64>,
    step: f64,
}

impl MellinGrid {
    fn new(weight: &SmoothWeight, sigma: f64, max_tau: f64) -> Self {
        let (a, b) = weight.support();
        let (lo, hi) = (a.ln(), b.ln());
        // at least 8 nodes per period of e^{-i tau u}, and enough to resolve the bump profiles
        let n = (((hi - lo) * (8.0 * max_tau / (2.0 * PI) + 1500.0)).ceil() as usize).max(256);
        let step = (hi - lo) / n as f64;
        let nodes: Vec<f64> = (1..n).map(|i| lo + step * i as f64).collect();
        let values = nodes
            .iter()
            .map(|&u| weight.eval(u.exp()) * (u * (1.0 - sigma)).exp())
            .collect();
        MellinGrid { nodes, values, step }
    }

    /// `int w(y) y^{-sigma - i tau} dy`.
    fn at(&self, tau: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&u, &g) in self.nodes.iter().zip(&self.values) {
            acc += Complex64::from_polar(g, -tau * u);
        }
        acc * self.step
    }

    /// Values at `tau = k h`, `k = 0..=count`, by per-node rotation recurrences.
    fn ladder(&self, h: f64, count: usize) -> Vec<Complex64> {
        let rotations: Vec<Complex64> = self.nodes.iter().map(|&u| Complex64::from_polar(1.0, -h * u)).collect();
        let mut current: Vec<Complex64> = self.values.iter().map(|&g| Complex64::new(g, 0.0)).collect();
        let mut out = Vec::with_capacity(count + 1);
        for k in 0..=count {
            if k > 0 && k % 64 == 0 {
                for ((c, &g), &u) in current.iter_mut().zip(&self.values).zip(&self.nodes) {
                    *c = Complex64::from_polar(g, -(k as f64) * h * u);
                }
            }
            out.push(current.iter().sum::<Complex64>() * self.step);
            for (c, r) in current.iter_mut().zip(&rotations) {
                *c *= r;
            }
        }
        out
    }
}

/// `W^+-(x) = int w(y) J(-+x y) dy`, evaluated as
/// `(1/2 pi i) int_(sigma0) H(s) w~(1 - s) x^{-s} ds` by the trapezoid rule in `Im s`, where
/// `H = (G_delta -+ G_{delta+e}) / 2`. The rule converges geometrically because the integrand
/// is entire in a strip and decays faster than any power.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HankelPlan {
    pub sign: Sign,
    pub params: SpectralParams,
    pub sigma: f64,
    pub step: f64,
    /// `(h / 2 pi) H(s_k) w~(1 - s_k)` for `s_k = sigma + i k h`, `k = -K..=K`.
    coefficients: Vec<Complex64>,
    /// `(sigma', I(sigma'))` with `|W(x)| <= x^{-sigma'} I(sigma')`.
    pub tail_integrals: Vec<(f64, f64)>,
}

impl HankelPlan {
    pub fn new(weight: &SmoothWeight, sign: Sign, params: &SpectralParams, options: HankelOptions) -> Result<Self> {
        let kernel_sign = sign.flip();
        let sigma = params.default_abscissa();
        let height = integrand_height(weight, kernel_sign, params, sigma, options.cutoff)?;
        let count = (height / options.step).ceil() as usize;
        let grid = MellinGrid::new(weight, sigma, height);
        let ladder = grid.ladder(options.step, count);
        let mut coefficients = Vec::with_capacity(2 * count + 1);
        for k in -(count as i64)..=count as i64 {
            let tau = k as f64 * options.step;
            let mellin = if k >= 0 {
                ladder[k as usize]
            } else {
                ladder[(-k) as usize].conj()
            };
            let h = kernel_integrand(Complex64::new(sigma, tau), 0.0, kernel_sign, params)?;
            coefficients.push(h * mellin * (options.step / (2.0 * PI)));
        }
        let mut tail_integrals = Vec::with_capacity(options.tail_abscissas);
        for j in 0..options.tail_abscissas {
            let s = sigma + j as f64;
            tail_integrals.push((s, absolute_integral(weight, kernel_sign, params, s)?));
        }
        Ok(HankelPlan {
            sign,
            params: *params,
            sigma,
            step: options.step,
            coefficients,
            tail_integrals,
        })
    }

    pub fn nodes(&self) -> usize {
        self.coefficients.len()
    }

    /// `W^+-(x)`.
    pub fn eval(&self, x: f64) -> Complex64 {
        let ln_x = x.ln();
        let half = (self.coefficients.len() / 2) as i64;
        let rotation = Complex64::from_polar(1.0, -self.step * ln_x);
        let mut phase = Complex64::new(0.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, a) in self.coefficients.iter().enumerate() {
            if i % 256 == 0 {
                let k = i as i64 - half;
                phase = Complex64::from_polar(1.0, -(k as f64) * self.step * ln_x);
            }
            acc += a * phase;
            phase *= rotation;
        }
        acc * (-self.sigma * ln_x).exp()
    }

    /// `U(x) = x W(x)`, the other normalization of the dual weight.
    pub fn eval_scaled(&self, x: f64) -> Complex64 {
        self.eval(x) * x
    }

    /// `min_sigma x^{-sigma} I(sigma)`, a bound for `|W(x)|`.
    pub fn tail_bound(&self, x: f64) -> f64 {
        self.tail_integrals
            .iter()
            .map(|&(s, i)| x.powf(-s) * i)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Height beyond which `|H(sigma + i tau) w~(1 - sigma - i tau)|` is below `cutoff` times its peak.
fn integrand_height(
    weight: &SmoothWeight,
    kernel_sign: Sign,
    params: &SpectralParams,
    sigma: f64,
    cutoff: f64,
) -> Result<f64> {
    let probe = MellinGrid::new(weight, sigma, 400.0);
    let norms = mellin_ibp_norms(weight, sigma);
    // the sampled transform bottoms out at rounding level; the envelope does not
    let size = |tau: f64| -> Result<f64> {
        let mellin = probe.at(tau).norm().min(ibp_envelope(&norms, tau).0);
        Ok(kernel_integrand(Complex64::new(sigma, tau), 0.0, kernel_sign, params)?.norm() * mellin)
    };
    let peak = (0..=40)
        .map(|i| size(i as f64 * 0.25))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let peak = peak.max(size(-1.0)?).max(1e-300);
    let mut height = 5.0;
    let mut quiet = 0;
    while quiet < 4 {
        height += 1.0;
        if height > 2000.0 {
            return Err(Error::resource(
                "Mellin transform of the weight decays too slowly",
                None,
            ));
        }
        if size(height)?.max(size(-height)?) < cutoff * peak {
            quiet += 1;
        } else {
            quiet = 0;
        }
    }
    Ok(height)
}

/// Highest order of integration by parts in the Mellin envelope.
const IBP_ORDER: usize = 48;

/// `||g^{(j)}||_1` for `g(u) = w(e^u) e^{u (1 - sigma)}`, `j <= IBP_ORDER`, with a 5% margin.
fn mellin_ibp_norms(weight: &SmoothWeight, sigma: f64) -> Vec<f64> {
    let order = IBP_ORDER;
    let shift = 1.0 - sigma;
    // Taylor coefficients of e^{shift eps}
    let mut growth = vec![1.0; order + 1];
    for k in 1..=order {
        growth[k] = growth[k - 1] * shift / k as f64;
    }
    let (a, b) = weight.support();
    let (lo, hi) = (a.ln(), b.ln());
    let n = 20_000;
    let du = (hi - lo) / n as f64;
    let mut norms = vec![0.0; order + 1];
    for i in 1..n {
        let u = lo + du * i as f64;
        let w = weight.log_taylor(u, order);
        if w.iter().all(|c| *c == 0.0) {
            continue;
        }
        let front = (u * shift).exp();
        let mut factorial = 1.0;
        for k in 0..=order {
            if k > 0 {
                factorial *= k as f64;
            }
            let coeff: f64 = (0..=k).map(|j| w[j] * growth[k - j]).sum();
            norms[k] += (front * coeff * factorial).abs() * du;
        }
    }
    norms.iter().map(|v| 1.05 * v).collect()
}

/// `min_j norms[j] / |tau|^j` and the minimizing order.
fn ibp_envelope(norms: &[f64], tau: f64) -> (f64, usize) {
    let t = tau.abs();
    let mut best = (norms[0], 0usize);
    let mut power = 1.0;
    for (j, v) in norms.iter().enumerate().skip(1) {
        power *= t;
        if v / power < best.0 {
            best = (v / power, j);
        }
    }
    best
}

/// Certified `(1/2 pi) int |H(sigma + i tau)| |w~(1 - sigma - i tau)| dtau`, using
/// `|w~(1 - sigma - i tau)| <= min_j ||g^{(j)}||_1 / |tau|^j`.
fn absolute_integral(weight: &SmoothWeight, kernel_sign: Sign, params: &SpectralParams, sigma: f64) -> Result<f64> {
    let norms = mellin_ibp_norms(weight, sigma);
    let envelope = |tau: f64| ibp_envelope(&norms, tau);
    let h = 0.05;
    let mut total = 0.0;
    for side in [1.0f64, -1.0] {
        let mut k = if side > 0.0 { 0 } else { 1 };
        loop {
            let tau = side * k as f64 * h;
            let (bound, active) = envelope(tau);
            let v = kernel_integrand(Complex64::new(sigma, tau), 0.0, kernel_sign, params)?.norm() * bound;
            total += v * h;
            // |H| grows like |tau|^{3 sigma - 3/2}; once the active order beats that by 2 the rest
            // of the integral is at most v |tau| / (order - growth - 1)
            let growth = 3.0 * sigma - 1.5;
            if active as f64 > growth + 3.0 && v * tau.abs() < 1e-6 * total {
                let decay = active as f64 - growth - 1.0;
                if decay < 1.0 {
                    return Err(Error::numerical("Mellin envelope order too low for the abscissa"));
                }
                total += v * tau.abs() / decay;
                break;
            }
            k += 1;
            if k > 10_000_000 {
                return Err(Error::resource("Mellin envelope integral does not converge", None));
            }
        }
    }
    // the trapezoid rule on a log-concave-like envelope is padded by 10%
    Ok(1.1 * total / (2.0 * PI))
}

/// `int w(y) J(-+x y) dy` by adaptive quadrature over direct kernel evaluations.
pub fn hankel_direct(
    weight: &SmoothWeight,
    x: f64,
    sign: Sign,
    params: &SpectralParams,
    precision: u32,
) -> Result<Complex64> {
    let (a, b) = weight.support();
    let failure = std::cell::Cell::new(None);
    let f = |y: f64| {
        let w = weight.eval(y);
        if w == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        match bessel_kernel(x * y, sign.flip(), params, precision) {
            Ok(v) => v.value * w,
            Err(err) => {
                failure.set(Some(err));
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let panels = 24;
    let breaks: Vec<f64> = (0..=panels).map(|i| a + (b - a) * i as f64 / panels as f64).collect();
    let q = integrate_panels(&f, &breaks, 1e-11 * weight.sup_norm() * (b - a), 5_000)?;
    if let Some(err) = failure.take() {
        return Err(err);
    }
    Ok(q.value)
}

/// `int w(y / N) J(-+x y) dy = N W^+-(N x)`.
pub fn hankel_transform(
    weight: &SmoothWeight,
    scale: f64,
    x: f64,
    sign: Sign,
    params: &SpectralParams,
) -> Result<Complex64> {
    if !(scale > 0.0 && x > 0.0) {
        return Err(Error::domain("scale and argument must be positive"));
    }
    let plan = HankelPlan::new(weight, sign, params, HankelOptions::default())?;
    Ok(plan.eval(scale * x) * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weight() -> SmoothWeight {
        SmoothWeight::bump_with_sharpness(1.0, 8.0, 40.0).unwrap()
    }

    #[test]
    fn mellin_grid_matches_direct_quadrature() {
        let w = weight();
        let grid = MellinGrid::new(&w, 0.75, 50.0);
        for tau in [0.0, 3.0, -17.0] {
            let direct = w.mellin(Complex64::new(0.25, -tau));
            assert!((grid.at(tau) - direct).norm() < 1e-11, "tau={tau}");
        }
        let ladder = grid.ladder(0.05, 400);
        assert!((ladder[400] - grid.at(20.0)).norm() < 1e-12);
    }

    #[test]
    fn plan_matches_direct_kernel_quadrature() {
        let w = weight();
        let p = SpectralParams::trivial();
        for sign in [Sign::Plus, Sign::Minus] {
            let plan = HankelPlan::new(&w, sign, &p, HankelOptions::default()).unwrap();
            for x in [0.05, 1.0, 30.0] {
                let direct = hankel_direct(&w, x, sign, &p, 24).unwrap();
                let fast = plan.eval(x);
                assert!(
                    (fast - direct).norm() < 1e-8 * (1.0 + direct.norm()),
                    "x={x}: {fast} vs {direct}"
                );
                assert!(fast.norm() <= plan.tail_bound(x) + 1e-15);
            }
        }
    }

    #[test]
    fn scaling_relation() {
        let w = weight();
        let p = SpectralParams::trivial();
        let plan = HankelPlan::new(&w, Sign::Plus, &p, HankelOptions::default()).unwrap();
        let direct = hankel_transform(&w, 7.0, 0.3, Sign::Plus, &p).unwrap();
        assert!((direct - plan.eval(2.1) * 7.0).norm() < 1e-14 * (1.0 + direct.norm()));
    }
}
