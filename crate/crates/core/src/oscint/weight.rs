//! Compactly supported smooth weights built from dilated bump functions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncated Taylor series arithmetic, used to differentiate bumps exactly to high order.
#[derive(Debug, Clone)]
struct Taylor(Vec<f64>);

impl Taylor {
    fn recip(&self) -> Taylor {
        let n = self.0.len();
        let mut out = vec![0.0; n];
        out[0] = 1.0 / self.0[0];
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| self.0[j] * out[k - j]).sum();
            out[k] = -s / self.0[0];
        }
        Taylor(out)
    }

    fn mul(&self, other: &Taylor) -> Taylor {
        let n = self.0.len();
        Taylor(
            (0..n)
                .map(|k| (0..=k).map(|j| self.0[j] * other.0[k - j]).sum())
                .collect(),
        )
    }

    fn exp(&self) -> Taylor {
        // f = exp(g) satisfies f' = g' f
        let n = self.0.len();
        let mut out = vec![0.0; n];
        out[0] = self.0[0].exp();
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| j as f64 * self.0[j] * out[k - j]).sum();
            out[k] = s / k as f64;
        }
        Taylor(out)
    }
}

/// One term `coeff * exp(beta - beta / (1 - u^2))`, `u = (x - center) / half_width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub coeff: f64,
    pub center: f64,
    pub half_width: f64,
    pub sharpness: f64,
}

impl Bump {
    fn value(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.half_width;
        if u.abs() >= 1.0 {
            return 0.0;
        }
        self.coeff * (self.sharpness - self.sharpness / (1.0 - u * u)).exp()
    }

    /// Taylor coefficients of the bump at `x` up to `order` (so `f^{(j)}(x) = j! c_j`).
    fn taylor(&self, x: f64, order: usize) -> Vec<f64> {
        let n = order + 1;
        let u0 = (x - self.center) / self.half_width;
        if u0.abs() >= 1.0 {
            return vec![0.0; n];
        }
        let mut one_minus_u2 = vec![0.0; n];
        one_minus_u2[0] = 1.0 - u0 * u0;
        let inv_h = 1.0 / self.half_width;
        if n > 1 {
            one_minus_u2[1] = -2.0 * u0 * inv_h;
        }
        if n > 2 {
            one_minus_u2[2] = -inv_h * inv_h;
        }
        let mut g = Taylor(one_minus_u2).recip();
        for c in g.0.iter_mut() {
            *c *= -self.sharpness;
        }
        g.0[0] += self.sharpness;
        let mut f = g.exp();
        for c in f.0.iter_mut() {
            *c *= self.coeff;
        }
        f.0
    }

    /// Taylor coefficients of `eps -> f(exp(log_x + eps))` at `eps = 0` up to `order`.
    fn log_taylor(&self, log_x: f64, order: usize) -> Vec<f64> {
        let n = order + 1;
        let x = log_x.exp();
        let u0 = (x - self.center) / self.half_width;
        // near the edge the value underflows and the series would overflow
        if u0.abs() >= 1.0 || self.sharpness / (1.0 - u0 * u0) - self.sharpness > 700.0 {
            return vec![0.0; n];
        }
        // u(eps) = (x e^eps - center) / half_width
        let mut u = vec![0.0; n];
        u[0] = u0;
        let mut term = x / self.half_width;
        for (k, c) in u.iter_mut().enumerate().skip(1) {
            term /= k as f64;
            *c = term;
        }
        let u = Taylor(u);
        let mut one_minus_u2 = u.mul(&u);
        for c in one_minus_u2.0.iter_mut() {
            *c = -*c;
        }
        one_minus_u2.0[0] += 1.0;
        let mut g = one_minus_u2.recip();
        for c in g.0.iter_mut() {
            *c *= -self.sharpness;
        }
        g.0[0] += self.sharpness;
        g.exp().0.into_iter().map(|c| c * self.coeff).collect()
    }

    fn support(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }
}

/// A finite sum of bumps: smooth, compactly supported in `(0, inf)`.
///
/// Carries certified bounds for `sup |V^{(j)}|` once [`SmoothWeight::certify`] has run, and the
/// number of leading log-moments `int V(y) (log y)^j dy` known to vanish.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothWeight {
    bumps: Vec<Bump>,
    support: (f64, f64),
    annihilated_log_moments: u32,
    derivative_bounds: Vec<f64>,
}

impl SmoothWeight {
    /// The normalized bump `exp(1 - 1/(1 - u^2))` mapped affinely onto `[a, b]`.
    pub fn bump(a: f64, b: f64) -> Result<Self> {
        Self::bump_with_sharpness(a, b, 1.0)
    }

    /// `exp(beta - beta/(1 - u^2))` on `[a, b]`; larger `beta` gives a narrower profile whose
    /// Fourier and Mellin transforms decay faster.
    pub fn bump_with_sharpness(a: f64, b: f64, sharpness: f64) -> Result<Self> {
        if !(a > 0.0 && b > a && sharpness > 0.0) {
            return Err(Error::domain(format!(
                "bump needs 0 < a < b and positive sharpness, got [{a}, {b}], {sharpness}"
            )));
        }
        Ok(SmoothWeight {
            bumps: vec![Bump {
                coeff: 1.0,
                center: 0.5 * (a + b),
                half_width: 0.5 * (b - a),
                sharpness,
            }],
            support: (a, b),
            annihilated_log_moments: 0,
            derivative_bounds: Vec::new(),
        })
    }

    /// `sum_i c_i W_i` for weights `W_i`.
    pub fn linear_combination(parts: &[(f64, &SmoothWeight)]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::domain("empty linear combination"));
        }
        let mut bumps = Vec::new();
        let (mut a, mut b) = (f64::INFINITY, f64::NEG_INFINITY);
        for (c, w) in parts {
            for bump in &w.bumps {
                bumps.push(Bump {
                    coeff: bump.coeff * c,
                    ..*bump
                });
            }
            a = a.min(w.support.0);
            b = b.max(w.support.1);
        }
        Ok(SmoothWeight {
            bumps,
            support: (a, b),
            annihilated_log_moments: 0,
            derivative_bounds: Vec::new(),
        })
    }

    /// `x -> V(x / factor)`.
    pub fn dilated(&self, factor: f64) -> Self {
        SmoothWeight {
            bumps: self
                .bumps
                .iter()
                .map(|b| Bump {
                    center: b.center * factor,
                    half_width: b.half_width * factor,
                    ..*b
                })
                .collect(),
            support: (self.support.0 * factor, self.support.1 * factor),
            annihilated_log_moments: self.annihilated_log_moments,
            derivative_bounds: Vec::new(),
        }
    }

    /// `x -> c V(x)`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for b in out.bumps.iter_mut() {
            b.coeff *= c;
        }
        out.derivative_bounds = self.derivative_bounds.iter().map(|d| d * c.abs()).collect();
        out
    }

    pub(crate) fn with_annihilated_log_moments(mut self, k: u32) -> Self {
        self.annihilated_log_moments = k;
        self
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn bumps(&self) -> &[Bump] {
        &self.bumps
    }

    pub fn annihilated_log_moments(&self) -> u32 {
        self.annihilated_log_moments
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.support.0 || x >= self.support.1 {
            return 0.0;
        }
        self.bumps.iter().map(|b| b.value(x)).sum()
    }

    /// `[V(x), V'(x), ..., V^{(order)}(x)]`.
    pub fn derivatives(&self, x: f64, order: usize) -> Vec<f64> {
        let mut coeffs = vec![0.0; order + 1];
        for b in &self.bumps {
            let (lo, hi) = b.support();
            if x > lo && x < hi {
                for (acc, c) in coeffs.iter_mut().zip(b.taylor(x, order)) {
                    *acc += c;
                }
            }
        }
        let mut factorial = 1.0;
        for (j, c) in coeffs.iter_mut().enumerate() {
            if j > 0 {
                factorial *= j as f64;
            }
            *c *= factorial;
        }
        coeffs
    }

    /// Taylor coefficients of `eps -> V(exp(log_x + eps))` up to `order`; stable at high order
    /// where expanding `(y d/dy)^j V` through ordinary derivatives would cancel badly.
    pub fn log_taylor(&self, log_x: f64, order: usize) -> Vec<f64> {
        let mut coeffs = vec![0.0; order + 1];
        let x = log_x.exp();
        for b in &self.bumps {
            let (lo, hi) = b.support();
            if x > lo && x < hi {
                for (acc, c) in coeffs.iter_mut().zip(b.log_taylor(log_x, order)) {
                    *acc += c;
                }
            }
        }
        coeffs
    }

    pub fn derivative(&self, x: f64, j: usize) -> f64 {
        self.derivatives(x, j)[j]
    }

    /// Uniform grid of `n` interior points of the support.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let (a, b) = self.support;
        (1..=n).map(|i| a + (b - a) * i as f64 / (n + 1) as f64).collect()
    }

    /// Computes `sup |V^{(j)}|` for `j <= order` on a 10^4-point grid, refines each maximum
    /// locally, and cross-checks the first derivatives against finite differences.
    ///
    /// The stored bounds include a 2% margin over the refined maxima.
    pub fn certify(&mut self, order: usize) -> Result<&[f64]> {
        let grid = self.grid(10_000);
        let step = grid[1] - grid[0];
        let mut maxima = vec![(0.0f64, self.support.0); order + 1];
        for &x in &grid {
            for (j, d) in self.derivatives(x, order).iter().enumerate() {
                if d.abs() > maxima[j].0 {
                    maxima[j] = (d.abs(), x);
                }
            }
        }
        let mut bounds = Vec::with_capacity(order + 1);
        for (j, &(m, x)) in maxima.iter().enumerate() {
            let mut best = m;
            for k in -50..=50 {
                let y = x + step * k as f64 / 50.0;
                best = best.max(self.derivatives(y, order)[j].abs());
            }
            bounds.push(best * 1.02);
        }
        // finite-difference cross-check of V' and V'' against the Taylor values
        let h = 1e-5 * (self.support.1 - self.support.0);
        for &x in grid.iter().step_by(97) {
            let d = self.derivatives(x, 2.min(order));
            if order >= 1 {
                let fd = (self.eval(x + h) - self.eval(x - h)) / (2.0 * h);
                if (fd - d[1]).abs() > 1e-5 * bounds[1].max(bounds[0]) + 1e-9 {
                    return Err(Error::numerical(format!(
                        "derivative certificate failed at x = {x}: {fd} vs {}",
                        d[1]
                    )));
                }
            }
        }
        self.derivative_bounds = bounds;
        Ok(&self.derivative_bounds)
    }

    /// Certified derivative bounds (empty until [`SmoothWeight::certify`] runs).
    pub fn derivative_bounds(&self) -> &[f64] {
        &self.derivative_bounds
    }

    /// `sup |V|` by sampling and local refinement.
    pub fn sup_norm(&self) -> f64 {
        let grid = self.grid(4000);
        let step = grid[1] - grid[0];
        let (mut best, mut at) = (0.0f64, grid[0]);
        for &x in &grid {
            let v = self.eval(x).abs();
            if v > best {
                best = v;
                at = x;
            }
        }
        for k in -100..=100 {
            best = best.max(self.eval(at + step * k as f64 / 100.0).abs());
        }
        best
    }

    /// `int |V'|`.
    pub fn total_variation(&self) -> f64 {
        let n = 20_000;
        let (a, b) = self.support;
        let h = (b - a) / n as f64;
        (1..n).map(|i| self.derivative(a + h * i as f64, 1).abs()).sum::<f64>() * h
    }

    /// `int V(x) g(x) dx` by the trapezoid rule, which is spectrally accurate here because every
    /// derivative of `V` vanishes at the ends of the support.
    pub fn integrate_against<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        let mut total = 0.0;
        for bump in &self.bumps {
            let (a, b) = bump.support();
            let n = 4096;
            let h = (b - a) / n as f64;
            total += (1..n)
                .map(|i| {
                    let x = a + h * i as f64;
                    bump.value(x) * g(x)
                })
                .sum::<f64>()
                * h;
        }
        total
    }

    pub fn integral(&self) -> f64 {
        self.integrate_against(|_| 1.0)
    }

    /// `int V(y) (log y)^j dy`.
    pub fn log_moment(&self, j: u32) -> f64 {
        self.integrate_against(|y| y.ln().powi(j as i32))
    }

    /// Mellin transform `int V(y) y^{s-1} dy`.
    pub fn mellin(&self, s: Complex64) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for bump in &self.bumps {
            let (a, b) = bump.support();
            // in u = log y the integrand is V(e^u) e^{u s}; oscillation ~ Im(s)/(2 pi) per unit u
            let width = (b / a).ln();
            let n = (4096.0f64).max(8.0 * s.im.abs() * width).min(1_048_576.0) as usize;
            let h = width / n as f64;
            let (la, _) = (a.ln(), b.ln());
            let step = (s * h).exp();
            let mut power = (s * (la + h)).exp();
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 1..n {
                let u = la + h * i as f64;
                acc += power * bump.value(u.exp());
                power *= step;
            }
            total += acc * h;
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_values_and_support() {
        let w = SmoothWeight::bump(1.0, 2.0).unwrap();
        assert_eq!(w.eval(1.5), 1.0);
        assert_eq!(w.eval(1.0), 0.0);
        assert_eq!(w.eval(2.5), 0.0);
        assert!((w.sup_norm() - 1.0).abs() < 1e-12);
        assert!(SmoothWeight::bump(2.0, 1.0).is_err());
        assert!(SmoothWeight::bump(0.0, 1.0).is_err());
    }

    #[test]
    fn taylor_derivatives_match_finite_differences() {
        let w = SmoothWeight::bump_with_sharpness(1.0, 3.0, 2.0).unwrap();
        let w = SmoothWeight::linear_combination(&[(1.0, &w), (-0.5, &w.dilated(1.3))]).unwrap();
        let h = 1e-4;
        for &x in &[1.2, 1.7, 2.2, 2.9, 3.5] {
            let d = w.derivatives(x, 4);
            let fd1 = (w.eval(x + h) - w.eval(x - h)) / (2.0 * h);
            let fd2 = (w.eval(x + h) - 2.0 * w.eval(x) + w.eval(x - h)) / (h * h);
            let fd3 = (w.derivative(x + h, 2) - w.derivative(x - h, 2)) / (2.0 * h);
            assert!((fd1 - d[1]).abs() < 1e-6 * (1.0 + d[1].abs()), "x={x}");
            assert!((fd2 - d[2]).abs() < 1e-4 * (1.0 + d[2].abs()), "x={x}");
            assert!((fd3 - d[3]).abs() < 1e-5 * (1.0 + d[3].abs()), "x={x}");
        }
    }

    #[test]
    fn certified_bounds_hold_on_a_dense_grid() {
        let mut w = SmoothWeight::bump(1.0, 2.0).unwrap();
        let bounds = w.certify(6).unwrap().to_vec();
        for x in w.grid(30_011) {
            for (j, d) in w.derivatives(x, 6).iter().enumerate() {
                assert!(d.abs() <= bounds[j], "j={j} x={x}");
            }
        }
    }

    #[test]
    fn integrals_and_mellin() {
        let w = SmoothWeight::bump(1.0, 2.0).unwrap();
        // Mellin transform at s = 1 and s = 2 are the integral and first moment
        let i0 = w.integral();
        let i1 = w.integrate_against(|x| x);
        assert!((w.mellin(Complex64::new(1.0, 0.0)).re - i0).abs() < 1e-12);
        assert!((w.mellin(Complex64::new(2.0, 0.0)).re - i1).abs() < 1e-12);
        // symmetric bump on [1, 2]: first moment is 1.5 times the integral
        assert!((i1 - 1.5 * i0).abs() < 1e-12);
        // dilation: int V(x/l) dx = l int V
        assert!((w.dilated(1.7).integral() - 1.7 * i0).abs() < 1e-12);
    }
}
