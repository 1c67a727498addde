//! Complex log-gamma and overflow-free logarithms of sine and cosine.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// B_{2k} / (2k (2k - 1)) for k = 1..=10.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

/// `log Gamma(z)` on some branch; only `exp` of the result (and sums of such) is meaningful.
///
/// Uses reflection for `Re z < 1/2`, an upward shift to `Re z >= 10`, and a ten-term
/// Stirling series, which is accurate to about 1e-16 relative for `|z| >= 10`.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let pi = Complex64::new(PI, 0.0);
        return Complex64::new(PI.ln(), 0.0) - ln_sin(pi * z) - ln_gamma(1.0 - z);
    }
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    if w.re < 10.0 {
        let steps = (10.0 - w.re).ceil() as usize;
        let mut product = Complex64::new(1.0, 0.0);
        for _ in 0..steps {
            product *= w;
            w += 1.0;
        }
        shift = product.ln();
    }
    let inv = 1.0 / w;
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut power = inv;
    for c in STIRLING {
        series += power * c;
        power *= inv2;
    }
    (w - 0.5) * w.ln() - w + LN_SQRT_2PI + series - shift
}

pub fn gamma(z: Complex64) -> Complex64 {
    ln_gamma(z).exp()
}

/// `log sin(w)` without overflow for large `|Im w|`.
pub fn ln_sin(w: Complex64) -> Complex64 {
    let i = Complex64::i();
    if w.im >= 0.0 {
        // sin w = (i/2) e^{-iw} (1 - e^{2iw})
        let q = (2.0 * i * w).exp();
        Complex64::new(-LN_2, PI / 2.0) - i * w + (1.0 - q).ln()
    } else {
        // sin w = (-i/2) e^{iw} (1 - e^{-2iw})
        let q = (-2.0 * i * w).exp();
        Complex64::new(-LN_2, -PI / 2.0) + i * w + (1.0 - q).ln()
    }
}

/// `log cos(w)` without overflow for large `|Im w|`.
pub fn ln_cos(w: Complex64) -> Complex64 {
    let i = Complex64::i();
    if w.im >= 0.0 {
        // cos w = e^{-iw} (1 + e^{2iw}) / 2
        let q = (2.0 * i * w).exp();
        Complex64::new(-LN_2, 0.0) - i * w + (1.0 + q).ln()
    } else {
        let q = (-2.0 * i * w).exp();
        Complex64::new(-LN_2, 0.0) + i * w + (1.0 + q).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn real_values() {
        let r = rel(gamma(c(0.5, 0.0)), c(PI.sqrt(), 0.0));
        assert!(r < 1e-14, "{r}");
        assert!(rel(gamma(c(5.0, 0.0)), c(24.0, 0.0)) < 1e-14);
        assert!(rel(gamma(c(-0.5, 0.0)), c(-2.0 * PI.sqrt(), 0.0)) < 1e-14);
        assert!(rel(gamma(c(0.1, 0.0)), c(9.513_507_698_668_732, 0.0)) < 1e-14);
        assert!(rel(gamma(c(171.5, 0.0)), c(9.483_367_566_824_795e307, 0.0)) < 1e-12);
    }

    #[test]
    fn complex_identities() {
        // |Gamma(i t)|^2 = pi / (t sinh(pi t))
        for t in [0.3, 1.0, 7.5, 40.0, 300.0] {
            let lhs = 2.0 * ln_gamma(c(0.0, t)).re;
            // log sinh(pi t) without overflow
            let ln_sinh = PI * t + (-(-2.0 * PI * t).exp_m1()).ln() - std::f64::consts::LN_2;
            let rhs = PI.ln() - t.ln() - ln_sinh;
            assert!((lhs - rhs).abs() < 1e-12 * rhs.abs().max(1.0), "t={t}");
            // |Gamma(1/2 + i t)|^2 = pi / cosh(pi t)
            let lhs = 2.0 * ln_gamma(c(0.5, t)).re;
            let ln_cosh = PI * t + (-2.0 * PI * t).exp().ln_1p() - std::f64::consts::LN_2;
            let rhs = PI.ln() - ln_cosh;
            assert!((lhs - rhs).abs() < 1e-12 * rhs.abs().max(1.0), "t={t}");
        }
        // recurrence Gamma(z + 1) = z Gamma(z) across the reflection and shift boundaries
        for z in [c(0.3, 2.0), c(-3.7, 0.4), c(9.5, -20.0), c(0.49, 0.0), c(-0.2, -50.0)] {
            let lhs = ln_gamma(z + 1.0).exp();
            let rhs = z * ln_gamma(z).exp();
            assert!(rel(lhs, rhs) < 1e-12, "z={z}");
        }
        // Gamma(1 + i) = 0.4980156681183560 - 0.1549498283018106 i
        assert!(rel(gamma(c(1.0, 1.0)), c(0.498_015_668_118_356, -0.154_949_828_301_810_6)) < 1e-14);
        // Schwarz reflection
        let z = c(2.3, 4.1);
        assert!(rel(gamma(z.conj()), gamma(z).conj()) < 1e-14);
    }

    #[test]
    fn trig_logs() {
        for w in [c(0.3, 0.2), c(-1.0, -3.0), c(2.0, 0.0), c(0.7, 30.0), c(10.0, -0.5)] {
            assert!(rel(ln_sin(w).exp(), w.sin()) < 1e-13, "sin {w}");
            assert!(rel(ln_cos(w).exp(), w.cos()) < 1e-13, "cos {w}");
        }
        // values that would overflow directly
        let w = c(0.25, 1000.0);
        let expected_re = 1000.0 - LN_2;
        assert!((ln_sin(w).re - expected_re).abs() < 1e-12);
        assert!((ln_cos(w).re - expected_re).abs() < 1e-12);
    }
}
