use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{OscillatorySpec, PhaseKind};
use crate::error::{Error, Result};
use crate::expsums::e;

/// Leading-order stationary phase data for `int e(f) V`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StationaryPointReport {
    pub x0: f64,
    pub f_second_at_x0: f64,
    /// `e(f(x0)) V(x0) e(sgn f''(x0) / 8) / sqrt|f''(x0)|`.
    pub leading_term: Complex64,
    /// Size of the first correction term of the stationary phase expansion.
    pub error_estimate: f64,
    /// `|f'(x0)| x0 / |t|`.
    pub residual: f64,
    /// A second root of `f'` inside the support (only possible for a negative linear frequency).
    pub other_branch: Option<f64>,
}

/// Roots of `f'(x) = 0`, i.e. of `nu x^2 + a x - b = 0` with `a = t/2 pi`, `b = n t / N`.
///
/// The first entry is the displayed branch `(-a + sqrt(a^2 + 4 nu b)) / (2 nu)`
/// (`b / a = 2 pi n / N` when `nu = 0`).
fn stationary_roots(spec: &OscillatorySpec) -> Vec<f64> {
    let a = spec.log_coefficient();
    let b = spec.hyperbolic_coefficient();
    let nu = spec.linear_frequency();
    if nu == 0.0 {
        return vec![b / a];
    }
    let disc = a * a + 4.0 * nu * b;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    // stable form of (-a + sq) / (2 nu) when 4 nu b is small against a^2
    let main = 2.0 * b / (a + sq);
    let other = (-a - sq) / (2.0 * nu);
    vec![main, other]
}

/// Leading stationary-phase term for the phase of `spec`.
///
/// For the key-lemma phase this is `(2 pi n/N)^{-it} e(-t/2 pi) V(x0) x0 sqrt(2 pi/t) e(-1/8)`
/// with `x0 = 2 pi n / N`.
pub fn stationary_phase_main_term(spec: &OscillatorySpec) -> Result<StationaryPointReport> {
    let (lo, hi) = spec.weight.support();
    let roots = stationary_roots(spec);
    let inside: Vec<f64> = roots.iter().copied().filter(|&x| x > lo && x < hi).collect();
    let mut x0 = match roots.first() {
        Some(&x) if x > lo && x < hi => x,
        _ => {
            return Err(Error::precondition(format!(
                "no interior stationary point in ({lo}, {hi}); roots {roots:?}; use the first derivative test"
            )))
        }
    };
    // one Newton polish keeps the residual at rounding level
    for _ in 0..3 {
        let d2 = spec.phase_derivative(x0, 2);
        if d2 != 0.0 {
            x0 -= spec.phase_derivative(x0, 1) / d2;
        }
    }
    let other_branch = match spec.kind {
        PhaseKind::KeyLemma => None,
        _ => inside.get(1).copied(),
    };
    let f2 = spec.phase_derivative(x0, 2);
    let f3 = spec.phase_derivative(x0, 3);
    let f4 = spec.phase_derivative(x0, 4);
    let v = spec.weight.derivatives(x0, 2);
    let amplitude = 1.0 / f2.abs().sqrt();
    let eighth = if f2 > 0.0 { 0.125 } else { -0.125 };
    let leading = e(spec.phase(x0) + eighth) * (v[0] * amplitude);
    // first correction of the expansion in psi = 2 pi f
    let (p2, p3, p4) = (2.0 * PI * f2, 2.0 * PI * f3, 2.0 * PI * f4);
    let correction = (v[2].abs() / 2.0
        + (v[1] * p3).abs() / (2.0 * p2.abs())
        + (v[0] * p4).abs() / (8.0 * p2.abs())
        + 5.0 * v[0].abs() * p3 * p3 / (24.0 * p2 * p2))
        / p2.abs();
    let error_estimate = (2.0 * PI / p2.abs()).sqrt() * correction;
    let residual = spec.phase_derivative(x0, 1).abs() * x0 / spec.t.abs();
    Ok(StationaryPointReport {
        x0,
        f_second_at_x0: f2,
        leading_term: leading,
        error_estimate,
        residual,
        other_branch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscint::{integrate_oscillatory, SmoothWeight};

    fn weight() -> SmoothWeight {
        SmoothWeight::bump(0.5, 2.5).unwrap()
    }

    #[test]
    fn key_lemma_stationary_points() {
        let n_scale = 1e4;
        let spec = OscillatorySpec::key_lemma(100.0, n_scale, 7, 1.5 * n_scale / (2.0 * PI), weight());
        let report = stationary_phase_main_term(&spec).unwrap();
        assert!((report.x0 - 1.5).abs() < 1e-12);
        assert!(report.residual < 1e-10);

        let spec = OscillatorySpec::key_lemma(100.0, n_scale, 7, n_scale / (2.0 * PI), weight());
        let report = stationary_phase_main_term(&spec).unwrap();
        assert!((report.x0 - 1.0).abs() < 1e-12);
        assert!((report.f_second_at_x0.abs() - 100.0 / (2.0 * PI)).abs() < 1e-9);
        let h = 1e-4;
        let fd = (spec.phase(1.0 + h) - 2.0 * spec.phase(1.0) + spec.phase(1.0 - h)) / (h * h);
        assert!((fd - report.f_second_at_x0).abs() < 1e-4);
    }

    #[test]
    fn key_lemma_closed_form_leading_term() {
        let (t, n_scale, n) = (200.0, 1e4, 2000.0);
        let spec = OscillatorySpec::key_lemma(t, n_scale, 7, n, weight());
        let report = stationary_phase_main_term(&spec).unwrap();
        let x0 = 2.0 * PI * n / n_scale;
        let closed = Complex64::new(0.0, -t * x0.ln()).exp()
            * e(-t / (2.0 * PI) - 0.125)
            * (weight().eval(x0) * x0 * (2.0 * PI / t).sqrt());
        assert!((report.leading_term - closed).norm() < 1e-12);
    }

    #[test]
    fn leading_term_matches_quadrature() {
        let n_scale = 1e4;
        let spec = OscillatorySpec::key_lemma(800.0, n_scale, 7, 1.3 * n_scale / (2.0 * PI), weight());
        let report = stationary_phase_main_term(&spec).unwrap();
        let q = integrate_oscillatory(&spec, 1e-13).unwrap().value;
        let diff = (q - report.leading_term).norm();
        // the e(-1/8) phase and sqrt amplitude are right when the gap is at the correction scale
        assert!(
            diff < 3.0 * report.error_estimate,
            "{diff} vs {}",
            report.error_estimate
        );
        assert!(diff < 0.01 * q.norm());
    }

    #[test]
    fn frakj_closed_form_root() {
        // choose parameters with 16 pi^2 r N p y/(M^2 t^2 l) = 3, y = 1
        let (m, t, p, ell, r) = (7u64, 100.0, 2u64, 3u64, 1i64);
        let n_scale = 3.0 * (m * m) as f64 * t * t * ell as f64 / (16.0 * PI * PI * r as f64 * p as f64);
        let kappa = 4.0 * PI * r as f64 * n_scale * p as f64 / ((m * m) as f64 * t * t * ell as f64);
        let want = 1.0 / kappa;
        let w = SmoothWeight::bump(want * 0.5, want * 2.0).unwrap();
        let mut spec = OscillatorySpec::j_it(t, n_scale, m, n_scale, r, p, ell, w);
        spec.kind = PhaseKind::FrakJ;
        let report = stationary_phase_main_term(&spec).unwrap();
        assert!((report.x0 - want).abs() < 1e-10 * want);
        assert!(report.other_branch.is_none());
    }

    #[test]
    fn missing_stationary_point_is_reported() {
        let spec = OscillatorySpec::key_lemma(100.0, 1e4, 7, 10.0, weight());
        assert!(stationary_phase_main_term(&spec).is_err());
    }
}
