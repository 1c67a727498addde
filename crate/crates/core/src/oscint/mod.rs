//! Oscillatory integrals `int e(f(x)) V(x) dx` with the phases of the twisted-sum analysis:
//! adaptive quadrature, stationary phase, derivative tests and integration-by-parts cutoffs.

mod frakj;
mod sampler;
mod stationary;
mod truncation;
pub mod weight;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expsums::e;
use crate::quad::{integrate_panels, Quadrature};

pub use frakj::{
    frak_j, frakj_acceptance_grid, frakj_bound_fit, frakj_outer_phase, frakj_outer_phase_derivative, frakj_scale_for,
    FrakJBoundFit, FrakJParams, FrakJReport, Triple,
};
pub use sampler::FourierSampler;
pub use stationary::{stationary_phase_main_term, StationaryPointReport};
pub use truncation::{truncation_cutoff, truncation_envelope, TruncationFamily};
pub use weight::SmoothWeight;

/// Largest `|t|` accepted by the quadrature routines.
pub const MAX_FREQUENCY: f64 = 1e5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    /// `-t log x / 2 pi - n t / (N x)`.
    KeyLemma,
    /// The key-lemma phase plus the linear Fourier term `-r N p x / (M^2 l t)`.
    JIt,
    /// As `JIt` with `n = N y` for a real `y`; the stationary point is the positive root of a
    /// quadratic and the other root is flagged when it also lies in the support.
    FrakJ,
}

/// Phase and amplitude of `int x^{-it} e(-n t/(N x)) V(x) e(-r N p x/(M^2 l t)) dx`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OscillatorySpec {
    pub t: f64,
    pub n_scale: f64,
    pub modulus: u64,
    /// The dual variable `n`; real so that `n = N y` is representable.
    pub n: f64,
    pub r: i64,
    pub p: u64,
    pub ell: u64,
    pub weight: SmoothWeight,
    pub kind: PhaseKind,
}

impl OscillatorySpec {
    pub fn key_lemma(t: f64, n_scale: f64, modulus: u64, n: f64, weight: SmoothWeight) -> Self {
        OscillatorySpec {
            t,
            n_scale,
            modulus,
            n,
            r: 0,
            p: 1,
            ell: 1,
            weight,
            kind: PhaseKind::KeyLemma,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn j_it(t: f64, n_scale: f64, modulus: u64, n: f64, r: i64, p: u64, ell: u64, weight: SmoothWeight) -> Self {
        OscillatorySpec {
            t,
            n_scale,
            modulus,
            n,
            r,
            p,
            ell,
            weight,
            kind: PhaseKind::JIt,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.n_scale > 0.0) || self.modulus == 0 || self.p == 0 || self.ell == 0 {
            return Err(Error::domain("oscillatory spec needs N > 0 and positive M, p, l"));
        }
        Ok(())
    }

    /// Coefficient `t / 2 pi` of `-log x`.
    pub fn log_coefficient(&self) -> f64 {
        self.t / (2.0 * PI)
    }

    /// Coefficient `n t / N` of `-1/x`.
    pub fn hyperbolic_coefficient(&self) -> f64 {
        self.n * self.t / self.n_scale
    }

    /// Frequency `r N p / (M^2 l t)` of the linear term (zero for the key-lemma phase).
    pub fn linear_frequency(&self) -> f64 {
        match self.kind {
            PhaseKind::KeyLemma => 0.0,
            PhaseKind::JIt | PhaseKind::FrakJ => {
                let m = self.modulus as f64;
                self.r as f64 * self.n_scale * self.p as f64 / (m * m * self.ell as f64 * self.t)
            }
        }
    }

    pub fn phase(&self, x: f64) -> f64 {
        -self.log_coefficient() * x.ln() - self.hyperbolic_coefficient() / x - self.linear_frequency() * x
    }

    /// `f^{(k)}(x)` for `k >= 1`.
    pub fn phase_derivative(&self, x: f64, k: u32) -> f64 {
        let a = self.log_coefficient();
        let b = self.hyperbolic_coefficient();
        let mut fact_km1 = 1.0;
        for i in 1..k {
            fact_km1 *= i as f64;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        // d^k/dx^k (-a log x) = a (-1)^k (k-1)! / x^k ; d^k (-b/x) = -b (-1)^k k! / x^{k+1}
        let mut d = a * sign * fact_km1 / x.powi(k as i32) - b * sign * fact_km1 * k as f64 / x.powi(k as i32 + 1);
        if k == 1 {
            d -= self.linear_frequency();
        }
        d
    }

    /// `e(f(x)) V(x)`.
    pub fn integrand(&self, x: f64) -> Complex64 {
        let v = self.weight.eval(x);
        if v == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        e(self.phase(x)) * v
    }
}

/// `int e(f(x)) V(x) dx` to absolute error `tol`.
///
/// Initial panels each span at most one oscillation, so the 21-point rule starts with at least
/// ten nodes per oscillation; panels are then bisected adaptively.
pub fn integrate_oscillatory(spec: &OscillatorySpec, tol: f64) -> Result<Quadrature> {
    spec.validate()?;
    if spec.t.abs() > MAX_FREQUENCY {
        return Err(Error::domain(format!(
            "|t| = {} exceeds the oscillation budget {MAX_FREQUENCY}",
            spec.t
        )));
    }
    let breaks = oscillation_breakpoints(spec, 1.0);
    integrate_panels(&|x| spec.integrand(x), &breaks, tol, 400_000)
}

/// Breakpoints splitting the support into panels of at most `cycles` oscillations (at least 8).
fn oscillation_breakpoints(spec: &OscillatorySpec, cycles: f64) -> Vec<f64> {
    let (a, b) = spec.weight.support();
    let samples = 4096;
    let h = (b - a) / samples as f64;
    let mut breaks = vec![a];
    let mut acc = 0.0;
    let min_panel = (b - a) / 8.0;
    let mut last = a;
    for i in 0..samples {
        let x = a + h * (i as f64 + 0.5);
        acc += spec.phase_derivative(x, 1).abs() * h;
        let right = x + 0.5 * h;
        if acc >= cycles || right - last >= min_panel {
            breaks.push(right);
            last = right;
            acc = 0.0;
        }
    }
    if *breaks.last().unwrap() < b {
        breaks.push(b);
    } else {
        *breaks.last_mut().unwrap() = b;
    }
    breaks.dedup();
    breaks
}

/// Checks that `f^{(order)}` keeps one sign on the support; returns `min |f^{(order)}|`.
fn monotone_min(spec: &OscillatorySpec, order: u32) -> Result<f64> {
    let (a, b) = spec.weight.support();
    let n = 4000;
    let mut min = f64::INFINITY;
    let mut sign = 0.0;
    for i in 0..=n {
        let x = a + (b - a) * i as f64 / n as f64;
        let d = spec.phase_derivative(x, order);
        if sign == 0.0 {
            sign = d.signum();
        } else if d.signum() != sign || d == 0.0 {
            return Err(Error::precondition(format!(
                "phase derivative of order {order} changes sign near x = {x:.6}"
            )));
        }
        min = min.min(d.abs());
    }
    Ok(min)
}

/// Classical first or second derivative test bound for `|int e(f) V|`.
///
/// Order 1: `max(1, (TV(V) + sup|V|)/2 pi) / min|f'|`, from one integration by parts against
/// the monotone `1/f'`. Order 2: `4 max(1, 2 TV(V)/sqrt(2 pi)) / sqrt(min|f''|)`, the van der
/// Corput constant for `int e(f)` over subintervals carried through partial summation.
pub fn derivative_test_bound(spec: &OscillatorySpec, order: u32) -> Result<f64> {
    spec.validate()?;
    let tv = spec.weight.total_variation();
    let sup = spec.weight.sup_norm();
    match order {
        1 => {
            // 1/f' must be monotone, which holds when f'' keeps one sign
            let m = monotone_min(spec, 1)?;
            monotone_min(spec, 2)?;
            Ok(1.0f64.max((tv + sup) / (2.0 * PI)) / m)
        }
        2 => {
            let m = monotone_min(spec, 2)?;
            Ok(4.0 * 1.0f64.max(2.0 * tv / (2.0 * PI).sqrt()) / m.sqrt())
        }
        _ => Err(Error::domain("derivative test order must be 1 or 2")),
    }
}
