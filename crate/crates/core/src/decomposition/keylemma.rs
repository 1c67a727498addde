use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{power_it, stationary_amplitude, ExperimentConfig};
use crate::arith::{is_prime, mod_inverse};
use crate::error::{Error, Result};
use crate::expsums::{e, twisted_kloosterman_table, unit_root};
use crate::oscint::{stationary_phase_main_term, truncation_cutoff, FourierSampler, OscillatorySpec, TruncationFamily};

/// Both sides of the Poisson identity for
/// `sum_r chi(r) r^{-it} e(-n p Mbar / (l r)) V(r / (N p / M l t))`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KeyIdentityReport {
    pub p: u64,
    pub ell: u64,
    pub n: u64,
    /// `N p / (M l t)`.
    pub r_scale: f64,
    pub r_terms: usize,
    /// Dual frequencies `0 < |h| <= r_max` are kept.
    pub r_max: u64,
    pub lhs: Complex64,
    /// `(1/M) R^{1-it} S_chi(0, n p lbar; M) J(0)`.
    pub zero_frequency: Complex64,
    /// `(1/M) R^{1-it} sum_{h != 0} S_chi(h, n p lbar; M) J(h)`.
    pub dual_sum: Complex64,
    pub rhs_exact: Complex64,
    pub rel_error_exact: f64,
    /// Estimated quadrature error of `rhs_exact`.
    pub quadrature_error: f64,
    /// The zero frequency with `J(0)` replaced by its leading stationary-phase term.
    pub main_term_stationary: Complex64,
    pub rhs_stationary: Complex64,
    pub rel_error_stationary: f64,
    /// `J(0) = int x^{-it} e(-n t/(N x)) V(x) dx`.
    pub zero_frequency_integral: Complex64,
    pub stationary_leading: Complex64,
    /// `|J(0) - leading term|`.
    pub stationary_residual: f64,
    /// Angle between `lhs - dual_sum` and the closed-form main term, in radians.
    pub phase_error: f64,
}

/// Nodes per unit length for samplers of `J(nu)` with `|nu| <= nu_max`.
pub(crate) fn sampler_density(config: &ExperimentConfig, n_max: f64, nu_max: f64) -> f64 {
    let (a, _) = config.inner_weight.support();
    let phase_rate = config.t.abs() / (2.0 * PI * a) + n_max * config.t.abs() / (config.n_scale * a * a);
    2.0 * (phase_rate + nu_max.abs()) + 160.0
}

fn check_primes(config: &ExperimentConfig, p: u64, ell: u64) -> Result<()> {
    for q in [p, ell] {
        if !is_prime(q) || q == config.modulus {
            return Err(Error::domain(format!(
                "{q} must be a prime other than M = {}",
                config.modulus
            )));
        }
    }
    Ok(())
}

/// `sum_r chi(r) r^{-it} e(-n p Mbar/(l r)) V(r / R)` over the support of `V`.
pub(crate) fn key_lhs(
    config: &ExperimentConfig,
    chi_values: &[Complex64],
    p: u64,
    ell: u64,
    n: u64,
) -> Result<(Complex64, usize)> {
    let m = config.modulus;
    let scale = config.r_scale(p, ell);
    let (a, b) = config.inner_weight.support();
    let first = (scale * a).floor() as u64 + 1;
    let last = (scale * b).ceil() as u64;
    let mut total = Complex64::new(0.0, 0.0);
    let mut terms = 0;
    for r in first..=last {
        let v = config.inner_weight.eval(r as f64 / scale);
        let chi = chi_values[(r % m) as usize];
        if v == 0.0 || chi == Complex64::new(0.0, 0.0) {
            continue;
        }
        let q = ell * r;
        let m_inv = mod_inverse(m as i64, q)?.value();
        let k = ((n % q) as u128 * (p % q) as u128 % q as u128 * m_inv as u128 % q as u128) as u64;
        total += chi * power_it(r as f64, config.t) * unit_root((q - k) % q, q) * v;
        terms += 1;
    }
    Ok((total, terms))
}

/// Evaluates the key identity at one `(p, l, n)`: the direct `r`-sum against the exact Poisson
/// dual (zero frequency plus truncated nonzero frequencies) and against the stationary-phase
/// form of the zero frequency.
pub fn key_identity_check(config: &ExperimentConfig, p: u64, ell: u64, n: u64) -> Result<KeyIdentityReport> {
    config.validate()?;
    check_primes(config, p, ell)?;
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    let chi = config.character()?;
    let m = config.modulus;
    let t = config.t;
    let scale = config.r_scale(p, ell);
    let (lhs, r_terms) = key_lhs(config, chi.values(), p, ell, n)?;

    let mut family = TruncationFamily::new(m, t, config.n_scale, p, ell, config.inner_weight.clone());
    family.n_range = (n as f64, n as f64);
    let r_max = truncation_cutoff(&family)?;
    let step = config.n_scale * p as f64 / ((m * m) as f64 * ell as f64 * t);
    let density = sampler_density(config, n as f64, r_max as f64 * step);
    let sampler = FourierSampler::for_j_it(&config.inner_weight, t, n as f64, config.n_scale, density);
    let coarse = sampler.coarsened();

    let table = twisted_kloosterman_table(&chi);
    let ell_inv = mod_inverse(ell as i64, m)?.value();
    let b = (n % m) * (p % m) % m * ell_inv % m;
    let kloosterman = |h: i64| table[(h.rem_euclid(m as i64) as u64 * m + b) as usize];
    // (1/M) R^{1-it}
    let front = power_it(scale, t) * (scale / m as f64);

    let j0 = sampler.eval(0.0);
    let zero_frequency = front * kloosterman(0) * j0;
    let mut dual = Complex64::new(0.0, 0.0);
    let mut quadrature = (kloosterman(0) * (j0 - coarse.eval(0.0))).norm();
    for h in (1..=r_max as i64).flat_map(|h| [h, -h]) {
        let nu = h as f64 * step;
        let j = sampler.eval(nu);
        let s = kloosterman(h);
        dual += s * j;
        quadrature += (s * (j - coarse.eval(nu))).norm();
    }
    let dual_sum = front * dual;
    let rhs_exact = zero_frequency + dual_sum;
    let quadrature_error = quadrature * front.norm();

    let spec = OscillatorySpec::key_lemma(t, config.n_scale, m, n as f64, config.inner_weight.clone());
    let stationary = stationary_phase_main_term(&spec)?;
    let main_term_stationary = front * kloosterman(0) * stationary.leading_term;
    let rhs_stationary = main_term_stationary + dual_sum;

    // closed form of the main term: N p / (M^{3/2} t^{3/2} l) g / sqrt(M) (2 pi p / (M l t))^{-it}
    // e(-t / 2 pi) chi(p lbar) chi(n) n^{-it} V_A(2 pi n / N)
    let gauss = chi.conj().gauss_sum()?;
    let mf = m as f64;
    let x0 = 2.0 * PI * n as f64 / config.n_scale;
    let closed = gauss
        * chi.evaluate((p * ell_inv) as i64)
        * chi.evaluate(n as i64)
        * power_it(2.0 * PI * p as f64 / (mf * ell as f64 * t), t)
        * power_it(n as f64, t)
        * e(-t / (2.0 * PI))
        * stationary_amplitude(&config.inner_weight, x0)
        * (config.n_scale * p as f64 / (mf.powf(1.5) * t.powf(1.5) * ell as f64) / mf.sqrt());
    let phase_error = if closed.norm() > 0.0 {
        ((lhs - dual_sum) / closed).arg().abs()
    } else {
        f64::NAN
    };
    let rel = |a: Complex64, b: Complex64| (a - b).norm() / a.norm().max(b.norm()).max(1e-30);
    Ok(KeyIdentityReport {
        p,
        ell,
        n,
        r_scale: scale,
        r_terms,
        r_max,
        lhs,
        zero_frequency,
        dual_sum,
        rhs_exact,
        rel_error_exact: rel(lhs, rhs_exact),
        quadrature_error,
        main_term_stationary,
        rhs_stationary,
        rel_error_stationary: rel(lhs, rhs_stationary),
        zero_frequency_integral: j0,
        stationary_leading: stationary.leading_term,
        stationary_residual: (j0 - stationary.leading_term).norm(),
        phase_error,
    })
}

/// Stationary-phase residuals `|J(0) - leading term|` of the zero frequency across `t`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualScan {
    pub ts: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `log2(residual(t_{i+1}) / residual(t_i))`.
    pub log2_ratios: Vec<f64>,
    pub mean_log2_ratio: f64,
}

/// Residual of the key-lemma zero frequency at `n = n_ratio N` for each `t` of `ts`.
pub fn stationary_residual_scan(config: &ExperimentConfig, n_ratio: f64, ts: &[f64]) -> Result<ResidualScan> {
    if ts.len() < 2 {
        return Err(Error::domain("a residual scan needs at least two values of t"));
    }
    let mut residuals = Vec::with_capacity(ts.len());
    for &t in ts {
        let mut c = config.clone();
        c.t = t;
        c.validate()?;
        let n = n_ratio * c.n_scale;
        let sampler = FourierSampler::for_j_it(&c.inner_weight, t, n, c.n_scale, sampler_density(&c, n, 0.0));
        let spec = OscillatorySpec::key_lemma(t, c.n_scale, c.modulus, n, c.inner_weight.clone());
        let leading = stationary_phase_main_term(&spec)?.leading_term;
        residuals.push((sampler.eval(0.0) - leading).norm());
    }
    let log2_ratios: Vec<f64> = residuals.windows(2).map(|w| (w[1] / w[0]).log2()).collect();
    let mean_log2_ratio = log2_ratios.iter().sum::<f64>() / log2_ratios.len() as f64;
    Ok(ResidualScan {
        ts: ts.to_vec(),
        residuals,
        log2_ratios,
        mean_log2_ratio,
    })
}
