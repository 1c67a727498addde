use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::keylemma::sampler_density;
use super::{power_it, stationary_amplitude, ExperimentConfig};
use crate::arith::mod_inverse;
use crate::error::{Error, Result};
use crate::expsums::{e, twisted_kloosterman_table, unit_root};
use crate::oscint::{truncation_cutoff, FourierSampler, TruncationFamily};

/// `M^{3/2} t^{3/2} / (N P^2)`.
fn f1_normalization(config: &ExperimentConfig) -> f64 {
    let (m, t) = (config.modulus as f64, config.t);
    m.powf(1.5) * t.powf(1.5) / (config.n_scale * (config.p_anchor * config.p_anchor) as f64)
}

/// The `(p, l)` pairs of the amplifier in a fixed order.
fn prime_pairs(config: &ExperimentConfig) -> Vec<(u64, u64)> {
    let ls = config.l_primes();
    config
        .p_primes()
        .into_iter()
        .flat_map(|p| ls.iter().map(move |&l| (p, l)))
        .collect()
}

/// `F1` restricted to `r` with `keep(p, r)`.
fn f1_filtered(config: &ExperimentConfig, keep: impl Fn(u64, u64) -> bool + Sync) -> Result<Complex64> {
    config.validate()?;
    let chi = config.character()?;
    let coefficients = config.weighted_coefficients()?;
    let m = config.modulus;
    let t = config.t;
    let (va, vb) = config.inner_weight.support();
    let parts: Vec<Result<Complex64>> = prime_pairs(config)
        .par_iter()
        .map(|&(p, ell)| -> Result<Complex64> {
            let scale = config.r_scale(p, ell);
            let first = (scale * va).floor() as u64 + 1;
            let last = (scale * vb).ceil() as u64;
            let mut acc = Complex64::new(0.0, 0.0);
            let mut classes = Vec::new();
            for r in first..=last {
                let v = config.inner_weight.eval(r as f64 / scale);
                let chi_r = chi.values()[(r % m) as usize];
                if v == 0.0 || chi_r == Complex64::new(0.0, 0.0) || !keep(p, r) {
                    continue;
                }
                // sum_n lambda(1, n) w(n/N) e(-n k / q) with k = p Mbar mod q, grouped by n mod q
                let q = ell * r;
                let k = (p % q) * mod_inverse(m as i64, q)?.value() % q;
                classes.clear();
                classes.resize(q as usize, 0.0);
                for &(n, a) in &coefficients {
                    classes[(n % q) as usize] += a;
                }
                let inner: Complex64 = classes
                    .iter()
                    .enumerate()
                    .map(|(res, &c)| unit_root((q - res as u64 * k % q) % q, q) * c)
                    .sum();
                acc += chi_r * power_it(r as f64, t) * v * inner;
            }
            Ok(chi.conj().evaluate(p as i64)
                * power_it(p as f64, -t)
                * chi.evaluate(ell as i64)
                * power_it(ell as f64, t)
                * acc)
        })
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for part in parts {
        total += part?;
    }
    Ok(total * f1_normalization(config))
}

/// `F1` by direct evaluation of the quadruple sum over `p, l, r, n`.
pub fn f1_sum(config: &ExperimentConfig) -> Result<Complex64> {
    f1_filtered(config, |_, _| true)
}

/// The part of `F1` with `p | r`, against its expected size `N^{3/2} / (P M t)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SharpDiagnostic {
    pub value: Complex64,
    pub envelope: f64,
    /// `|value| / envelope`, the fitted constant.
    pub ratio: f64,
}

pub fn f1_sharp_diagnostic(config: &ExperimentConfig) -> Result<SharpDiagnostic> {
    let value = f1_filtered(config, |p, r| r % p == 0)?;
    let envelope = config.n_scale.powf(1.5) / (config.p_anchor as f64 * config.modulus as f64 * config.t);
    Ok(SharpDiagnostic {
        value,
        envelope,
        ratio: value.norm() / envelope,
    })
}

/// `F1` split by Poisson summation in `r` into its zero frequency and the dual term.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualDecomposition {
    pub r_max: u64,
    /// Zero frequency with exact prime weights `p / P^2`, `1 / l` and phase `(N / M t)^{-it}`.
    pub zero_frequency: Complex64,
    /// Nonzero frequencies with the same exact weights, so `F1 = zero_frequency + dual_exact`.
    pub dual_exact: Complex64,
    /// `O` with the simplified weights `1 / (P L)`.
    pub o_sum: Complex64,
    pub quadrature_error: f64,
}

/// Builds the zero and nonzero frequencies of `F1` from
/// `I_b(nu) = int x^{-it} V(x) e(-nu x) sum_{n = b mod M} lambda(1,n) w(n/N) e(-n t/(N x)) dx`,
/// so each frequency costs one pass over the `x` grid instead of one per `n`.
pub fn dual_decomposition(config: &ExperimentConfig) -> Result<DualDecomposition> {
    config.validate()?;
    let chi = config.character()?;
    let m = config.modulus;
    let mf = m as f64;
    let t = config.t;
    let coefficients = config.weighted_coefficients()?;
    let family = TruncationFamily::new(
        m,
        t,
        config.n_scale,
        config.p_anchor,
        config.l_anchor,
        config.inner_weight.clone(),
    );
    let r_max = truncation_cutoff(&family)?;
    let pairs = prime_pairs(config);
    let step_of = |p: u64, ell: u64| config.n_scale * p as f64 / (mf * mf * ell as f64 * t);
    let nu_max = pairs.iter().map(|&(p, l)| step_of(p, l)).fold(0.0, f64::max) * r_max as f64;
    let n_max = coefficients.last().map_or(0.0, |c| c.0 as f64);

    let (a, b) = config.inner_weight.support();
    let density = sampler_density(config, n_max, nu_max);
    let nodes = (((b - a) * density).ceil() as usize).div_ceil(2) * 2;
    let h = (b - a) / nodes as f64;
    let xs: Vec<f64> = (1..nodes).map(|i| a + h * i as f64).collect();
    // amplitudes[b][i] = x_i^{-it} V(x_i) sum_{n = b} a_n e(-n t / (N x_i))
    let columns: Vec<Vec<Complex64>> = xs
        .par_iter()
        .map(|&x| {
            let mut by_class = vec![Complex64::new(0.0, 0.0); m as usize];
            let v = config.inner_weight.eval(x);
            if v == 0.0 {
                return by_class;
            }
            let rate = t / (config.n_scale * x);
            let mut previous = 0u64;
            let mut phase = Complex64::new(1.0, 0.0);
            let rotation = e(-rate);
            for (i, &(n, coeff)) in coefficients.iter().enumerate() {
                if i % 512 == 0 || n != previous + 1 {
                    phase = e(-((n as f64 * rate) % 1.0));
                } else {
                    phase *= rotation;
                }
                previous = n;
                by_class[(n % m) as usize] += phase * coeff;
            }
            let front = power_it(x, t) * v;
            by_class.iter_mut().for_each(|c| *c *= front);
            by_class
        })
        .collect();
    let samplers: Vec<FourierSampler> = (0..m as usize)
        .map(|class| FourierSampler::from_samples(xs[0], h, columns.iter().map(|c| c[class]).collect()))
        .collect();
    let coarse: Vec<FourierSampler> = samplers.iter().map(|s| s.coarsened()).collect();

    let table = twisted_kloosterman_table(&chi);
    let chi_bar = chi.conj();
    let per_pair: Vec<Result<(Complex64, Complex64, f64)>> = pairs
        .par_iter()
        .map(|&(p, ell)| -> Result<(Complex64, Complex64, f64)> {
            let ell_inv = mod_inverse(ell as i64, m)?.value();
            let shift = p % m * ell_inv % m;
            let step = step_of(p, ell);
            // T(h) = sum_b S_chi(h, b p lbar; M) I_b(h step)
            let frequency = |h: i64| -> (Complex64, f64) {
                let row = h.rem_euclid(m as i64) as u64 * m;
                let nu = h as f64 * step;
                let mut value = Complex64::new(0.0, 0.0);
                let mut err = 0.0;
                for class in 0..m {
                    let s = table[(row + class * shift % m) as usize];
                    if s.norm() < 1e-12 {
                        continue;
                    }
                    let fine = samplers[class as usize].eval(nu);
                    value += s * fine;
                    err += (s * (fine - coarse[class as usize].eval(nu))).norm();
                }
                (value, err)
            };
            let (zero, mut err) = frequency(0);
            let mut dual = Complex64::new(0.0, 0.0);
            for hh in (1..=r_max as i64).flat_map(|k| [k, -k]) {
                let (v, e) = frequency(hh);
                dual += v;
                err += e;
            }
            let weight = chi_bar.evaluate(p as i64) * chi.evaluate(ell as i64);
            Ok((weight * zero, weight * dual, err))
        })
        .collect();
    let p2 = (config.p_anchor * config.p_anchor) as f64;
    let exact_front = power_it(config.n_scale / (mf * t), t) * (t.sqrt() / (mf.sqrt() * p2));
    let simple_front = t.sqrt() / (mf.sqrt() * (config.p_anchor * config.l_anchor) as f64);
    let mut zero_frequency = Complex64::new(0.0, 0.0);
    let mut dual_exact = Complex64::new(0.0, 0.0);
    let mut o_sum = Complex64::new(0.0, 0.0);
    let mut quadrature_error = 0.0;
    for (&(p, ell), part) in pairs.iter().zip(per_pair) {
        let (zero, dual, err) = part?;
        let ratio = p as f64 / ell as f64;
        zero_frequency += zero * ratio;
        dual_exact += dual * ratio;
        o_sum += dual;
        quadrature_error += err * ratio;
    }
    Ok(DualDecomposition {
        r_max,
        zero_frequency: zero_frequency * exact_front,
        dual_exact: dual_exact * exact_front,
        o_sum: o_sum * simple_front,
        quadrature_error: quadrature_error * exact_front.norm(),
    })
}

/// `O` with the `r`-sum truncated at the certified cutoff.
pub fn o_sum(config: &ExperimentConfig) -> Result<Complex64> {
    Ok(dual_decomposition(config)?.o_sum)
}

/// A computed magnitude against a bound of the same shape.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnvelopeComparison {
    pub magnitude: f64,
    pub envelope: f64,
    /// `magnitude / envelope`, the fitted constant.
    pub ratio: f64,
}

impl EnvelopeComparison {
    fn new(magnitude: f64, envelope: f64) -> Self {
        EnvelopeComparison {
            magnitude,
            envelope,
            ratio: magnitude / envelope,
        }
    }
}

/// Both sides of the connection between `F1`, its dual term and the twisted sum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConnectionReport {
    pub f1: Complex64,
    pub decomposition: DualDecomposition,
    /// `|F1 - zero_frequency - dual_exact| / |F1|`: Poisson summation as an identity.
    pub identity_rel_error: f64,
    /// `sum_p p/P^2 sum_l 1/l`.
    pub prime_prefactor: f64,
    /// `sum_n lambda(1,n) chi(n) n^{-it} w(n/N) V_A(2 pi n/N)`.
    pub twisted_sum: Complex64,
    /// `prime_prefactor (2 pi / M t)^{-it} e(-t/2 pi) g / sqrt(M) twisted_sum`.
    pub main_term: Complex64,
    /// `(F1 - dual_exact) / main_term`.
    pub ratio: Complex64,
    /// `|ratio - 1|`, the stationary-phase residual of the zero frequency.
    pub residual: f64,
    pub f1_envelope: EnvelopeComparison,
    pub o_envelope: EnvelopeComparison,
}

/// Computes `F1` directly and through its dual decomposition, and compares `F1 - O` with the
/// twisted sum after dividing out the exact prime prefactors.
pub fn connection_check(config: &ExperimentConfig) -> Result<ConnectionReport> {
    let f1 = f1_sum(config)?;
    let decomposition = dual_decomposition(config)?;
    let chi = config.character()?;
    let gauss = chi.conj().gauss_sum()?;
    let (m, t, nf) = (config.modulus as f64, config.t, config.n_scale);
    let twisted_sum: Complex64 = config
        .weighted_coefficients()?
        .iter()
        .map(|&(n, a)| {
            let x0 = 2.0 * PI * n as f64 / nf;
            chi.evaluate(n as i64) * power_it(n as f64, t) * stationary_amplitude(&config.inner_weight, x0) * a
        })
        .sum();
    let prime_prefactor = config.prime_prefactor();
    let main_term =
        power_it(2.0 * PI / (m * t), t) * e(-t / (2.0 * PI)) * gauss * (prime_prefactor / m.sqrt()) * twisted_sum;
    if main_term.norm() == 0.0 {
        return Err(Error::numerical("the main term vanishes; the ratio is undefined"));
    }
    let ratio = (f1 - decomposition.dual_exact) / main_term;
    let identity_rel_error =
        (f1 - decomposition.zero_frequency - decomposition.dual_exact).norm() / f1.norm().max(1e-300);
    let (pf, lf) = (config.p_anchor as f64, config.l_anchor as f64);
    let f1_bound = nf.powf(1.5) * pf / (m * t * lf.sqrt()) + nf.powf(0.75) * (m * t * pf * lf).powf(0.25);
    let o_bound = nf.sqrt() * m * t / pf + (m * t).powf(1.5) * lf / pf;
    Ok(ConnectionReport {
        f1,
        identity_rel_error,
        prime_prefactor,
        twisted_sum,
        main_term,
        ratio,
        residual: (ratio - 1.0).norm(),
        f1_envelope: EnvelopeComparison::new(f1.norm(), f1_bound),
        o_envelope: EnvelopeComparison::new(decomposition.o_sum.norm(), o_bound),
        decomposition,
    })
}

/// Connection residuals at each `t` of `ts`, other parameters fixed.
pub fn connection_residual_scan(config: &ExperimentConfig, ts: &[f64]) -> Result<Vec<(f64, f64)>> {
    ts.iter()
        .map(|&t| {
            let mut c = config.clone();
            c.t = t;
            Ok((t, connection_check(&c)?.residual))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::keylemma::key_lhs;

    #[test]
    fn single_prime_segments_reduce_to_the_key_sum() {
        let mut config = ExperimentConfig::standard();
        config.p_anchor = 5;
        config.l_anchor = 5;
        config.n_scale = 2000.0;
        assert_eq!(config.p_primes(), vec![5]);
        assert_eq!(config.l_primes(), vec![5]);
        let chi = config.character().unwrap();
        let direct: Complex64 = config
            .weighted_coefficients()
            .unwrap()
            .iter()
            .map(|&(n, a)| key_lhs(&config, chi.values(), 5, 5, n).unwrap().0 * a)
            .sum();
        let expected = direct * f1_normalization(&config);
        let f1 = f1_sum(&config).unwrap();
        assert!((f1 - expected).norm() < 1e-9 * f1.norm(), "{f1} vs {expected}");
    }

    #[test]
    fn poisson_split_reproduces_f1() {
        let config = ExperimentConfig::standard();
        let report = connection_check(&config).unwrap();
        assert!(report.identity_rel_error < 1e-6, "{report:?}");
        assert!(report.decomposition.quadrature_error < 1e-8 * report.f1.norm());
        assert!((0.5..=2.0).contains(&report.ratio.norm()), "{:?}", report.ratio);
    }
}
