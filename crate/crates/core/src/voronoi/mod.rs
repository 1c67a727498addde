//! GL(3) coefficient providers and two-sided numerical verification of the Voronoi formula
//! `sum_n lambda(m,n) e(-n a/c) w(n/N)
//!   = c sum_+- sum_{m'|mc} sum_n lambda(n,m')/(m' n) S(a' m, +-n; mc/m') x W^+-(x)`,
//! `x = N m'^2 n / (m c^3)`, `a a' = 1 mod c`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{d3, divisor_function_table, factorize, gcd_i64, mod_inverse};
use crate::bessel3::{HankelOptions, HankelPlan, Sign, SpectralParams};
use crate::error::{Error, Result};
use crate::expsums::{kloosterman, unit_root};
use crate::oscint::SmoothWeight;

/// Largest number of terms summed directly on the left side.
pub const DIRECT_SUM_BUDGET: f64 = 1e8;

/// Number of log-moments a weight must annihilate for non-cuspidal providers.
pub const REQUIRED_LOG_MOMENTS: u32 = 3;

/// Normalized Fourier coefficients `lambda(m, n)` of a GL(3) automorphic form.
pub trait CoefficientProvider: Send + Sync {
    fn name(&self) -> &str;

    fn lambda(&self, m: u64, n: u64) -> f64;

    fn spectral(&self) -> SpectralParams;

    /// False for Eisenstein-type families whose Dirichlet series has poles.
    fn is_cuspidal(&self) -> bool;

    /// A constant `C(m)` with `|lambda(n, m)| <= C(m) n` for every `n >= 1`.
    fn dual_envelope(&self, m: u64) -> f64;

    /// `[0, lambda(1,1), ..., lambda(1, limit)]`.
    fn lambda_table(&self, limit: usize) -> Vec<f64> {
        let mut table = vec![0.0; limit + 1];
        for (n, slot) in table.iter_mut().enumerate().skip(1) {
            *slot = self.lambda(1, n as u64);
        }
        table
    }
}

/// The ternary divisor function family: `lambda(1, n) = d3(n)`, trivial spectral parameters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct D3Provider;

pub fn d3_provider() -> D3Provider {
    D3Provider
}

impl CoefficientProvider for D3Provider {
    fn name(&self) -> &str {
        "d3"
    }

    /// `prod_p (a+1)(b+1)(a+b+2)/2` over `p^a || m`, `p^b || n`.
    fn lambda(&self, m: u64, n: u64) -> f64 {
        let mut exponents: BTreeMap<u64, (u32, u32)> = BTreeMap::new();
        for (p, a) in factorize(m).expect("m >= 1").factors() {
            exponents.entry(*p).or_default().0 = *a;
        }
        for (p, b) in factorize(n).expect("n >= 1").factors() {
            exponents.entry(*p).or_default().1 = *b;
        }
        exponents
            .values()
            .map(|&(a, b)| ((a + 1) * (b + 1) * (a + b + 2) / 2) as f64)
            .product()
    }

    fn spectral(&self) -> SpectralParams {
        SpectralParams::trivial()
    }

    fn is_cuspidal(&self) -> bool {
        false
    }

    /// `lambda(n, m) <= d3(n) d3(m)` and `d3(n) <= 3n/2`.
    fn dual_envelope(&self, m: u64) -> f64 {
        1.5 * d3(m) as f64
    }

    fn lambda_table(&self, limit: usize) -> Vec<f64> {
        divisor_function_table(limit, 3).into_iter().map(f64::from).collect()
    }
}

/// `factor * lambda` for another provider, used to check linearity of downstream sums.
pub struct ScaledProvider<P> {
    pub inner: P,
    pub factor: f64,
    name: String,
}

impl<P: CoefficientProvider> ScaledProvider<P> {
    pub fn new(inner: P, factor: f64) -> Self {
        let name = format!("{}x{}", factor, inner.name());
        ScaledProvider { inner, factor, name }
    }
}

impl<P: CoefficientProvider> CoefficientProvider for ScaledProvider<P> {
    fn name(&self) -> &str {
        &self.name
    }

    fn lambda(&self, m: u64, n: u64) -> f64 {
        self.factor * self.inner.lambda(m, n)
    }

    fn spectral(&self) -> SpectralParams {
        self.inner.spectral()
    }

    fn is_cuspidal(&self) -> bool {
        self.inner.is_cuspidal()
    }

    fn dual_envelope(&self, m: u64) -> f64 {
        self.factor.abs() * self.inner.dual_envelope(m)
    }

    fn lambda_table(&self, limit: usize) -> Vec<f64> {
        self.inner
            .lambda_table(limit)
            .into_iter()
            .map(|v| v * self.factor)
            .collect()
    }
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting; also returns the
/// infinity-norm condition number of the row-equilibrated matrix.
fn solve_with_condition(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<(Vec<f64>, f64)> {
    let n = b.len();
    for i in 0..n {
        let scale = a[i].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return Err(Error::numerical("singular moment matrix"));
        }
        a[i].iter_mut().for_each(|v| *v /= scale);
        b[i] /= scale;
    }
    let norm = |m: &[Vec<f64>]| {
        m.iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let a_norm = norm(&a);
    // inverse by elimination on [a | I | b]
    let mut aug: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = a[i].clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row.push(b[i]);
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| aug[x][col].abs().total_cmp(&aug[y][col].abs()))
            .expect("nonempty");
        if aug[pivot][col].abs() < 1e-300 {
            return Err(Error::numerical("singular moment matrix"));
        }
        aug.swap(col, pivot);
        let p = aug[col][col];
        aug[col].iter_mut().for_each(|v| *v /= p);
        for row in 0..n {
            if row != col {
                let factor = aug[row][col];
                if factor != 0.0 {
                    let pivot_row = aug[col].clone();
                    for (v, pv) in aug[row].iter_mut().zip(&pivot_row) {
                        *v -= factor * pv;
                    }
                }
            }
        }
    }
    let inverse: Vec<Vec<f64>> = aug.iter().map(|r| r[n..2 * n].to_vec()).collect();
    let x: Vec<f64> = aug.iter().map(|r| r[2 * n]).collect();
    Ok((x, a_norm * norm(&inverse)))
}

/// `annihilate_log_moments_with_ratio` with dilation ratio `sqrt(b/a)` of the base support.
pub fn annihilate_log_moments(base: &SmoothWeight, k: u32) -> Result<SmoothWeight> {
    let (a, b) = base.support();
    annihilate_log_moments_with_ratio(base, k, (b / a).sqrt())
}

/// `sum_{i<=k} c_i base(y / ratio^i)` with `c_0 = 1` and `int V(y) (log y)^j dy = 0` for `j < k`,
/// normalized to unit sup-norm.
pub fn annihilate_log_moments_with_ratio(base: &SmoothWeight, k: u32, ratio: f64) -> Result<SmoothWeight> {
    if k > 4 {
        return Err(Error::domain("at most 4 log-moments can be annihilated"));
    }
    if k == 0 {
        return Ok(base.clone());
    }
    if !(ratio > 1.0) {
        return Err(Error::domain("dilation ratio must exceed 1"));
    }
    let copies: Vec<SmoothWeight> = (0..=k).map(|i| base.dilated(ratio.powi(i as i32))).collect();
    let k = k as usize;
    let matrix: Vec<Vec<f64>> = (0..k)
        .map(|j| (1..=k).map(|i| copies[i].log_moment(j as u32)).collect())
        .collect();
    let rhs: Vec<f64> = (0..k).map(|j| -copies[0].log_moment(j as u32)).collect();
    let (coeffs, condition) = solve_with_condition(matrix, rhs)?;
    if condition > 1e8 {
        return Err(Error::numerical(format!(
            "moment system condition number {condition:.3e} exceeds 1e8"
        )));
    }
    let mut parts: Vec<(f64, &SmoothWeight)> = vec![(1.0, &copies[0])];
    parts.extend(coeffs.iter().zip(&copies[1..]).map(|(&c, w)| (c, w)));
    let combination = SmoothWeight::linear_combination(&parts)?;
    let sup = combination.sup_norm();
    Ok(combination.scaled(1.0 / sup).with_annihilated_log_moments(k as u32))
}

/// The weight used for Voronoi verification of non-cuspidal providers.
///
/// A sharp bump over a wide range keeps its Mellin transform small beyond `|Im s| ~ 150`, which
/// in turn keeps the certified dual sums short.
pub fn default_voronoi_weight() -> Result<SmoothWeight> {
    let base = SmoothWeight::bump_with_sharpness(1.0, 8.0, 40.0)?;
    annihilate_log_moments(&base, REQUIRED_LOG_MOMENTS)
}

fn check_modulus(a: i64, c: i64) -> Result<()> {
    if c < 1 {
        return Err(Error::domain("modulus c must be positive"));
    }
    if gcd_i64(a, c) != 1 {
        return Err(Error::domain(format!("gcd({a}, {c}) != 1")));
    }
    Ok(())
}

/// `sum_n lambda(m, n) e(-n a / c) w(n / N)` by direct summation over the support.
pub fn voronoi_lhs(
    provider: &dyn CoefficientProvider,
    m: u64,
    a: i64,
    c: i64,
    weight: &SmoothWeight,
    n_scale: f64,
) -> Result<Complex64> {
    check_modulus(a, c)?;
    let (lo, hi) = weight.support();
    let first = (n_scale * lo).floor().max(0.0) as u64 + 1;
    let last = (n_scale * hi).ceil() as u64;
    if (last - first) as f64 > DIRECT_SUM_BUDGET {
        return Err(Error::resource(
            format!("{} terms exceed the direct-sum budget", last - first),
            None,
        ));
    }
    let q = c as u64;
    let shift = (a.rem_euclid(c)) as u64;
    let table = (m == 1).then(|| provider.lambda_table(last as usize));
    // real partial sums per residue class, compensated, then one phase per class
    let mut classes = vec![(0.0f64, 0.0f64); q as usize];
    for n in first..=last {
        let w = weight.eval(n as f64 / n_scale);
        if w == 0.0 {
            continue;
        }
        let lambda = match &table {
            Some(t) => t[n as usize],
            None => provider.lambda(m, n),
        };
        let (sum, err) = &mut classes[(n % q) as usize];
        let term = lambda * w;
        let next = *sum + term;
        *err += if sum.abs() >= term.abs() {
            (*sum - next) + term
        } else {
            (term - next) + *sum
        };
        *sum = next;
    }
    Ok(classes
        .iter()
        .enumerate()
        .map(|(r, (sum, err))| {
            // e(-r a / c)
            unit_root((q - r as u64 * shift % q) % q, q) * (sum + err)
        })
        .sum())
}

/// The two Hankel transforms `W^+` and `W^-` of a weight.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualWeights {
    pub plus: HankelPlan,
    pub minus: HankelPlan,
}

impl DualWeights {
    pub fn new(weight: &SmoothWeight, params: &SpectralParams) -> Result<Self> {
        Ok(DualWeights {
            plus: HankelPlan::new(weight, Sign::Plus, params, HankelOptions::default())?,
            minus: HankelPlan::new(weight, Sign::Minus, params, HankelOptions::default())?,
        })
    }

    pub fn get(&self, sign: Sign) -> &HankelPlan {
        match sign {
            Sign::Plus => &self.plus,
            Sign::Minus => &self.minus,
        }
    }
}

/// Which form of the dual weight multiplies the Kloosterman sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualNormalization {
    /// `x W^+-(x)`.
    Weighted,
    /// `U^+-(x)`, evaluated through its own entry point.
    Unified,
}

/// Certified truncation of the dual sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    /// Dual terms with `x > x_cut` are dropped.
    pub x_cut: f64,
    /// `m'^2 n <= x_cut m c^3 / N`.
    pub dual_length: f64,
    /// Certified bound for the dropped terms.
    pub tail_bound: f64,
    pub terms: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoronoiRhs {
    pub value: Complex64,
    pub truncation: Truncation,
}

/// Precondition shared by the right side and the verification driver.
pub fn check_polar_handling(provider: &dyn CoefficientProvider, weight: &SmoothWeight) -> Result<PolarHandling> {
    if provider.is_cuspidal() {
        return Ok(PolarHandling::Cuspidal);
    }
    let k = weight.annihilated_log_moments();
    if k < REQUIRED_LOG_MOMENTS {
        return Err(Error::precondition(format!(
            "provider {} is not cuspidal: the weight needs annihilated_log_moments >= {REQUIRED_LOG_MOMENTS}, got {k}",
            provider.name()
        )));
    }
    Ok(PolarHandling::AnnihilatedLogMoments(k))
}

/// Right side of the Voronoi formula, truncated where the tail bound drops below `tolerance`.
#[allow(clippy::too_many_arguments)]
pub fn voronoi_rhs(
    provider: &dyn CoefficientProvider,
    m: u64,
    a: i64,
    c: i64,
    weight: &SmoothWeight,
    dual: &DualWeights,
    n_scale: f64,
    tolerance: f64,
    normalization: DualNormalization,
) -> Result<VoronoiRhs> {
    check_modulus(a, c)?;
    check_polar_handling(provider, weight)?;
    if !(tolerance > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let cu = c as u64;
    let mc = m * cu;
    let a_inv = mod_inverse(a, cu)?.value() as i64;
    let divisors = factorize(mc)?.divisors();
    let scale_of = |mp: u64| n_scale * (mp * mp) as f64 / (m as f64 * (cu * cu * cu) as f64);

    let tail = |x_cut: f64| -> f64 {
        let mut total = 0.0;
        for &mp in &divisors {
            let step = scale_of(mp);
            let n_cut = (x_cut / step).floor();
            let q = (mc / mp) as f64;
            let front = c as f64 * provider.dual_envelope(mp) * q / mp as f64;
            for sign in [Sign::Plus, Sign::Minus] {
                let plan = dual.get(sign);
                let best = plan
                    .tail_integrals
                    .iter()
                    .filter(|&&(s, _)| s > 2.0)
                    .map(|&(s, i)| {
                        // sum_{n > n_cut} (step n)^{1 - s}
                        let series = if n_cut >= 1.0 {
                            n_cut.powf(2.0 - s) / (s - 2.0)
                        } else {
                            1.0 + 1.0 / (s - 2.0)
                        };
                        i * step.powf(1.0 - s) * series
                    })
                    .fold(f64::INFINITY, f64::min);
                total += front * best;
            }
        }
        total
    };
    let mut x_cut = 1.0;
    let mut bound = tail(x_cut);
    while bound >= tolerance {
        x_cut *= 1.1;
        if x_cut > 1e9 {
            return Err(Error::resource(
                "dual tail cannot be certified below the tolerance",
                None,
            ));
        }
        bound = tail(x_cut);
    }

    let parts: Vec<(Complex64, usize)> = divisors
        .par_iter()
        .map(|&mp| -> (Complex64, usize) {
            let step = scale_of(mp);
            let n_cut = (x_cut / step).floor() as u64;
            let q = mc / mp;
            let am = a_inv * m as i64;
            let klo: Vec<[Complex64; 2]> = (0..q as i64)
                .map(|r| [kloosterman(am, r, q), kloosterman(am, -r, q)])
                .collect();
            let mut acc = Complex64::new(0.0, 0.0);
            for n in 1..=n_cut {
                let x = step * n as f64;
                let lambda = provider.lambda(n, mp);
                let front = lambda / (mp as f64 * n as f64);
                let k = &klo[(n % q) as usize];
                let (up, um) = match normalization {
                    DualNormalization::Weighted => (dual.plus.eval(x) * x, dual.minus.eval(x) * x),
                    DualNormalization::Unified => (dual.plus.eval_scaled(x), dual.minus.eval_scaled(x)),
                };
                acc += (k[0] * up + k[1] * um) * front;
            }
            (acc, 2 * n_cut as usize)
        })
        .collect();
    let value = parts.iter().map(|p| p.0).sum::<Complex64>() * c as f64;
    let terms = parts.iter().map(|p| p.1).sum();
    Ok(VoronoiRhs {
        value,
        truncation: Truncation {
            x_cut,
            dual_length: x_cut * (mc * cu * cu) as f64 / n_scale,
            tail_bound: bound,
            terms,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarHandling {
    Cuspidal,
    AnnihilatedLogMoments(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoronoiCase {
    pub m: u64,
    pub a: i64,
    pub c: i64,
    pub n_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoronoiReport {
    pub case: VoronoiCase,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub polar_handling: PolarHandling,
    pub truncation: Option<Truncation>,
    pub rel_error: f64,
    /// Reason the case was not evaluated, or the error it raised.
    pub skipped: Option<String>,
}

pub fn relative_error(lhs: Complex64, rhs: Complex64) -> f64 {
    (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1e-30)
}

/// Evaluates both sides on every case; failures are recorded per case.
/// The dual tail is certified to `tolerance` relative to the left side.
pub fn verify_voronoi(
    provider: &dyn CoefficientProvider,
    cases: &[VoronoiCase],
    weight: &SmoothWeight,
    tolerance: f64,
) -> Result<Vec<VoronoiReport>> {
    let polar_handling = check_polar_handling(provider, weight)?;
    let dual = DualWeights::new(weight, &provider.spectral())?;
    Ok(cases
        .iter()
        .map(|&case| {
            let mut report = VoronoiReport {
                case,
                lhs: Complex64::new(0.0, 0.0),
                rhs: Complex64::new(0.0, 0.0),
                polar_handling,
                truncation: None,
                rel_error: f64::NAN,
                skipped: None,
            };
            if case.c == 1 {
                report.skipped = Some("c = 1: the additive twist is trivial".into());
                return report;
            }
            let run = || -> Result<(Complex64, VoronoiRhs)> {
                let lhs = voronoi_lhs(provider, case.m, case.a, case.c, weight, case.n_scale)?;
                let target = tolerance * lhs.norm().max(1e-30);
                let rhs = voronoi_rhs(
                    provider,
                    case.m,
                    case.a,
                    case.c,
                    weight,
                    &dual,
                    case.n_scale,
                    target,
                    DualNormalization::Weighted,
                )?;
                Ok((lhs, rhs))
            };
            match run() {
                Ok((lhs, rhs)) => {
                    report.lhs = lhs;
                    report.rhs = rhs.value;
                    report.truncation = Some(rhs.truncation);
                    report.rel_error = relative_error(lhs, rhs.value);
                }
                Err(err) => report.skipped = Some(err.to_string()),
            }
            report
        })
        .collect())
}

/// `sum_{n <= X} lambda(1, n)^2` at each `X` of the grid.
pub fn rankin_selberg_sums(provider: &dyn CoefficientProvider, grid: &[u64]) -> Vec<f64> {
    let limit = grid.iter().copied().max().unwrap_or(0) as usize;
    let table = provider.lambda_table(limit);
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    let mut next = 0;
    let mut sorted: Vec<u64> = grid.to_vec();
    sorted.sort_unstable();
    for (n, v) in table.iter().enumerate().skip(1) {
        acc += v * v;
        while next < sorted.len() && sorted[next] == n as u64 {
            out.push(acc);
            next += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d3_examples() {
        let p = d3_provider();
        assert_eq!(p.lambda(1, 7), 3.0);
        assert_eq!(p.lambda(1, 12), 18.0);
        assert_eq!(p.lambda(5, 5), 8.0);
        let table = p.lambda_table(12);
        assert_eq!(table[12], 18.0);
    }

    #[test]
    fn hecke_relation_at_primes() {
        // lambda(p,1) lambda(1,p) = lambda(p,p) + 1
        let p = d3_provider();
        for q in [2u64, 3, 5, 7, 11] {
            assert_eq!(p.lambda(q, 1) * p.lambda(1, q), p.lambda(q, q) + 1.0);
        }
    }

    #[test]
    fn d3_matches_triple_enumeration() {
        let p = d3_provider();
        for n in 1..=60u64 {
            let mut count = 0;
            for x in 1..=n {
                for y in 1..=n {
                    if n % (x * y) == 0 {
                        count += 1;
                    }
                }
            }
            assert_eq!(p.lambda(1, n), count as f64, "n={n}");
        }
    }

    #[test]
    fn moment_annihilation() {
        let base = SmoothWeight::bump(1.0, 2.0).unwrap();
        assert_eq!(annihilate_log_moments(&base, 0).unwrap(), base);
        let one = annihilate_log_moments(&base, 1).unwrap();
        assert_eq!(one.bumps().len(), 2);
        assert!(one.integral().abs() < 1e-12);
        let three = annihilate_log_moments(&base, 3).unwrap();
        assert_eq!(three.bumps().len(), 4);
        assert!((three.sup_norm() - 1.0).abs() < 1e-9);
        for j in 0..3 {
            assert!(three.log_moment(j).abs() < 1e-10, "moment {j}: {}", three.log_moment(j));
        }
        assert!(annihilate_log_moments(&base, 5).is_err());
    }

    #[test]
    fn solved_coefficients_match_binomial_pattern() {
        // c_i = (-1)^i C(k, i) ratio^{-i}
        let base = SmoothWeight::bump(1.0, 2.0).unwrap();
        let ratio = 1.4;
        let w = annihilate_log_moments_with_ratio(&base, 3, ratio).unwrap();
        let c0 = w.bumps()[0].coeff;
        let want = [1.0, -3.0 / ratio, 3.0 / (ratio * ratio), -1.0 / ratio.powi(3)];
        for (b, want) in w.bumps().iter().zip(want) {
            assert!((b.coeff / c0 - want).abs() < 1e-9);
        }
    }

    #[test]
    fn lhs_conjugation_and_untwisted_reality() {
        let p = d3_provider();
        let w = SmoothWeight::bump(1.0, 2.0).unwrap();
        let plain = voronoi_lhs(&p, 1, 0, 1, &w, 300.0).unwrap();
        assert!(plain.im.abs() < 1e-9 * plain.re);
        let x = voronoi_lhs(&p, 1, 2, 7, &w, 300.0).unwrap();
        let y = voronoi_lhs(&p, 1, -2, 7, &w, 300.0).unwrap();
        assert!((x - y.conj()).norm() < 1e-9 * x.norm());
    }

    #[test]
    fn missing_moments_are_rejected() {
        let p = d3_provider();
        let w = SmoothWeight::bump(1.0, 2.0).unwrap();
        let err = verify_voronoi(&p, &[], &w, 1e-6).unwrap_err();
        assert!(err.to_string().contains("annihilated_log_moments"));
    }
}
