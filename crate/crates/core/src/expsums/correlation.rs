use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{kloosterman, twisted_kloosterman, twisted_kloosterman_table, unit_inverses, unit_root};
use crate::arith::{gcd, gcd_i64, is_prime, lcm, mod_inverse, omega, ramanujan_sum, reduce};
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};

/// Parameters of `C = sum_{x mod [s1,s2]} S(t1 x, 1; s1) S(t2 x, 1; s2) e(n x / [s1,s2])`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrelationParams {
    pub s1: u64,
    pub s2: u64,
    pub t1: i64,
    pub t2: i64,
    pub n: i64,
}

impl CorrelationParams {
    pub fn modulus(&self) -> u64 {
        lcm(self.s1, self.s2).expect("lcm overflow")
    }

    /// `w2^2 t1 - w1^2 t2` with `s_i = w_i gcd(s1, s2)`.
    pub fn delta(&self) -> i128 {
        let g = gcd(self.s1, self.s2);
        let (w1, w2) = ((self.s1 / g) as i128, (self.s2 / g) as i128);
        w2 * w2 * self.t1 as i128 - w1 * w1 * self.t2 as i128
    }
}

/// `S(u, 1; s)` for every `u mod s`.
fn kloosterman_table(s: u64) -> Vec<Complex64> {
    (0..s).map(|u| kloosterman(u as i64, 1, s)).collect()
}

/// Direct evaluation of the correlation sum.
pub fn correlation_sum(params: &CorrelationParams) -> Complex64 {
    let CorrelationParams { s1, s2, t1, t2, n } = *params;
    assert!(s1 >= 1 && s2 >= 1, "moduli must be positive");
    let l = params.modulus();
    let k1 = kloosterman_table(s1);
    let k2 = kloosterman_table(s2);
    let (t1, t2, n) = (reduce(t1, s1), reduce(t2, s2), reduce(n, l));
    let mut acc = Complex64::new(0.0, 0.0);
    for x in 0..l {
        let u1 = ((t1 as u128 * x as u128) % s1 as u128) as usize;
        let u2 = ((t2 as u128 * x as u128) % s2 as u128) as usize;
        let phase = ((n as u128 * x as u128) % l as u128) as u64;
        acc += k1[u1] * k2[u2] * unit_root(phase, l);
    }
    acc
}

/// The bound of the correlation lemma without its `2^{c0 omega}` factor:
/// `(s1 s2 [s1,s2])^{1/2} (Delta, n, s1, s2) / (n, s1, s2)^{1/2}`.
pub fn correlation_bound(params: &CorrelationParams) -> f64 {
    let CorrelationParams { s1, s2, n, .. } = *params;
    let l = params.modulus();
    let s12 = gcd(s1, s2);
    // gcd(Delta, n, s1, s2) only depends on Delta and n modulo gcd(s1, s2)
    let delta = params.delta().rem_euclid(s12 as i128) as u64;
    let n_red = reduce(n, s12);
    let g_delta = gcd(gcd(delta, n_red), s12);
    let g_n = gcd(n_red, s12);
    ((s1 * s2) as f64 * l as f64).sqrt() * g_delta as f64 / (g_n as f64).sqrt()
}

/// Fitted exponent `c0` such that `|C| <= 2^{c0 omega([s1,s2])} * bound` over a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationFit {
    pub c0: f64,
    pub worst: Option<CorrelationParams>,
    pub points: usize,
    /// Largest `|C| / bound` among grid points with `[s1,s2] = 1`, where no constant can help.
    pub trivial_modulus_ratio: f64,
}

/// Fits `c0` over all `s1, s2 <= s_max`, with `t_i` drawn from `t_values` (units mod `s_i` only)
/// and `n` from `n_values`.
pub fn fit_correlation_constant(s_max: u64, t_values: &[i64], n_values: &[i64]) -> CorrelationFit {
    let pairs: Vec<(u64, u64)> = (1..=s_max).flat_map(|s1| (1..=s_max).map(move |s2| (s1, s2))).collect();
    let results: Vec<(f64, f64, Option<CorrelationParams>, usize)> = pairs
        .par_iter()
        .map(|&(s1, s2)| {
            let l = lcm(s1, s2).unwrap();
            let w = omega(l);
            let mut best = (f64::NEG_INFINITY, 0.0f64, None, 0usize);
            for &t1 in t_values.iter().filter(|&&t| gcd_i64(t, s1 as i64) == 1) {
                for &t2 in t_values.iter().filter(|&&t| gcd_i64(t, s2 as i64) == 1) {
                    for &n in n_values {
                        let p = CorrelationParams { s1, s2, t1, t2, n };
                        let ratio = correlation_sum(&p).norm() / correlation_bound(&p);
                        best.3 += 1;
                        if w == 0 {
                            best.1 = best.1.max(ratio);
                        } else if ratio > 0.0 {
                            let c0 = ratio.log2() / w as f64;
                            if c0 > best.0 {
                                best.0 = c0;
                                best.2 = Some(p);
                            }
                        }
                    }
                }
            }
            best
        })
        .collect();
    let mut fit = CorrelationFit {
        c0: f64::NEG_INFINITY,
        worst: None,
        points: 0,
        trivial_modulus_ratio: 0.0,
    };
    for (c0, trivial, worst, count) in results {
        fit.points += count;
        fit.trivial_modulus_ratio = fit.trivial_modulus_ratio.max(trivial);
        if c0 > fit.c0 {
            fit.c0 = c0;
            fit.worst = worst;
        }
    }
    fit
}

/// Parameters of the character sum `C_{l1,l2}(n)` arising after Poisson summation in the
/// dual sum: moduli `s_i = l_i r / m`, arguments `p_i' M` with `p_i'` inverse mod `s_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairedCorrelationParams {
    pub p1: u64,
    pub p2: u64,
    pub l1: u64,
    pub l2: u64,
    pub r: u64,
    pub m: u64,
    pub modulus: u64,
    pub n: i64,
}

impl PairedCorrelationParams {
    fn moduli(&self) -> Result<(u64, u64)> {
        let (a, b) = (self.l1 * self.r, self.l2 * self.r);
        if self.m == 0 || a % self.m != 0 || b % self.m != 0 {
            return Err(Error::domain(format!(
                "m = {} must divide both l1 r = {a} and l2 r = {b}",
                self.m
            )));
        }
        Ok((a / self.m, b / self.m))
    }

    /// The same sum written in the correlation-lemma form `t_i = p_i' M mod s_i`.
    ///
    /// Valid when `M p_i` is a unit modulo `s_i`; then `S(u, a; s) = S(u a, 1; s)`.
    pub fn as_correlation(&self) -> Result<CorrelationParams> {
        let (s1, s2) = self.moduli()?;
        for (s, p) in [(s1, self.p1), (s2, self.p2)] {
            if gcd(self.modulus * p, s) != 1 {
                return Err(Error::domain(format!(
                    "M p = {} is not a unit modulo {s}",
                    self.modulus * p
                )));
            }
        }
        let t1 = (mod_inverse(self.p1 as i64, s1)?.value() as u128 * self.modulus as u128 % s1 as u128) as i64;
        let t2 = (mod_inverse(self.p2 as i64, s2)?.value() as u128 * self.modulus as u128 % s2 as u128) as i64;
        Ok(CorrelationParams {
            s1,
            s2,
            t1,
            t2,
            n: self.n,
        })
    }
}

/// `sum_{a mod [s1,s2]} S(p1' M, a; s1) S(p2' M, a; s2) e(a n / [s1,s2])` by direct summation.
pub fn paired_correlation_sum(params: &PairedCorrelationParams) -> Result<Complex64> {
    let (s1, s2) = params.moduli()?;
    let l = lcm(s1, s2).ok_or_else(|| Error::domain("modulus overflow"))?;
    let u1 = mod_inverse(params.p1 as i64, s1)?.value() as i64 * params.modulus as i64;
    let u2 = mod_inverse(params.p2 as i64, s2)?.value() as i64 * params.modulus as i64;
    let n = reduce(params.n, l);
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..l {
        acc += kloosterman(u1, a as i64, s1)
            * kloosterman(u2, a as i64, s2)
            * unit_root(((n as u128 * a as u128) % l as u128) as u64, l);
    }
    Ok(acc)
}

/// `q c_q(diff)`: the value of the zero-frequency correlation sum with equal moduli `q`
/// when the inverse classes differ by `diff`.
pub fn zero_frequency_c_from_difference(diff: i64, q: u64) -> Result<Complex64> {
    Ok(Complex64::new((q as i64 * ramanujan_sum(diff, q)?) as f64, 0.0))
}

/// `(l r/m) sum*_{beta mod l r/m} e((p1' - p2') beta / (l r/m))`.
pub fn zero_frequency_c(p1: u64, p2: u64, l: u64, r: u64, m: u64) -> Result<Complex64> {
    let lr = l * r;
    if m == 0 || lr % m != 0 {
        return Err(Error::domain(format!("{m} does not divide l r = {lr}")));
    }
    let q = lr / m;
    if gcd(p1 * p2, q) != 1 {
        return Err(Error::domain(format!("p1 p2 = {} is not coprime to {q}", p1 * p2)));
    }
    let diff = mod_inverse(p1 as i64, q)?.value() as i64 - mod_inverse(p2 as i64, q)?.value() as i64;
    zero_frequency_c_from_difference(diff, q)
}

/// Parameters of the complete character sum over `a mod M` of two twisted Kloosterman sums.
#[derive(Debug, Clone)]
pub struct FrakCParams {
    pub chi: DirichletCharacter,
    pub p1: u64,
    pub p2: u64,
    pub l1: u64,
    pub l2: u64,
    pub r1: u64,
    pub r2: u64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FrakCValue {
    pub brute_force: Complex64,
    pub closed_form: Complex64,
    pub congruent: bool,
}

/// `sum_{a mod M} S_chi(r1, a p1 l1'; M) conj(S_chi(r2, a p2 l2'; M))`, by brute force and by
/// the closed form `M chi(p1 p2' l1' l2) (M [l2 r1 p1 = l1 r2 p2 mod M] - 1)`.
pub fn frak_c(params: &FrakCParams) -> Result<FrakCValue> {
    let chi = &params.chi;
    let m = chi.modulus();
    let FrakCParams {
        p1, p2, l1, l2, r1, r2, ..
    } = *params;
    for (name, v) in [("p1", p1), ("p2", p2), ("l1", l1), ("l2", l2), ("r1", r1), ("r2", r2)] {
        if gcd(v, m) != 1 {
            return Err(Error::domain(format!("{name} = {v} is not coprime to M = {m}")));
        }
    }
    let l1_inv = mod_inverse(l1 as i64, m)?.value();
    let l2_inv = mod_inverse(l2 as i64, m)?.value();
    let p2_inv = mod_inverse(p2 as i64, m)?.value();
    let mut brute = Complex64::new(0.0, 0.0);
    for a in 0..m {
        let b1 = (a * p1 % m) * l1_inv % m;
        let b2 = (a * p2 % m) * l2_inv % m;
        let s1 = twisted_kloosterman(chi, r1 as i64, b1 as i64, m)?;
        let s2 = twisted_kloosterman(chi, r2 as i64, b2 as i64, m)?;
        brute += s1 * s2.conj();
    }
    let congruent = (l2 * r1 % m) * p1 % m == (l1 * r2 % m) * p2 % m;
    let arg = (((p1 * p2_inv % m) * l1_inv % m) * l2) % m;
    let mf = m as f64;
    let closed = chi.evaluate(arg as i64) * mf * (if congruent { mf } else { 0.0 } - 1.0);
    Ok(FrakCValue {
        brute_force: brute,
        closed_form: closed,
        congruent,
    })
}

/// Outcome of comparing the brute-force and closed forms of the character sum over a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrakCScanReport {
    pub moduli: Vec<u64>,
    pub tuples: u64,
    /// Violations of `|brute - closed| <= tolerance M^2`.
    pub violations: u64,
    /// `max |brute - closed| / M^2`.
    pub max_scaled_error: f64,
    pub tolerance: f64,
}

/// Every tuple `p_i, l_i, r_i` in `[1, M-1]` and every nonprincipal character mod `M`.
///
/// The brute-force side sums tabulated twisted Kloosterman sums over `a mod M`; the table is
/// itself a direct sum over units, so the closed form is never used on that side.
pub fn frak_c_scan(moduli: &[u64], tolerance: f64) -> Result<FrakCScanReport> {
    let mut report = FrakCScanReport {
        moduli: moduli.to_vec(),
        tuples: 0,
        violations: 0,
        max_scaled_error: 0.0,
        tolerance,
    };
    for &m in moduli {
        if !is_prime(m) || m < 3 {
            return Err(Error::domain(format!("M = {m} must be an odd prime")));
        }
        let inverses = unit_inverses(m);
        for k in 1..m - 1 {
            let chi = DirichletCharacter::new(m, k)?;
            let table = twisted_kloosterman_table(&chi);
            let entry = |r: u64, b: u64| table[(r * m + b) as usize];
            let rows: Vec<(u64, u64, f64)> = (1..m)
                .into_par_iter()
                .map(|p1| {
                    let mut count = 0u64;
                    let mut bad = 0u64;
                    let mut worst = 0.0f64;
                    let mf = m as f64;
                    for p2 in 1..m {
                        for l1 in 1..m {
                            for l2 in 1..m {
                                let u1 = p1 * inverses[l1 as usize] % m;
                                let u2 = p2 * inverses[l2 as usize] % m;
                                let arg = (p1 * inverses[p2 as usize] % m) * inverses[l1 as usize] % m * l2 % m;
                                let chi_arg = chi.at_residue(arg);
                                for r1 in 1..m {
                                    for r2 in 1..m {
                                        let mut brute = Complex64::new(0.0, 0.0);
                                        for a in 0..m {
                                            brute += entry(r1, a * u1 % m) * entry(r2, a * u2 % m).conj();
                                        }
                                        let congruent = l2 * r1 % m * p1 % m == l1 * r2 % m * p2 % m;
                                        let closed = chi_arg * mf * (if congruent { mf } else { 0.0 } - 1.0);
                                        let err = (brute - closed).norm() / (mf * mf);
                                        worst = worst.max(err);
                                        bad += (err > tolerance) as u64;
                                        count += 1;
                                    }
                                }
                            }
                        }
                    }
                    (count, bad, worst)
                })
                .collect();
            for (count, bad, worst) in rows {
                report.tuples += count;
                report.violations += bad;
                report.max_scaled_error = report.max_scaled_error.max(worst);
            }
        }
    }
    Ok(report)
}
