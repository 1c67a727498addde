//! Complete exponential sums: Kloosterman sums, twisted Kloosterman sums,
//! correlation sums, the spacing counter and the additive-twist partial-sum scan.
//!
//! Phases are exact rationals `a/c`; they are reduced modulo 1 in integer arithmetic
//! before a single trigonometric evaluation.

mod correlation;
mod miller;
mod spacing;

pub use correlation::{
    correlation_bound, correlation_sum, fit_correlation_constant, frak_c, frak_c_scan, paired_correlation_sum,
    zero_frequency_c, zero_frequency_c_from_difference, CorrelationFit, CorrelationParams, FrakCParams,
    FrakCScanReport, FrakCValue, PairedCorrelationParams,
};
pub use miller::{miller_scan, MillerReport, MillerScanConfig};
pub use spacing::{spacing_scan, spacing_sum, spacing_sum_over_sets, SpacingReport, SpacingScan};

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, gcd, gcd_i64, mod_inverse, mul_mod, phi, reduce, tau};
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};

/// `e(num/den) = exp(2 pi i num/den)` with the fraction reduced modulo 1 first.
#[inline]
pub fn unit_root(num: u64, den: u64) -> Complex64 {
    let r = num % den;
    // use the representative in (-den/2, den/2] to keep the angle small
    let signed = if 2 * r > den { r as f64 - den as f64 } else { r as f64 };
    let (s, c) = (TAU * signed / den as f64).sin_cos();
    Complex64::new(c, s)
}

/// `e(x)` for a real argument.
#[inline]
pub fn e(x: f64) -> Complex64 {
    let frac = x - x.round();
    let (s, c) = (TAU * frac).sin_cos();
    Complex64::new(c, s)
}

/// Table of `e(j/c)` for `0 <= j < c`.
#[derive(Debug, Clone)]
pub struct RootTable {
    modulus: u64,
    roots: Vec<Complex64>,
}

impl RootTable {
    pub fn new(modulus: u64) -> Self {
        assert!(modulus >= 1);
        RootTable {
            modulus,
            roots: (0..modulus).map(|j| unit_root(j, modulus)).collect(),
        }
    }

    #[inline]
    pub fn get(&self, j: u64) -> Complex64 {
        self.roots[(j % self.modulus) as usize]
    }

    #[inline]
    pub fn get_signed(&self, j: i64) -> Complex64 {
        self.roots[reduce(j, self.modulus) as usize]
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

/// Inverses of the units modulo `c`; entry `x` is 0 when `gcd(x, c) > 1`.
pub fn unit_inverses(c: u64) -> Vec<u64> {
    if c == 1 {
        return vec![0];
    }
    (0..c)
        .map(|x| mod_inverse(x as i64, c).map(|r| r.value()).unwrap_or(0))
        .collect()
}

fn is_unit(x: u64, c: u64) -> bool {
    gcd(x, c) == 1
}

/// Classical Kloosterman sum `S(a, b; c)` by direct summation.
pub fn kloosterman(a: i64, b: i64, c: u64) -> Complex64 {
    assert!(c >= 1, "Kloosterman modulus must be positive");
    let (a, b) = (reduce(a, c), reduce(b, c));
    let inverses = unit_inverses(c);
    (0..c)
        .filter(|&x| is_unit(x, c))
        .map(|x| {
            let phase = (mul_mod(a, x, c) + mul_mod(b, inverses[x as usize], c)) % c;
            unit_root(phase, c)
        })
        .sum()
}

/// `S(a, b; c)` for every `b mod c` at once, by a length-`c` DFT of `y -> e(a y'/c)` over units `y`.
pub fn kloosterman_row(a: i64, c: u64, planner: &mut FftPlanner<f64>) -> Vec<Complex64> {
    let a = reduce(a, c);
    let inverses = unit_inverses(c);
    let mut buffer: Vec<Complex64> = (0..c)
        .map(|y| {
            if is_unit(y, c) {
                unit_root(mul_mod(a, inverses[y as usize], c), c)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    if c > 1 {
        // S(a, b) = sum_y g(y) e(b y / c): an unnormalised inverse DFT
        planner.plan_fft_inverse(c as usize).process(&mut buffer);
    }
    buffer
}

/// Generalized Kloosterman sum `sum*_{alpha mod c} chi(alpha) e((r alpha + n alpha')/c)`.
pub fn twisted_kloosterman(chi: &DirichletCharacter, r: i64, n: i64, c: u64) -> Result<Complex64> {
    let m = chi.modulus();
    if c == 0 || c % m != 0 {
        return Err(Error::domain(format!("character modulus {m} does not divide {c}")));
    }
    let (r, n) = (reduce(r, c), reduce(n, c));
    let inverses = unit_inverses(c);
    Ok((0..c)
        .filter(|&x| is_unit(x, c))
        .map(|x| {
            let phase = (mul_mod(r, x, c) + mul_mod(n, inverses[x as usize], c)) % c;
            chi.at_residue(x % m) * unit_root(phase, c)
        })
        .sum())
}

/// Table `S_chi(k, b; M)` for all `k, b mod M`, indexed `[k * M + b]`.
pub fn twisted_kloosterman_table(chi: &DirichletCharacter) -> Vec<Complex64> {
    let m = chi.modulus();
    let roots = RootTable::new(m);
    let inverses = unit_inverses(m);
    let mut table = vec![Complex64::new(0.0, 0.0); (m * m) as usize];
    for k in 0..m {
        for b in 0..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for x in 1..m {
                acc += chi.at_residue(x) * roots.get(k * x + b * inverses[x as usize]);
            }
            table[(k * m + b) as usize] = acc;
        }
    }
    table
}

/// Outcome of the exhaustive Weil-bound scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeilScanReport {
    pub c_max: u64,
    pub sums_checked: u64,
    pub violations: Vec<WeilViolation>,
    /// Largest observed `|S(a,b;c)| / (tau(c) gcd(a,b,c)^{1/2} c^{1/2})` and where it occurs.
    pub max_ratio: f64,
    pub max_ratio_at: (u64, u64, u64),
    pub relative_slack: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeilViolation {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub value: f64,
    pub bound: f64,
}

struct WeilRow {
    checked: u64,
    violations: Vec<WeilViolation>,
    max_ratio: f64,
    at: (u64, u64, u64),
}

/// Scans one modulus through the rows `a = d` for the divisors `d` of `c`.
///
/// For a unit `u`, `S(d u, b; c) = S(d, u b; c)` and `gcd(d u, b, c) = gcd(d, u b, c)`, so the row
/// `a = d` carries the value and the bound of every pair `(a, b)` with `gcd(a, c) = d`; each of
/// its entries stands for `phi(c / d)` pairs. Violations are reported at the representative.
fn weil_scan_modulus(c: u64, slack: f64) -> WeilRow {
    let mut planner = FftPlanner::new();
    let tau_c = tau(c) as f64;
    let sqrt_c = (c as f64).sqrt();
    let mut row = WeilRow {
        checked: 0,
        violations: Vec::new(),
        max_ratio: 0.0,
        at: (0, 0, c),
    };
    let divisors = factorize(c).expect("positive modulus").divisors();
    for d in divisors {
        let a = d % c;
        let multiplicity = phi(c / d);
        let sums = kloosterman_row(a as i64, c, &mut planner);
        for (b, s) in sums.iter().enumerate() {
            let g = gcd(d, b as u64);
            let bound = tau_c * (g as f64).sqrt() * sqrt_c;
            let value = s.norm();
            let ratio = value / bound;
            row.checked += multiplicity;
            if ratio > row.max_ratio {
                row.max_ratio = ratio;
                row.at = (a, b as u64, c);
            }
            if value > bound * (1.0 + slack) {
                row.violations.push(WeilViolation {
                    a,
                    b: b as u64,
                    c,
                    value,
                    bound,
                });
            }
        }
    }
    row
}

/// Checks `|S(a,b;c)| <= tau(c) gcd(a,b,c)^{1/2} c^{1/2}` for every `a, b mod c` and `c <= c_max`.
///
/// Work is split by modulus across the rayon pool; the aggregation order is fixed,
/// so the report does not depend on the number of threads.
pub fn weil_scan(c_max: u64) -> WeilScanReport {
    let slack = 1e-9;
    // large moduli first so the pool stays balanced
    let mut rows: Vec<(u64, WeilRow)> = (1..=c_max)
        .rev()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|c| (c, weil_scan_modulus(c, slack)))
        .collect();
    rows.sort_by_key(|(c, _)| *c);
    let mut report = WeilScanReport {
        c_max,
        sums_checked: 0,
        violations: Vec::new(),
        max_ratio: 0.0,
        max_ratio_at: (0, 0, 1),
        relative_slack: slack,
    };
    for (_, row) in rows {
        report.sums_checked += row.checked;
        report.violations.extend(row.violations);
        if row.max_ratio > report.max_ratio {
            report.max_ratio = row.max_ratio;
            report.max_ratio_at = row.at;
        }
    }
    report
}

/// `gcd(a, b, c)` for signed `a, b`.
pub fn gcd3(a: i64, b: i64, c: u64) -> u64 {
    gcd(gcd_i64(a, b), c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn unit_roots_reduce_exactly() {
        assert!(close(unit_root(1, 4), Complex64::new(0.0, 1.0), 1e-15));
        assert!(close(unit_root(5, 4), Complex64::new(0.0, 1.0), 1e-15));
        assert!(close(unit_root(3, 6), Complex64::new(-1.0, 0.0), 1e-15));
        assert!(close(e(2.25), Complex64::new(0.0, 1.0), 1e-15));
    }

    #[test]
    fn kloosterman_examples() {
        for c in 1..30 {
            let phi = (1..=c).filter(|&x| gcd(x, c) == 1).count() as f64;
            assert!(close(kloosterman(0, 0, c), Complex64::new(phi, 0.0), 1e-12));
        }
        assert!(close(kloosterman(1, 1, 3), Complex64::new(-1.0, 0.0), 1e-12));
        assert!(close(kloosterman(1, 1, 2), Complex64::new(1.0, 0.0), 1e-12));
    }

    #[test]
    fn kloosterman_is_real_and_symmetric() {
        for c in 1..60u64 {
            let phi = (1..=c).filter(|&x| gcd(x, c) == 1).count() as f64;
            for a in -5..5 {
                for b in -5..5 {
                    let s = kloosterman(a, b, c);
                    assert!(s.im.abs() <= 1e-10 * phi);
                    assert!(close(s, kloosterman(b, a, c), 1e-10));
                }
            }
        }
    }

    #[test]
    fn fft_row_matches_direct() {
        let mut planner = FftPlanner::new();
        for c in [1u64, 2, 3, 12, 17, 30, 64, 97] {
            for a in 0..c.min(7) {
                let row = kloosterman_row(a as i64, c, &mut planner);
                for b in 0..c {
                    assert!(close(row[b as usize], kloosterman(a as i64, b as i64, c), 1e-9));
                }
            }
        }
    }

    #[test]
    fn twisted_examples() {
        let principal = DirichletCharacter::principal(7).unwrap();
        for r in 0..7 {
            for n in 0..7 {
                let twisted = twisted_kloosterman(&principal, r, n, 7).unwrap();
                assert!(close(twisted, kloosterman(r, n, 7), 1e-12));
            }
        }
        let legendre = DirichletCharacter::new(5, 2).unwrap();
        assert!(twisted_kloosterman(&legendre, 0, 0, 5).unwrap().norm() < 1e-12);
        let s = twisted_kloosterman(&legendre, 1, 1, 5).unwrap();
        assert!(s.norm() <= 2.0 * 5f64.sqrt() + 1e-12);
        assert!(twisted_kloosterman(&legendre, 1, 1, 6).is_err());
        // non-prime modulus divisible by M: principal twist is the coprime part
        let principal5 = DirichletCharacter::principal(5).unwrap();
        for c in [5u64, 10, 15, 20, 25] {
            for (r, n) in [(1, 1), (2, 3), (0, 4)] {
                let twisted = twisted_kloosterman(&principal5, r, n, c).unwrap();
                assert!(close(twisted, kloosterman(r, n, c), 1e-10));
            }
        }
    }

    #[test]
    fn twisted_table_matches_direct() {
        let chi = DirichletCharacter::new(7, 2).unwrap();
        let table = twisted_kloosterman_table(&chi);
        for k in 0..7i64 {
            for b in 0..7i64 {
                let direct = twisted_kloosterman(&chi, k, b, 7).unwrap();
                assert!(close(table[(k * 7 + b) as usize], direct, 1e-12));
            }
        }
    }

    #[test]
    fn weil_scan_small() {
        let report = weil_scan(150);
        assert!(report.violations.is_empty());
        assert_eq!(report.sums_checked, (1..=150u64).map(|c| c * c).sum::<u64>());
        assert!(report.max_ratio <= 1.0 + 1e-9);
        // the divisor rows reproduce the literal scan over every pair
        for c in 1..=40u64 {
            let full = (0..c)
                .flat_map(|a| (0..c).map(move |b| (a, b)))
                .map(|(a, b)| {
                    let bound = tau(c) as f64 * (gcd(gcd(a, b), c) as f64).sqrt() * (c as f64).sqrt();
                    kloosterman(a as i64, b as i64, c).norm() / bound
                })
                .fold(0.0, f64::max);
            assert!((weil_scan_modulus(c, 1e-9).max_ratio - full).abs() < 1e-12, "c = {c}");
        }
    }
}
