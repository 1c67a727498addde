use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::SmoothWeight;
use crate::arith::primes_in_dyadic;
use crate::error::{Error, Result};

/// Highest derivative order used by the integration-by-parts envelope.
const ENVELOPE_ORDER: usize = 30;

/// Certified size below which an integral counts as negligible.
pub const NEGLIGIBLE: f64 = 1e-12;

/// The integrals `J_it(r, n p / l; M)` for all `n` in a range, `p ~ P`, `l ~ L` (primes other
/// than `M`), at fixed `(M, t, N)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncationFamily {
    pub modulus: u64,
    pub t: f64,
    pub n_scale: f64,
    pub p_anchor: u64,
    pub l_anchor: u64,
    /// Range of the dual variable `n`; defaults to `[N, 2N]`.
    pub n_range: (f64, f64),
    pub weight: SmoothWeight,
}

impl TruncationFamily {
    pub fn new(modulus: u64, t: f64, n_scale: f64, p_anchor: u64, l_anchor: u64, weight: SmoothWeight) -> Self {
        TruncationFamily {
            modulus,
            t,
            n_scale,
            p_anchor,
            l_anchor,
            n_range: (n_scale, 2.0 * n_scale),
            weight,
        }
    }

    fn primes(&self, anchor: u64) -> Vec<u64> {
        primes_in_dyadic(anchor)
            .into_iter()
            .filter(|&q| q != self.modulus)
            .collect()
    }

    /// Smallest `p / l` over the family, which gives the slowest linear frequency.
    fn min_ratio(&self) -> Result<f64> {
        let ps = self.primes(self.p_anchor);
        let ls = self.primes(self.l_anchor);
        match (ps.first(), ls.last()) {
            (Some(&p), Some(&l)) => Ok(p as f64 / l as f64),
            _ => Err(Error::domain("prime segments are empty after removing M")),
        }
    }

    /// `M^2 t^2 L / (N P)`, the scale of the cutoff.
    pub fn nominal_scale(&self) -> f64 {
        let m = self.modulus as f64;
        m * m * self.t * self.t * self.l_anchor as f64 / (self.n_scale * self.p_anchor as f64)
    }
}

/// Complete Bell polynomials `Y_0..=Y_order` evaluated at `x_1, x_2, ...`.
fn bell_polynomials(x: &[f64], order: usize) -> Vec<f64> {
    let mut binom = vec![vec![1.0f64; order + 1]; order + 1];
    for m in 1..=order {
        for k in 1..m {
            binom[m][k] = binom[m - 1][k - 1] + binom[m - 1][k];
        }
    }
    let mut y = vec![0.0; order + 1];
    y[0] = 1.0;
    for m in 0..order {
        y[m + 1] = (0..=m).map(|k| binom[m][k] * y[m - k] * x[k]).sum();
    }
    y
}

/// Certified bound for `sup |J_it(r, .)|` over the family, by `j`-fold integration by parts:
/// `|int U e(-nu x)| <= ||U^{(j)}||_1 / (2 pi |nu|)^j` with `U = V e(g)`, where the derivatives
/// of `e(g)` are bounded through complete Bell polynomials of `2 pi sup|g^{(k)}|`.
pub fn truncation_envelope(family: &TruncationFamily, r: u64) -> Result<f64> {
    let mut weight = family.weight.clone();
    if weight.derivative_bounds().len() <= ENVELOPE_ORDER {
        weight.certify(ENVELOPE_ORDER)?;
    }
    envelope_with(family, &weight, r)
}

fn envelope_with(family: &TruncationFamily, weight: &SmoothWeight, r: u64) -> Result<f64> {
    let d = weight.derivative_bounds();
    let (lo, hi) = weight.support();
    let m = family.modulus as f64;
    let nu = r as f64 * family.n_scale * family.min_ratio()? / (m * m * family.t.abs());
    let a = family.t.abs() / (2.0 * PI);
    let b_ends = [
        family.n_range.0 * family.t.abs() / family.n_scale,
        family.n_range.1 * family.t.abs() / family.n_scale,
    ];
    // sup |g'| on the support, exact up to sampling; g' is affine in b so the ends suffice
    let mut g1 = 0.0f64;
    for i in 0..=4000 {
        let x = lo + (hi - lo) * i as f64 / 4000.0;
        for &b in &b_ends {
            g1 = g1.max((-a / x + b / (x * x)).abs());
        }
    }
    let b_max = b_ends[1];
    let mut x = vec![2.0 * PI * g1 * 1.001];
    let mut fact_km1 = 1.0;
    for k in 2..=ENVELOPE_ORDER {
        fact_km1 *= (k - 1) as f64;
        let bound = a * fact_km1 / lo.powi(k as i32) + b_max * fact_km1 * k as f64 / lo.powi(k as i32 + 1);
        x.push(2.0 * PI * bound);
    }
    let bell = bell_polynomials(&x, ENVELOPE_ORDER);
    let length = hi - lo;
    let mut best = f64::INFINITY;
    let mut binom = vec![1.0f64];
    for j in 0..=ENVELOPE_ORDER {
        if j > 0 {
            let mut next = vec![1.0; j + 1];
            for i in 1..j {
                next[i] = binom[i - 1] + binom[i];
            }
            binom = next;
        }
        let norm: f64 = (0..=j).map(|i| binom[i] * d[j - i] * bell[i]).sum::<f64>() * length;
        let value = norm / (2.0 * PI * nu).powi(j as i32);
        best = best.min(value);
    }
    Ok(best)
}

/// Smallest `R_max` such that every `|r| > R_max` has certified `|J_it| < 1e-12` on the family.
pub fn truncation_cutoff(family: &TruncationFamily) -> Result<u64> {
    let mut weight = family.weight.clone();
    if weight.derivative_bounds().len() <= ENVELOPE_ORDER {
        weight.certify(ENVELOPE_ORDER)?;
    }
    let negligible = |r: u64| envelope_with(family, &weight, r).map(|v| v < NEGLIGIBLE);
    if negligible(1)? {
        return Ok(0);
    }
    let mut hi = 2u64;
    while !negligible(hi)? {
        hi *= 2;
        if hi > 1 << 40 {
            return Err(Error::resource("truncation envelope never becomes negligible", None));
        }
    }
    let mut lo = hi / 2;
    // invariant: lo not negligible, hi negligible
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if negligible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscint::{integrate_oscillatory, OscillatorySpec};

    fn family(t: f64, n_scale: f64) -> TruncationFamily {
        TruncationFamily::new(7, t, n_scale, 2, 2, SmoothWeight::bump(1.0, 2.0).unwrap())
    }

    #[test]
    fn bell_polynomials_match_small_cases() {
        let y = bell_polynomials(&[2.0, 3.0, 5.0], 3);
        // Y1 = x1, Y2 = x1^2 + x2, Y3 = x1^3 + 3 x1 x2 + x3
        assert_eq!(y, vec![1.0, 2.0, 7.0, 8.0 + 18.0 + 5.0]);
    }

    #[test]
    fn small_scale_keeps_only_zero_frequency() {
        let f = family(10.0, 1e7);
        assert!(f.nominal_scale() < 0.01);
        assert_eq!(truncation_cutoff(&f).unwrap(), 0);
    }

    #[test]
    fn cutoff_near_nominal_scale_and_scales_with_t_squared() {
        let f = family(100.0, 1e5);
        let r = truncation_cutoff(&f).unwrap() as f64;
        let nominal = 2.0 * f.nominal_scale();
        assert!(
            r >= nominal / 8.0 && r <= nominal * 8.0,
            "R_max = {r}, nominal {nominal}"
        );
        let r2 = truncation_cutoff(&family(200.0, 1e5)).unwrap() as f64;
        assert!(r2 / r >= 2.0 && r2 / r <= 8.0, "{r} -> {r2}");
    }

    #[test]
    fn quadrature_confirms_decay_beyond_cutoff() {
        let f = family(100.0, 1e5);
        let r_max = truncation_cutoff(&f).unwrap() as i64;
        // worst case of the family: smallest p / l, largest n
        let w = f.weight.clone();
        let beyond = OscillatorySpec::j_it(100.0, 1e5, 7, 2e5, r_max + 1, 2, 3, w.clone());
        let v = integrate_oscillatory(&beyond, 1e-13).unwrap().value.norm();
        assert!(v < NEGLIGIBLE, "{v}");
        let inside = OscillatorySpec::j_it(100.0, 1e5, 7, 2e5, 3, 2, 3, w);
        assert!(integrate_oscillatory(&inside, 1e-13).unwrap().value.norm() > NEGLIGIBLE);
    }
}
