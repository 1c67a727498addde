use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::arith::primes_in_dyadic;
use crate::error::{Error, Result};

const TUPLE_BUDGET: u128 = 1_000_000_000;
const EXACT_DISTINCT_LIMIT: usize = 128;

/// Result of the exhaustive spacing count
/// `sum 1/|l1 r2 p2 - l2 r1 p1|` over `p_i ~ P`, `l_i ~ L`, `r_i ~ R`, unequal products.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpacingReport {
    pub p_anchor: u64,
    pub l_anchor: u64,
    pub r_anchor: u64,
    pub modulus: Option<u64>,
    /// Number of ordered 6-tuples enumerated (including the excluded equal ones).
    pub tuples: u64,
    pub value: f64,
    /// The sum as an exact fraction `num/den`, when the product set is small enough.
    pub exact: Option<String>,
    /// `L P R + min(L, P, R)^2`.
    pub comparison: f64,
    pub ratio: f64,
}

/// Spacing sum over explicit sets of primes `p`, primes `l` and integers `r`.
///
/// With `modulus = Some(M)` only pairs with `l1 r2 p2 = l2 r1 p1 (mod M)` are kept, and
/// tuples where `M` divides `p`, `l` or `r` are dropped.
pub fn spacing_sum_over_sets(
    ps: &[u64],
    ls: &[u64],
    rs: &[u64],
    modulus: Option<u64>,
) -> Result<(f64, Option<BigRational>, u64)> {
    let keep = |v: u64| modulus.is_none_or(|m| v % m != 0);
    let ps: Vec<u64> = ps.iter().copied().filter(|&v| keep(v)).collect();
    let ls: Vec<u64> = ls.iter().copied().filter(|&v| keep(v)).collect();
    let rs: Vec<u64> = rs.iter().copied().filter(|&v| keep(v)).collect();
    let singles = (ps.len() * ls.len() * rs.len()) as u128;
    let tuples = singles * singles;
    if tuples > TUPLE_BUDGET {
        return Err(Error::resource(
            format!("{tuples} tuples exceed the enumeration budget of {TUPLE_BUDGET}"),
            None,
        ));
    }
    // l1 r2 p2 and l2 r1 p1 range independently over the multiset {l r p}
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for &p in &ps {
        for &l in &ls {
            for &r in &rs {
                *counts.entry(l * r * p).or_default() += 1;
            }
        }
    }
    let mut classes: BTreeMap<u64, Vec<(u64, u64)>> = BTreeMap::new();
    for (&v, &c) in &counts {
        let class = modulus.map_or(0, |m| v % m);
        classes.entry(class).or_default().push((v, c));
    }
    let exact_wanted = counts.len() <= EXACT_DISTINCT_LIMIT;
    let mut value = 0.0f64;
    let mut compensation = 0.0f64;
    let mut by_difference: BTreeMap<u64, u64> = BTreeMap::new();
    for members in classes.values() {
        for (i, &(v, cv)) in members.iter().enumerate() {
            for &(w, cw) in &members[i + 1..] {
                // ordered pairs (v, w) and (w, v) both occur
                let weight = 2 * cv * cw;
                let term = weight as f64 / (w - v) as f64;
                // Kahan summation keeps the float value faithful over ~10^5 terms
                let y = term - compensation;
                let t = value + y;
                compensation = (t - value) - y;
                value = t;
                if exact_wanted {
                    *by_difference.entry(w - v).or_default() += weight;
                }
            }
        }
    }
    let exact = exact_wanted.then(|| {
        by_difference
            .into_iter()
            .map(|(d, weight)| BigRational::new(BigInt::from(weight), BigInt::from(d)))
            .fold(BigRational::from_integer(BigInt::from(0)), |acc, q| acc + q)
    });
    Ok((value, exact, tuples as u64))
}

/// Exhaustive spacing count over dyadic segments `[P, 2P]`, `[L, 2L]` (primes) and `[R, 2R]`.
pub fn spacing_sum(p: u64, l: u64, r: u64, modulus: Option<u64>) -> Result<SpacingReport> {
    if p < 2 || l < 2 || r < 1 {
        return Err(Error::domain("spacing sum needs P, L >= 2 and R >= 1"));
    }
    let ps = primes_in_dyadic(p);
    let ls = primes_in_dyadic(l);
    let rs: Vec<u64> = (r..=2 * r).collect();
    let (value, exact, tuples) = spacing_sum_over_sets(&ps, &ls, &rs, modulus)?;
    let min = p.min(l).min(r) as f64;
    let comparison = (l * p * r) as f64 + min * min;
    Ok(SpacingReport {
        p_anchor: p,
        l_anchor: l,
        r_anchor: r,
        modulus,
        tuples,
        value,
        exact: exact.map(|q| format!("{}/{}", q.numer(), q.denom())),
        comparison,
        ratio: value / comparison,
    })
}

/// Spacing sums over a grid of anchors, unfiltered and filtered by each modulus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpacingScan {
    pub reports: Vec<SpacingReport>,
    /// Largest `value / (L P R + min^2)` over the unfiltered runs.
    pub max_ratio: f64,
    /// Largest `M value / (L P R + min^2)` over the filtered runs.
    pub max_filtered_ratio: f64,
    /// Largest `M filtered / unfiltered` at equal anchors.
    pub max_gain_ratio: f64,
    /// True when no filtered sum exceeds its unfiltered counterpart.
    pub filter_monotone: bool,
}

pub fn spacing_scan(anchors: &[u64], moduli: &[u64]) -> Result<SpacingScan> {
    let mut scan = SpacingScan {
        reports: Vec::new(),
        max_ratio: 0.0,
        max_filtered_ratio: 0.0,
        max_gain_ratio: 0.0,
        filter_monotone: true,
    };
    for &p in anchors {
        for &l in anchors {
            for &r in anchors {
                let plain = spacing_sum(p, l, r, None)?;
                scan.max_ratio = scan.max_ratio.max(plain.ratio);
                for &m in moduli {
                    let filtered = spacing_sum(p, l, r, Some(m))?;
                    let mf = m as f64;
                    scan.max_filtered_ratio = scan.max_filtered_ratio.max(mf * filtered.ratio);
                    if plain.value > 0.0 {
                        scan.max_gain_ratio = scan.max_gain_ratio.max(mf * filtered.value / plain.value);
                    }
                    scan.filter_monotone &= filtered.value <= plain.value;
                    scan.reports.push(filtered);
                }
                scan.reports.push(plain);
            }
        }
    }
    Ok(scan)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Literal six-fold loop over the tuples.
    fn brute(ps: &[u64], ls: &[u64], rs: &[u64], modulus: Option<u64>) -> BigRational {
        let mut total = BigRational::from_integer(BigInt::from(0));
        for &p1 in ps {
            for &p2 in ps {
                for &l1 in ls {
                    for &l2 in ls {
                        for &r1 in rs {
                            for &r2 in rs {
                                if let Some(m) = modulus {
                                    if [p1, p2, l1, l2, r1, r2].iter().any(|v| v % m == 0) {
                                        continue;
                                    }
                                }
                                let a = (l1 * r2 * p2) as i64;
                                let b = (l2 * r1 * p1) as i64;
                                if a == b {
                                    continue;
                                }
                                if let Some(m) = modulus {
                                    if (a - b).rem_euclid(m as i64) != 0 {
                                        continue;
                                    }
                                }
                                total += BigRational::new(BigInt::from(1), BigInt::from((a - b).abs()));
                            }
                        }
                    }
                }
            }
        }
        total
    }

    #[test]
    fn smallest_segments_exact() {
        let report = spacing_sum(2, 2, 2, None).unwrap();
        let want = brute(&[2, 3], &[2, 3], &[2, 3, 4], None);
        assert_eq!(report.exact.unwrap(), format!("{}/{}", want.numer(), want.denom()));
        let f: f64 =
            want.numer().to_string().parse::<f64>().unwrap() / want.denom().to_string().parse::<f64>().unwrap();
        assert!((report.value - f).abs() < 1e-12 * f);
    }

    #[test]
    fn filtered_matches_brute_force() {
        for m in [5u64, 7] {
            let (v, exact, _) = spacing_sum_over_sets(&[2, 3, 5], &[5, 7], &[1, 2, 3, 5], Some(m)).unwrap();
            let want = brute(&[2, 3, 5], &[5, 7], &[1, 2, 3, 5], Some(m));
            assert_eq!(exact.unwrap(), want);
            assert!(v >= 0.0);
        }
    }

    #[test]
    fn equal_products_give_zero() {
        let (v, exact, _) = spacing_sum_over_sets(&[2], &[3], &[1], None).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(exact.unwrap(), BigRational::from_integer(BigInt::from(0)));
    }

    #[test]
    fn ratio_example() {
        let report = spacing_sum(2, 2, 3, None).unwrap();
        assert!(report.ratio <= 10.0, "{report:?}");
    }

    #[test]
    fn budget_guard() {
        let big: Vec<u64> = (1..=200).collect();
        assert!(spacing_sum_over_sets(&big, &big, &big, None).unwrap_err().is_resource());
    }
}
