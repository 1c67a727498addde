//! Integer, modular and multiplicative-function arithmetic.
//!
//! Everything works on 64-bit integers. Modular products go through `u128`
//! so nothing wraps silently.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

pub fn gcd_i64(a: i64, b: i64) -> u64 {
    gcd(a.unsigned_abs(), b.unsigned_abs())
}

/// Least common multiple; `None` on overflow.
pub fn lcm(a: u64, b: u64) -> Option<u64> {
    if a == 0 || b == 0 {
        return Some(0);
    }
    (a / gcd(a, b)).checked_mul(b)
}

/// Reduces any integer into `[0, m)`.
pub fn reduce(a: i64, m: u64) -> u64 {
    assert!(m > 0, "modulus must be positive");
    (a as i128).rem_euclid(m as i128) as u64
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// A residue class `value mod modulus` with `0 <= value < modulus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Residue {
    value: u64,
    modulus: u64,
}

impl Residue {
    pub fn new(value: i64, modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::domain("modulus must be positive"));
        }
        Ok(Residue {
            value: reduce(value, modulus),
            modulus,
        })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

/// Inverse of `a` modulo `m` by the extended Euclidean algorithm.
pub fn mod_inverse(a: i64, m: u64) -> Result<Residue> {
    if m == 0 {
        return Err(Error::domain("modulus must be positive"));
    }
    let a_red = reduce(a, m) as i128;
    let (mut old_r, mut r) = (a_red, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    // old_r = gcd(a, m); m = 1 gives gcd 1 with every a
    let g = if m == 1 { 1 } else { old_r as u64 };
    if g != 1 {
        return Err(Error::NotCoprime {
            value: a,
            modulus: m,
            gcd: g,
        });
    }
    Ok(Residue {
        value: old_s.rem_euclid(m as i128) as u64,
        modulus: m,
    })
}

/// Deterministic Miller-Rabin, exact for every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization `n = prod p^e` with strictly increasing primes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// Number of distinct prime factors.
    pub fn omega(&self) -> u32 {
        self.factors.len() as u32
    }

    /// Number of divisors.
    pub fn tau(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| e as u64 + 1).product()
    }

    /// Number of ordered triples (a, b, c) with abc = n.
    pub fn d3(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(_, e)| (e as u64 + 1) * (e as u64 + 2) / 2)
            .product()
    }

    pub fn phi(&self) -> u64 {
        self.factors.iter().map(|&(p, e)| (p - 1) * p.pow(e - 1)).product()
    }

    pub fn mobius(&self) -> i64 {
        if self.factors.iter().any(|&(_, e)| e > 1) {
            0
        } else if self.factors.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// All positive divisors in ascending order.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let len = divs.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }
}

fn pollard_brent(n: u64, seed: u64) -> u64 {
    let f = |x: u64| (mul_mod(x, x, n) + seed) % n;
    let mut y = seed % n;
    let m = 128u64;
    let mut g = 1u64;
    let mut r = 1u64;
    let mut q = 1u64;
    let mut x = y;
    let mut ys = y;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..m.min(r - k) {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            g = gcd(q, n);
            k += m;
        }
        r *= 2;
    }
    if g == n {
        loop {
            ys = f(ys);
            g = gcd(x.abs_diff(ys), n);
            if g > 1 {
                break;
            }
        }
    }
    g
}

fn split_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let mut seed = 1;
    loop {
        let d = pollard_brent(n, seed);
        if d != n && d != 1 {
            split_into(d, out);
            split_into(n / d, out);
            return;
        }
        seed += 1;
    }
}

/// Factorizes `1 <= n <= 2^63` by trial division followed by Pollard-Brent.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::domain("cannot factorize 0"));
    }
    if n > 1 << 63 {
        return Err(Error::domain(format!("{n} exceeds 2^63")));
    }
    let mut rest = n;
    let mut primes = Vec::new();
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        while rest % p == 0 {
            primes.push(p);
            rest /= p;
        }
    }
    let mut p = 53;
    while p * p <= rest && p < 1000 {
        while rest % p == 0 {
            primes.push(p);
            rest /= p;
        }
        p += 2;
    }
    split_into(rest, &mut primes);
    primes.sort_unstable();
    let mut factors: Vec<(u64, u32)> = Vec::new();
    for q in primes {
        match factors.last_mut() {
            Some((last, e)) if *last == q => *e += 1,
            _ => factors.push((q, 1)),
        }
    }
    Ok(Factorization { n, factors })
}

pub fn tau(n: u64) -> u64 {
    factorize(n).map(|f| f.tau()).unwrap_or(0)
}

pub fn d3(n: u64) -> u64 {
    factorize(n).map(|f| f.d3()).unwrap_or(0)
}

pub fn phi(n: u64) -> u64 {
    factorize(n).map(|f| f.phi()).unwrap_or(0)
}

pub fn mobius(n: u64) -> i64 {
    factorize(n).map(|f| f.mobius()).unwrap_or(0)
}

pub fn omega(n: u64) -> u32 {
    factorize(n).map(|f| f.omega()).unwrap_or(0)
}

/// Smallest generator of the unit group modulo the prime `p` (1 when p = 2).
pub fn primitive_root(p: u64) -> Result<Residue> {
    if !is_prime(p) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    if p == 2 {
        return Ok(Residue { value: 1, modulus: 2 });
    }
    let order = factorize(p - 1)?;
    for g in 2..p {
        if order.factors().iter().all(|&(q, _)| pow_mod(g, (p - 1) / q, p) != 1) {
            return Ok(Residue { value: g, modulus: p });
        }
    }
    unreachable!("every prime has a primitive root")
}

/// All primes `<= n` by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Primes in the closed dyadic segment `[x, 2x]`.
pub fn primes_in_dyadic(x: u64) -> Vec<u64> {
    primes_up_to(2 * x).into_iter().filter(|&p| p >= x).collect()
}

/// Table of the k-fold divisor function `d_k(n)` for `0 <= n <= limit` (entry 0 is 0).
pub fn divisor_function_table(limit: usize, k: u32) -> Vec<u32> {
    let mut table = vec![1u32; limit + 1];
    if limit == 0 {
        table[0] = 0;
        return table;
    }
    table[0] = 0;
    // d_k(p^a) = C(a + k - 1, k - 1)
    let binom = |a: u64| -> u32 {
        let mut c = 1u64;
        for i in 1..k as u64 {
            c = c * (a + i) / i;
        }
        c as u32
    };
    let mut composite = vec![false; limit + 1];
    for p in 2..=limit {
        if composite[p] {
            continue;
        }
        let mut multiple = 2 * p;
        while multiple <= limit {
            composite[multiple] = true;
            multiple += p;
        }
        let mut pk = p;
        let mut a = 1u64;
        loop {
            let factor = binom(a);
            let mut m = pk;
            while m <= limit {
                // each m is touched once per prime, at its exact power of p
                if (m / pk) % p != 0 {
                    table[m] *= factor;
                }
                m += pk;
            }
            match pk.checked_mul(p) {
                Some(next) if next <= limit => {
                    pk = next;
                    a += 1;
                }
                _ => break,
            }
        }
    }
    table
}

/// Ramanujan sum `c_q(n) = sum_{d | gcd(n, q)} mu(q/d) d`.
pub fn ramanujan_sum(n: i64, q: u64) -> Result<i64> {
    if q == 0 {
        return Err(Error::domain("Ramanujan sum needs q >= 1"));
    }
    let g = gcd(n.unsigned_abs(), q);
    let g = if g == 0 { q } else { g };
    let mut total = 0i64;
    for d in factorize(g)?.divisors() {
        total += mobius(q / d) * d as i64;
    }
    Ok(total)
}

/// The rational number `n M'/r + n r'/M - n/(M r)` with `M'` the inverse of M mod r and
/// `r'` the inverse of r mod M. It is an integer whenever gcd(M, r) = 1.
pub fn reciprocity_defect(m: u64, r: u64, n: i64) -> Result<Ratio<i128>> {
    let m_bar = mod_inverse(m as i64, r)?.value() as i128;
    let r_bar = mod_inverse(r as i64, m)?.value() as i128;
    let (m, r, n) = (m as i128, r as i128, n as i128);
    Ok(Ratio::new(n * m_bar, r) + Ratio::new(n * r_bar, m) - Ratio::new(n, m * r))
}
