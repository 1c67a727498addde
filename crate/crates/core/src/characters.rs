//! Dirichlet characters modulo a prime and their Gauss sums.

use num_complex::Complex64;

use crate::arith::{is_prime, primitive_root, reduce, Residue};
use crate::error::{Error, Result};
use crate::expsums::unit_root;

/// The character mod a prime `M` with `chi(g) = e(k/(M-1))` for the smallest primitive root `g`.
///
/// Values are tabulated once at construction; evaluation is a table lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletCharacter {
    modulus: u64,
    generator: Residue,
    index: u64,
    dlog: Vec<u64>,
    values: Vec<Complex64>,
}

impl DirichletCharacter {
    /// Builds the character of index `k` modulo the prime `m`; `k = 0` is the principal character.
    pub fn new(m: u64, k: u64) -> Result<Self> {
        if !is_prime(m) {
            return Err(Error::domain(format!("character modulus {m} is not prime")));
        }
        if k >= m - 1 && !(m == 2 && k == 0) {
            return Err(Error::domain(format!("character index {k} outside [0, {})", m - 1)));
        }
        let generator = primitive_root(m)?;
        let order = m - 1;
        let mut dlog = vec![0u64; m as usize];
        let mut values = vec![Complex64::new(0.0, 0.0); m as usize];
        let mut power = 1u64;
        for e in 0..order {
            dlog[power as usize] = e;
            // exact reduction of k * e / (M - 1) modulo 1 before the trig call
            let numerator = ((k as u128 * e as u128) % order as u128) as u64;
            values[power as usize] = unit_root(numerator, order);
            power = power * generator.value() % m;
        }
        Ok(DirichletCharacter {
            modulus: m,
            generator,
            index: k,
            dlog,
            values,
        })
    }

    /// Like [`DirichletCharacter::new`] but rejects the principal character.
    pub fn primitive(m: u64, k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("the principal character is not primitive"));
        }
        Self::new(m, k)
    }

    pub fn principal(m: u64) -> Result<Self> {
        Self::new(m, 0)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn generator(&self) -> Residue {
        self.generator
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn is_primitive(&self) -> bool {
        self.index != 0
    }

    /// Discrete logarithm of a unit with respect to the generator.
    pub fn discrete_log(&self, n: i64) -> Option<u64> {
        let r = reduce(n, self.modulus);
        (r != 0).then(|| self.dlog[r as usize])
    }

    pub fn evaluate(&self, n: i64) -> Complex64 {
        self.values[reduce(n, self.modulus) as usize]
    }

    /// Value at an already reduced residue.
    #[inline]
    pub fn at_residue(&self, r: u64) -> Complex64 {
        self.values[r as usize]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn conj(&self) -> Self {
        let order = self.modulus - 1;
        let k = if order == 0 { 0 } else { (order - self.index) % order };
        DirichletCharacter {
            modulus: self.modulus,
            generator: self.generator,
            index: k,
            dlog: self.dlog.clone(),
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    /// `chi(-1)`, either +1 or -1.
    pub fn parity(&self) -> Complex64 {
        self.evaluate(-1)
    }

    /// `sum_{a mod M} chi(a) e(a/M)`.
    pub fn gauss_sum(&self) -> Result<Complex64> {
        if !self.is_primitive() {
            return Err(Error::domain("Gauss sum requested for the principal character"));
        }
        Ok((1..self.modulus)
            .map(|a| self.values[a as usize] * unit_root(a, self.modulus))
            .sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::primes_up_to;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn examples() {
        let principal = DirichletCharacter::new(5, 0).unwrap();
        for n in 1..5 {
            assert_eq!(principal.evaluate(n), Complex64::new(1.0, 0.0));
        }
        let legendre = DirichletCharacter::new(5, 2).unwrap();
        assert!(close(legendre.evaluate(2), Complex64::new(-1.0, 0.0), 1e-15));
        assert!(close(legendre.evaluate(4), Complex64::new(1.0, 0.0), 1e-15));
        assert_eq!(legendre.evaluate(10), Complex64::new(0.0, 0.0));
        // quadratic residue table mod 5: {1, 4}
        for n in 1..5i64 {
            let qr = [1, 4].contains(&n);
            let want = if qr { 1.0 } else { -1.0 };
            assert!(close(legendre.evaluate(n), Complex64::new(want, 0.0), 1e-15));
        }
        let chi7 = DirichletCharacter::new(7, 1).unwrap();
        assert_eq!(chi7.generator().value(), 3);
        assert!(close(chi7.evaluate(3), unit_root(1, 6), 1e-15));
        assert!(DirichletCharacter::new(9, 1).is_err());
        assert!(DirichletCharacter::new(7, 6).is_err());
        assert!(DirichletCharacter::primitive(7, 0).is_err());
    }

    #[test]
    fn gauss_sum_examples() {
        let legendre = DirichletCharacter::new(5, 2).unwrap();
        assert!(close(
            legendre.gauss_sum().unwrap(),
            Complex64::new(5f64.sqrt(), 0.0),
            1e-12
        ));
        let chi3 = DirichletCharacter::new(3, 1).unwrap();
        assert!(close(
            chi3.gauss_sum().unwrap(),
            Complex64::new(0.0, 3f64.sqrt()),
            1e-12
        ));
        for k in 1..6 {
            let g = DirichletCharacter::new(7, k).unwrap().gauss_sum().unwrap();
            assert!((g.norm() - 7f64.sqrt()).abs() < 1e-12);
        }
        assert!(DirichletCharacter::new(5, 0).unwrap().gauss_sum().is_err());
    }

    #[test]
    fn orthogonality_and_gauss_norm() {
        for m in primes_up_to(101).into_iter().filter(|&m| m > 2) {
            for k in 1..m - 1 {
                let chi = DirichletCharacter::new(m, k).unwrap();
                let total: Complex64 = (0..m as i64).map(|n| chi.evaluate(n)).sum();
                assert!(total.norm() < 1e-12, "M={m} k={k}: {total}");
                let g = chi.gauss_sum().unwrap();
                assert!((g.norm() - (m as f64).sqrt()).abs() < 1e-10);
                let parity = chi.parity();
                assert!(close(parity * parity, Complex64::new(1.0, 0.0), 1e-12));
                assert_eq!(parity, chi.evaluate(m as i64 - 1));
            }
        }
    }

    #[test]
    fn conjugation() {
        let chi = DirichletCharacter::new(11, 3).unwrap();
        let conj = chi.conj();
        assert_eq!(conj.index(), 7);
        for n in -30..30 {
            assert!(close(conj.evaluate(n), chi.evaluate(n).conj(), 1e-15));
        }
        let rebuilt = DirichletCharacter::new(11, 7).unwrap();
        for n in 0..11 {
            assert!(close(conj.evaluate(n), rebuilt.evaluate(n), 1e-14));
        }
    }
}
