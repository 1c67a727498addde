//! The amplified decomposition of the twisted sum `S(N)`: the key Poisson identity for the
//! `r`-sum, the amplified sum `F1`, its dual term `O`, the connection between them, and the
//! exponent optimization that balances the final bounds.

mod amplified;
mod exponents;
mod keylemma;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::arith::{is_prime, primes_in_dyadic};
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};
use crate::oscint::SmoothWeight;
use crate::voronoi::{d3_provider, CoefficientProvider, DIRECT_SUM_BUDGET};

pub use amplified::{
    connection_check, connection_residual_scan, dual_decomposition, f1_sharp_diagnostic, f1_sum, o_sum,
    ConnectionReport, DualDecomposition, EnvelopeComparison, SharpDiagnostic,
};
pub use exponents::{optimize_exponents, optimize_exponents_with, ExponentSolution, ExponentTerm};
pub use keylemma::{key_identity_check, stationary_residual_scan, KeyIdentityReport, ResidualScan};

/// Every parameter of one run of the decomposition experiments.
#[derive(Clone)]
pub struct ExperimentConfig {
    /// Prime conductor `M` of the character.
    pub modulus: u64,
    /// Index of the character mod `M` (see [`DirichletCharacter::new`]); must be nonzero.
    pub character_index: u64,
    pub t: f64,
    pub n_scale: f64,
    /// Anchors of the dyadic prime segments `p ~ P`, `l ~ L`.
    pub p_anchor: u64,
    pub l_anchor: u64,
    pub provider: Arc<dyn CoefficientProvider>,
    /// Weight `w` of the `n`-sum.
    pub outer_weight: SmoothWeight,
    /// Weight `V` of the `r`-sum, in the variable `r / (N p / M l t)`.
    pub inner_weight: SmoothWeight,
    pub tolerance: f64,
    pub seed: u64,
}

impl fmt::Debug for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExperimentConfig")
            .field("modulus", &self.modulus)
            .field("character_index", &self.character_index)
            .field("t", &self.t)
            .field("n_scale", &self.n_scale)
            .field("p_anchor", &self.p_anchor)
            .field("l_anchor", &self.l_anchor)
            .field("provider", &self.provider.name())
            .field("outer_weight", &self.outer_weight.support())
            .field("inner_weight", &self.inner_weight.support())
            .field("tolerance", &self.tolerance)
            .field("seed", &self.seed)
            .finish()
    }
}

/// Support of the default `V`: the stationary point `2 pi n / N` of the zero frequency lies in
/// `[2 pi, 4 pi]` for `n / N` in the support `[1, 2]` of `w`, well inside `[5, 15]`.
pub const DEFAULT_INNER_SUPPORT: (f64, f64) = (5.0, 15.0);

impl ExperimentConfig {
    /// `M = 7`, first nontrivial character, `t = 100`, `N = 10^4`, `P = 2`, `L = 3`, `d3`
    /// coefficients, `w` the bump on `[1, 2]`, `V` the bump on `[5, 15]`.
    pub fn standard() -> Self {
        ExperimentConfig {
            modulus: 7,
            character_index: 1,
            t: 100.0,
            n_scale: 1e4,
            p_anchor: 2,
            l_anchor: 3,
            provider: Arc::new(d3_provider()),
            outer_weight: SmoothWeight::bump(1.0, 2.0).expect("valid support"),
            inner_weight: SmoothWeight::bump(DEFAULT_INNER_SUPPORT.0, DEFAULT_INNER_SUPPORT.1).expect("valid support"),
            tolerance: 1e-6,
            seed: 0,
        }
    }

    pub fn with(mut self, modulus: u64, t: f64, n_scale: f64) -> Self {
        self.modulus = modulus;
        self.t = t;
        self.n_scale = n_scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.modulus) {
            return Err(Error::domain(format!("M = {} is not prime", self.modulus)));
        }
        if self.character_index == 0 || self.character_index >= self.modulus - 1 {
            return Err(Error::domain(format!(
                "character index {} must lie in [1, {})",
                self.character_index,
                self.modulus - 1
            )));
        }
        if !(self.t > 2.0) {
            return Err(Error::domain(format!("t = {} must exceed 2", self.t)));
        }
        if self.p_anchor < 2 || self.l_anchor < 2 {
            return Err(Error::domain("P and L must be at least 2"));
        }
        if !(self.n_scale >= self.modulus as f64 * self.t) {
            return Err(Error::domain(format!(
                "N = {} is below M t = {}",
                self.n_scale,
                self.modulus as f64 * self.t
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::domain("tolerance must be positive"));
        }
        if self.p_primes().is_empty() || self.l_primes().is_empty() {
            return Err(Error::domain("a prime segment is empty after removing M"));
        }
        Ok(())
    }

    pub fn character(&self) -> Result<DirichletCharacter> {
        DirichletCharacter::primitive(self.modulus, self.character_index)
    }

    /// Primes in `[P, 2P]` other than `M`.
    pub fn p_primes(&self) -> Vec<u64> {
        primes_in_dyadic(self.p_anchor)
            .into_iter()
            .filter(|&q| q != self.modulus)
            .collect()
    }

    /// Primes in `[L, 2L]` other than `M`.
    pub fn l_primes(&self) -> Vec<u64> {
        primes_in_dyadic(self.l_anchor)
            .into_iter()
            .filter(|&q| q != self.modulus)
            .collect()
    }

    /// `N p / (M l t)`, the length scale of the `r`-sum.
    pub fn r_scale(&self, p: u64, ell: u64) -> f64 {
        self.n_scale * p as f64 / (self.modulus as f64 * ell as f64 * self.t)
    }

    /// `sum_p p / P^2 * sum_l 1 / l`, the prime averages in front of the zero frequency.
    pub fn prime_prefactor(&self) -> f64 {
        let p2 = (self.p_anchor * self.p_anchor) as f64;
        let sp: f64 = self.p_primes().iter().map(|&p| p as f64 / p2).sum();
        let sl: f64 = self.l_primes().iter().map(|&l| 1.0 / l as f64).sum();
        sp * sl
    }

    /// Range of `n` covered by the support of `w`.
    fn n_range(&self) -> Result<(u64, u64)> {
        let (lo, hi) = self.outer_weight.support();
        let first = (self.n_scale * lo).floor().max(0.0) as u64 + 1;
        let last = (self.n_scale * hi).ceil() as u64;
        if (last - first) as f64 > DIRECT_SUM_BUDGET {
            return Err(Error::resource(
                format!("{} terms exceed the direct-sum budget", last - first),
                None,
            ));
        }
        Ok((first, last))
    }

    /// `(n, lambda(1, n) w(n / N))` over the support of `w`, zero weights dropped.
    fn weighted_coefficients(&self) -> Result<Vec<(u64, f64)>> {
        let (first, last) = self.n_range()?;
        let table = self.provider.lambda_table(last as usize);
        Ok((first..=last)
            .filter_map(|n| {
                let w = self.outer_weight.eval(n as f64 / self.n_scale);
                (w != 0.0).then(|| (n, table[n as usize] * w))
            })
            .collect())
    }
}

/// `n^{-it}`.
pub(crate) fn power_it(n: f64, t: f64) -> Complex64 {
    Complex64::from_polar(1.0, -t * n.ln())
}

/// `sqrt(2 pi) x V(x) e(-1/8)`, the amplitude of the leading stationary-phase term of the zero
/// frequency: `int x^{-it} e(-n t/(N x)) V(x) dx ~ e(f(x0)) t^{-1/2} V_A(x0)`, `x0 = 2 pi n / N`.
pub fn stationary_amplitude(weight: &SmoothWeight, x: f64) -> Complex64 {
    Complex64::from_polar((2.0 * PI).sqrt() * x * weight.eval(x), -PI / 4.0)
}

/// `S(N) = sum_n lambda(1, n) chi(n) n^{-it} w(n / N)` by direct summation.
pub fn s_n(config: &ExperimentConfig) -> Result<Complex64> {
    config.validate()?;
    let chi = config.character()?;
    Ok(config
        .weighted_coefficients()?
        .iter()
        .map(|&(n, a)| chi.evaluate(n as i64) * power_it(n as f64, config.t) * a)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voronoi::ScaledProvider;

    #[test]
    fn validation() {
        assert!(ExperimentConfig::standard().validate().is_ok());
        let mut c = ExperimentConfig::standard();
        c.modulus = 9;
        assert!(c.validate().is_err());
        let c = ExperimentConfig::standard().with(7, 1.5, 1e4);
        assert!(c.validate().is_err());
        let c = ExperimentConfig::standard().with(7, 100.0, 500.0);
        assert!(c.validate().is_err());
        assert_eq!(ExperimentConfig::standard().p_primes(), vec![2, 3]);
        assert_eq!(ExperimentConfig::standard().l_primes(), vec![3, 5]);
    }

    #[test]
    fn s_n_conjugation() {
        let c = ExperimentConfig::standard();
        let mut d = c.clone();
        d.character_index = c.modulus - 1 - c.character_index;
        d.t = -c.t;
        // the sign of t is outside the validated range, so evaluate the sum directly
        let chi = d.character().unwrap();
        let conj: Complex64 = d
            .weighted_coefficients()
            .unwrap()
            .iter()
            .map(|&(n, a)| chi.evaluate(n as i64) * power_it(n as f64, d.t) * a)
            .sum();
        let s = s_n(&c).unwrap();
        assert!((s - conj.conj()).norm() < 1e-9 * s.norm());
    }

    #[test]
    fn s_n_is_linear_in_the_provider() {
        let c = ExperimentConfig::standard();
        let mut d = c.clone();
        d.provider = Arc::new(ScaledProvider::new(d3_provider(), 2.0));
        let (a, b) = (s_n(&c).unwrap(), s_n(&d).unwrap());
        assert!((b - a * 2.0).norm() < 1e-12 * b.norm());
    }
}
