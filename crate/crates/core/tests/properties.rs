use num_complex::Complex64;
use num_traits::Zero;
use proptest::prelude::*;
use rustfft::FftPlanner;
use subconvexity_core::arith::{d3, gcd, is_prime, mod_inverse, primes_up_to, reciprocity_defect, tau};
use subconvexity_core::characters::DirichletCharacter;
use subconvexity_core::expsums::{gcd3, kloosterman, kloosterman_row, twisted_kloosterman};
use subconvexity_core::oscint::{integrate_oscillatory, OscillatorySpec, SmoothWeight};
use subconvexity_core::voronoi::{d3_provider, CoefficientProvider};

fn prime_modulus() -> impl Strategy<Value = u64> {
    prop::sample::select(primes_up_to(101).into_iter().filter(|&p| p >= 3).collect::<Vec<_>>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn inverse_is_an_inverse(a in -10_000i64..10_000, m in 2u64..5_000) {
        prop_assume!(gcd(a.unsigned_abs(), m) == 1);
        let inv = mod_inverse(a, m).unwrap().value();
        prop_assert_eq!((a.rem_euclid(m as i64) as u64 * inv) % m, 1);
    }

    #[test]
    fn divisor_functions_are_multiplicative(m in 1u64..3_000, n in 1u64..3_000) {
        prop_assume!(gcd(m, n) == 1);
        prop_assert_eq!(tau(m * n), tau(m) * tau(n));
        prop_assert_eq!(d3(m * n), d3(m) * d3(n));
    }

    #[test]
    fn reciprocity_defect_is_an_integer(m in 1u64..500, r in 1u64..500, n in -1_000i64..1_000) {
        prop_assume!(gcd(m, r) == 1);
        prop_assert!(reciprocity_defect(m, r, n).unwrap().is_integer());
    }

    #[test]
    fn characters_are_multiplicative(m in prime_modulus(), k in 0u64..100, a in -1_000i64..1_000, b in -1_000i64..1_000) {
        let chi = DirichletCharacter::new(m, k % (m - 1)).unwrap();
        let lhs = chi.evaluate(a * b);
        prop_assert!((lhs - chi.evaluate(a) * chi.evaluate(b)).norm() < 1e-12);
        prop_assert!((chi.conj().evaluate(a) - chi.evaluate(a).conj()).norm() < 1e-15);
    }

    #[test]
    fn characters_are_orthogonal(m in prime_modulus(), k in 1u64..100) {
        let chi = DirichletCharacter::primitive(m, 1 + k % (m - 2)).unwrap();
        let total: Complex64 = (0..m as i64).map(|n| chi.evaluate(n)).sum();
        prop_assert!(total.norm() < 1e-12);
        let gauss = chi.gauss_sum().unwrap();
        prop_assert!((gauss.norm() - (m as f64).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn kloosterman_sums_satisfy_the_weil_bound(a in -5_000i64..5_000, b in -5_000i64..5_000, c in 1u64..2_000) {
        let s = kloosterman(a, b, c);
        let bound = tau(c) as f64 * (gcd3(a, b, c) as f64).sqrt() * (c as f64).sqrt();
        prop_assert!(s.norm() <= bound * (1.0 + 1e-9) + 1e-9);
        // real and symmetric in a, b
        prop_assert!(s.im.abs() < 1e-8 * (c as f64));
        prop_assert!((kloosterman(b, a, c) - s).norm() < 1e-8 * (c as f64));
    }

    #[test]
    fn kloosterman_row_matches_direct_sums(a in -300i64..300, c in 1u64..300, b in 0i64..300) {
        let row = kloosterman_row(a, c, &mut FftPlanner::new());
        let b = b.rem_euclid(c as i64);
        prop_assert!((row[b as usize] - kloosterman(a, b, c)).norm() < 1e-8 * (c as f64));
    }

    #[test]
    fn principal_twist_is_the_classical_sum(m in prime_modulus(), k in 1u64..20, r in -500i64..500, n in -500i64..500) {
        let c = m * k;
        let principal = DirichletCharacter::principal(m).unwrap();
        let twisted = twisted_kloosterman(&principal, r, n, c).unwrap();
        prop_assert!((twisted - kloosterman(r, n, c)).norm() < 1e-9 * c as f64);
    }

    #[test]
    fn d3_provider_is_multiplicative(m in 1u64..2_000, n in 1u64..2_000) {
        prop_assume!(gcd(m, n) == 1);
        let p = d3_provider();
        prop_assert_eq!(p.lambda(1, m * n), p.lambda(1, m) * p.lambda(1, n));
        prop_assert_eq!(p.lambda(m, n), p.lambda(n, m));
    }

    #[test]
    fn bumps_are_nonnegative_and_supported(a in 0.1f64..10.0, len in 0.1f64..10.0, x in 0.0f64..25.0) {
        let w = SmoothWeight::bump(a, a + len).unwrap();
        let v = w.eval(x);
        prop_assert!(v >= 0.0);
        if x <= a || x >= a + len {
            prop_assert!(v.is_zero());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn oscillatory_integrals_conjugate_under_time_reversal(t in 5.0f64..300.0, ratio in 0.5f64..3.0) {
        let weight = SmoothWeight::bump(5.0, 15.0).unwrap();
        let n_scale = 1e4;
        let forward = OscillatorySpec::key_lemma(t, n_scale, 7, ratio * n_scale, weight.clone());
        let backward = OscillatorySpec::key_lemma(-t, n_scale, 7, ratio * n_scale, weight);
        let a = integrate_oscillatory(&forward, 1e-10).unwrap();
        let b = integrate_oscillatory(&backward, 1e-10).unwrap();
        prop_assert!((a.value - b.value.conj()).norm() <= a.error + b.error + 1e-12);
    }

    #[test]
    fn primality_agrees_with_trial_division(n in 0u64..100_000) {
        let trial = n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0);
        prop_assert_eq!(is_prime(n), trial);
    }
}
