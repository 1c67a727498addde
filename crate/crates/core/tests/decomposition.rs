use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use subconvexity_core::arith::pow_mod;
use subconvexity_core::decomposition::{connection_check, f1_sum, key_identity_check, o_sum, s_n, ExperimentConfig};
use subconvexity_core::voronoi::{d3_provider, ScaledProvider};

fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
    (a - b).norm() <= rel * b.norm()
}

/// Number of ordered triples `(a, b, c)` with `abc = n`.
fn d3_by_counting(n: u64) -> u64 {
    let mut count = 0;
    for a in 1..=n {
        if n % a == 0 {
            let m = n / a;
            count += (1..=m).filter(|b| m % b == 0).count() as u64;
        }
    }
    count
}

#[test]
fn twisted_sum_matches_an_independent_evaluation() {
    let config = ExperimentConfig::standard();
    let value = s_n(&config).unwrap();
    assert!(
        close(value, Complex64::new(414.9024847158721, -527.1781456909364), 1e-9),
        "{value}"
    );

    // character values from an explicit discrete logarithm table
    let m = config.modulus;
    let chi = config.character().unwrap();
    let g = chi.generator().value();
    let mut angle = vec![None; m as usize];
    for j in 0..m - 1 {
        angle[pow_mod(g, j, m) as usize] = Some(2.0 * PI * (config.character_index * j) as f64 / (m - 1) as f64);
    }
    let mut oracle = Complex64::new(0.0, 0.0);
    for n in 10_001..=20_000u64 {
        let Some(theta) = angle[(n % m) as usize] else { continue };
        let w = config.outer_weight.eval(n as f64 / config.n_scale);
        let phase = theta - config.t * (n as f64).ln();
        oracle += Complex64::from_polar(d3_by_counting(n) as f64 * w, phase);
    }
    assert!(close(value, oracle, 1e-9), "{value} vs {oracle}");
}

#[test]
fn amplified_sums_are_frozen() {
    let config = ExperimentConfig::standard();
    let f1 = f1_sum(&config).unwrap();
    assert!(
        close(f1, Complex64::new(6805.0330630611115, -5727.794550512598), 1e-8),
        "{f1}"
    );
    let o = o_sum(&config).unwrap();
    assert!(
        close(o, Complex64::new(-2002.0791601708036, 6715.511533574099), 1e-6),
        "{o}"
    );
}

#[test]
fn amplified_sums_are_linear_in_the_provider() {
    let config = ExperimentConfig::standard();
    let mut doubled = config.clone();
    doubled.provider = Arc::new(ScaledProvider::new(d3_provider(), 2.0));
    let (f, g) = (f1_sum(&config).unwrap(), f1_sum(&doubled).unwrap());
    assert!(close(g, f * 2.0, 1e-12));
    let (f, g) = (o_sum(&config).unwrap(), o_sum(&doubled).unwrap());
    assert!(close(g, f * 2.0, 1e-12));
}

#[test]
fn key_identity_holds_across_the_grid() {
    for modulus in [7, 11] {
        for t in [100.0, 200.0] {
            let config = ExperimentConfig::standard().with(modulus, t, 1e4);
            let report = key_identity_check(&config, 2, 3, 15_000).unwrap();
            assert!(
                report.rel_error_exact <= 1e-6,
                "M={modulus} t={t}: {}",
                report.rel_error_exact
            );
        }
    }
}

#[test]
fn connection_matches_the_stated_envelopes() {
    let report = connection_check(&ExperimentConfig::standard()).unwrap();
    assert!(report.identity_rel_error <= 1e-6);
    assert!(report.f1_envelope.ratio <= 20.0, "{:?}", report.f1_envelope);
    assert!(report.o_envelope.ratio <= 20.0, "{:?}", report.o_envelope);
    assert!(report.ratio.norm() > 0.5 && report.ratio.norm() < 2.0);
}
