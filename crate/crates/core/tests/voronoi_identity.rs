use subconvexity_core::arith::gcd;
use subconvexity_core::voronoi::*;

const REFERENCE_LHS: (f64, f64) = (-1.3932564313346165e-5, -6.481057716363307e-2);

fn setup() -> (D3Provider, subconvexity_core::oscint::SmoothWeight, DualWeights) {
    let p = d3_provider();
    let w = default_voronoi_weight().unwrap();
    let dual = DualWeights::new(&w, &p.spectral()).unwrap();
    (p, w, dual)
}

#[test]
fn regression_case_both_sides() {
    let (p, w, dual) = setup();
    let lhs = voronoi_lhs(&p, 1, 1, 4, &w, 5000.0).unwrap();
    assert!((lhs.re - REFERENCE_LHS.0).abs() < 1e-12);
    assert!((lhs.im - REFERENCE_LHS.1).abs() < 1e-12);
    let rhs = voronoi_rhs(&p, 1, 1, 4, &w, &dual, 5000.0, 1e-8, DualNormalization::Weighted).unwrap();
    assert!(relative_error(lhs, rhs.value) <= 1e-4);
}

#[test]
fn grid_cases_verify() {
    let (p, w, _) = setup();
    let cases = [
        VoronoiCase {
            m: 1,
            a: 1,
            c: 4,
            n_scale: 5000.0,
        },
        VoronoiCase {
            m: 1,
            a: 3,
            c: 7,
            n_scale: 5000.0,
        },
        VoronoiCase {
            m: 1,
            a: 1,
            c: 1,
            n_scale: 5000.0,
        },
    ];
    let reports = verify_voronoi(&p, &cases, &w, 1e-6).unwrap();
    for r in &reports[..2] {
        assert!(r.skipped.is_none(), "{:?}", r.skipped);
        assert!(r.rel_error <= 1e-4, "{:?}", r);
        assert_eq!(r.polar_handling, PolarHandling::AnnihilatedLogMoments(3));
    }
    assert!(reports[2].skipped.as_deref().unwrap().contains("trivial"));
}

#[test]
fn doubling_the_modulus_scales_the_dual_length_by_about_eight() {
    let (p, w, dual) = setup();
    let small = voronoi_rhs(&p, 1, 1, 3, &w, &dual, 5000.0, 1e-8, DualNormalization::Weighted).unwrap();
    let large = voronoi_rhs(&p, 1, 1, 6, &w, &dual, 5000.0, 1e-8, DualNormalization::Weighted).unwrap();
    let ratio = large.truncation.dual_length / small.truncation.dual_length;
    let cut_ratio = large.truncation.x_cut / small.truncation.x_cut;
    // the cutoff is c^3 / N times a certified argument bound that moves only mildly
    assert!((ratio / cut_ratio - 8.0).abs() < 1e-9);
    assert!((4.0..=16.0).contains(&ratio), "{ratio}");
}

#[test]
fn real_twist_gives_real_dual_sum() {
    let (p, w, dual) = setup();
    let rhs = voronoi_rhs(&p, 1, 1, 2, &w, &dual, 5000.0, 1e-8, DualNormalization::Weighted).unwrap();
    assert!(rhs.value.im.abs() < 1e-8);
    let lhs = voronoi_lhs(&p, 1, 1, 2, &w, 5000.0).unwrap();
    assert!((lhs - rhs.value).norm() < 1e-8);
}

#[test]
fn both_normalizations_agree_exactly() {
    let (p, w, dual) = setup();
    let a = voronoi_rhs(&p, 1, 2, 5, &w, &dual, 5000.0, 1e-6, DualNormalization::Weighted).unwrap();
    let b = voronoi_rhs(&p, 1, 2, 5, &w, &dual, 5000.0, 1e-6, DualNormalization::Unified).unwrap();
    assert_eq!(a.value, b.value);
}

#[test]
fn d3_is_multiplicative_and_symmetric() {
    let p = d3_provider();
    for m in 1..=200u64 {
        for n in 1..=200u64 {
            assert_eq!(p.lambda(m, n), p.lambda(n, m));
        }
    }
    for m1 in 1..=14u64 {
        for n1 in 1..=14u64 {
            for m2 in 1..=14u64 {
                for n2 in 1..=14u64 {
                    if gcd(m1 * n1, m2 * n2) == 1 {
                        assert_eq!(p.lambda(m1 * m2, n1 * n2), p.lambda(m1, n1) * p.lambda(m2, n2));
                    }
                }
            }
        }
    }
}

#[test]
fn rankin_selberg_envelope() {
    let p = d3_provider();
    let grid: Vec<u64> = (1..=5).map(|k| 10u64.pow(k)).collect();
    let sums = rankin_selberg_sums(&p, &grid);
    let fitted = grid
        .iter()
        .zip(&sums)
        .map(|(&x, s)| s / (x as f64 * (x as f64).ln().max(1.0).powi(8)))
        .fold(0.0, f64::max);
    assert!(fitted > 0.0 && fitted < 1.0, "{fitted}");
}
