//! Adaptive Gauss-Kronrod quadrature for complex-valued integrands, and Gauss-Legendre rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_36,
    0.295_524_224_714_752_87,
];

/// Integral estimate with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

/// One 21-point Kronrod panel; the error estimate is the Kronrod/Gauss difference.
pub fn gauss_kronrod_21<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let kronrod = kronrod * half;
    let gauss = gauss * half;
    (kronrod, (kronrod - gauss).norm())
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    order: usize,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // largest error first; ties broken by creation order for determinism
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.order.cmp(&self.order))
    }
}

/// Globally adaptive integration over the given initial panels.
///
/// Panels are bisected in order of decreasing error estimate until the total estimate is
/// at most `abs_tol` or `max_panels` is reached (resource error carrying the best value).
pub fn integrate_panels<F: Fn(f64) -> Complex64>(
    f: &F,
    breakpoints: &[f64],
    abs_tol: f64,
    max_panels: usize,
) -> Result<Quadrature> {
    let mut heap = BinaryHeap::new();
    let mut order = 0usize;
    let mut evaluations = 0usize;
    for w in breakpoints.windows(2) {
        let (value, error) = gauss_kronrod_21(f, w[0], w[1]);
        evaluations += 21;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
            order,
        });
        order += 1;
    }
    loop {
        let total_error: f64 = heap.iter().map(|p| p.error).sum();
        if total_error <= abs_tol {
            break;
        }
        if heap.len() >= max_panels {
            let value = sum_panels(&heap);
            return Err(Error::resource(
                format!("quadrature error {total_error:.3e} above tolerance {abs_tol:.3e} after {max_panels} panels"),
                Some(value),
            ));
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // panel cannot be split further in floating point
            let value = sum_panels(&heap) + worst.value;
            return Err(Error::resource("quadrature panel width underflow", Some(value)));
        }
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gauss_kronrod_21(f, a, b);
            evaluations += 21;
            heap.push(Panel {
                a,
                b,
                value,
                error,
                order,
            });
            order += 1;
        }
    }
    let error = heap.iter().map(|p| p.error).sum();
    Ok(Quadrature {
        value: sum_panels(&heap),
        error,
        evaluations,
    })
}

fn sum_panels(heap: &BinaryHeap<Panel>) -> Complex64 {
    // sum in panel position order so the result does not depend on heap layout
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    panels.iter().map(|p| p.value).sum()
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_exact_for_polynomials() {
        for d in 0..=31 {
            let f = |x: f64| Complex64::new(x.powi(d), 0.0);
            let (v, _) = gauss_kronrod_21(&f, 0.0, 1.0);
            assert!((v.re - 1.0 / (d + 1) as f64).abs() < 1e-15, "degree {d}");
        }
    }

    #[test]
    fn adaptive_oscillatory() {
        // int_0^10 e^{i 50 x} dx
        let f = |x: f64| Complex64::new(0.0, 50.0 * x).exp();
        let breaks: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        let q = integrate_panels(&f, &breaks, 1e-13, 10_000).unwrap();
        let exact = (Complex64::new(0.0, 500.0).exp() - 1.0) / Complex64::new(0.0, 50.0);
        assert!((q.value - exact).norm() < 1e-12);
        assert!(integrate_panels(&f, &[0.0, 10.0], 1e-13, 2).unwrap_err().is_resource());
    }

    #[test]
    fn legendre_rules() {
        for n in [1usize, 2, 5, 16, 40, 101] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for d in 0..(2 * n).min(60) {
                let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32)).sum();
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d + 1) as f64 };
                assert!((integral - exact).abs() < 1e-13, "n={n} d={d}");
            }
        }
    }
}
