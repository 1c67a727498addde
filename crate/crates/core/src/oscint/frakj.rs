use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SmoothWeight;
use crate::error::{Error, Result};
use crate::expsums::e;

/// One `(r, p, l)` parameter triple of an inner integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triple {
    pub r: i64,
    pub p: u64,
    pub ell: u64,
}

/// `int J_it(r1, N p1 y / l1; M) conj(J_it(r2, N p2 y / l2; M)) w(y) dy`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrakJParams {
    pub modulus: u64,
    pub t: f64,
    pub n_scale: f64,
    pub first: Triple,
    pub second: Triple,
    /// Inner weight `V` of the `x`-integrals.
    pub inner: SmoothWeight,
    /// Outer weight `w` of the `y`-integral.
    pub outer: SmoothWeight,
}

impl FrakJParams {
    /// `z = 16 pi^2 r N p / (M^2 t^2 l)`.
    pub fn z(&self, triple: Triple) -> f64 {
        let m = self.modulus as f64;
        16.0 * PI * PI * triple.r as f64 * self.n_scale * triple.p as f64
            / (m * m * self.t * self.t * triple.ell as f64)
    }

    /// Stationary point `x0 = (-1 + sqrt(1 + z y)) / (z / 4 pi)` of the inner phase.
    pub fn stationary_point(&self, triple: Triple, y: f64) -> f64 {
        let z = self.z(triple);
        // (-1 + sqrt(1 + z y)) / z = y / (1 + sqrt(1 + z y))
        4.0 * PI * y / (1.0 + (1.0 + z * y).sqrt())
    }

    /// `l1 r2 p2 - l2 r1 p1`.
    pub fn spacing_delta(&self) -> i64 {
        let (a, b) = (self.first, self.second);
        a.ell as i64 * b.r * b.p as i64 - b.ell as i64 * a.r * a.p as i64
    }

    /// True when every stationary point for `y` in the outer support lies inside the inner support.
    pub fn in_regime(&self) -> bool {
        let (lo, hi) = self.inner.support();
        let (ya, yb) = self.outer.support();
        [self.first, self.second].iter().all(|&tr| {
            tr.r > 0
                && [ya, yb].iter().all(|&y| {
                    let x = self.stationary_point(tr, y);
                    x > lo && x < hi
                })
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrakJReport {
    pub value: Complex64,
    /// Difference between the rule used and the rule on every other node.
    pub error_estimate: f64,
    pub z1: f64,
    pub z2: f64,
    pub in_regime: bool,
    pub delta: i64,
    /// `1 / t`.
    pub trivial_bound: f64,
    /// `M^2 l1 l2 / (N |l1 r2 p2 - l2 r1 p1|)` when the difference is nonzero.
    pub spacing_bound: Option<f64>,
    /// `1 / (t |z1 - z2|)`, the first-derivative-test size before substituting the `z_i`.
    pub derivative_test_size: Option<f64>,
}

/// Outer phase `log((-1 + sqrt(1+z1 y)) / (-1 + sqrt(1+z2 y))) + sqrt(1+z1 y) - sqrt(1+z2 y)`.
pub fn frakj_outer_phase(y: f64, z1: f64, z2: f64) -> f64 {
    let s1 = (1.0 + z1 * y).sqrt();
    let s2 = (1.0 + z2 * y).sqrt();
    ((s1 - 1.0) / (s2 - 1.0)).ln() + s1 - s2
}

/// `(z1 - z2) / (2 (sqrt(1+z1 y) + sqrt(1+z2 y)))`.
pub fn frakj_outer_phase_derivative(y: f64, z1: f64, z2: f64) -> f64 {
    (z1 - z2) / (2.0 * ((1.0 + z1 * y).sqrt() + (1.0 + z2 * y).sqrt()))
}

/// Trapezoid evaluation of the double integral.
///
/// Both grids resolve the largest phase derivative with at least four nodes per cycle plus a
/// margin for the spectrum of the bump weights; the error estimate compares against the rule
/// on every other node in both variables.
pub fn frak_j(params: &FrakJParams) -> Result<FrakJReport> {
    let t = params.t;
    if !(t.abs() > 0.0) || params.modulus == 0 || !(params.n_scale > 0.0) {
        return Err(Error::domain("frak J needs t != 0, M >= 1 and N > 0"));
    }
    let m = params.modulus as f64;
    let nu = |tr: Triple| tr.r as f64 * params.n_scale * tr.p as f64 / (m * m * t * tr.ell as f64);
    let (nu1, nu2) = (nu(params.first), nu(params.second));
    let (xa, xb) = params.inner.support();
    let (ya, yb) = params.outer.support();
    // cycles per unit length of the inner phase and of e(-y t / x) in y
    let x_rate = t.abs() / (2.0 * PI * xa) + yb * t.abs() / (xa * xa) + nu1.abs().max(nu2.abs());
    let y_rate = 2.0 * t.abs() / xa;
    let nx = (((xb - xa) * (4.0 * x_rate + 96.0 / (xb - xa))).ceil() as usize).div_ceil(2) * 2;
    let ny = (((yb - ya) * (4.0 * y_rate + 96.0 / (yb - ya))).ceil() as usize).div_ceil(2) * 2;
    if (nx as f64) * (ny as f64) > 4e9 {
        return Err(Error::resource(
            format!("frak J grid {nx} x {ny} exceeds the budget"),
            None,
        ));
    }
    let hx = (xb - xa) / nx as f64;
    let hy = (yb - ya) / ny as f64;
    let xs: Vec<f64> = (1..nx).map(|i| xa + hx * i as f64).collect();
    let base: Vec<Complex64> = xs
        .iter()
        .map(|&x| Complex64::new(0.0, -t * x.ln()).exp() * params.inner.eval(x))
        .collect();
    let b1: Vec<Complex64> = xs.iter().zip(&base).map(|(&x, v)| v * e(-nu1 * x)).collect();
    let b2: Vec<Complex64> = xs.iter().zip(&base).map(|(&x, v)| v * e(-nu2 * x)).collect();
    let rotation: Vec<Complex64> = xs.iter().map(|&x| e(-hy * t / x)).collect();
    let mut phase: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); xs.len()];
    let (mut fine, mut coarse) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for j in 1..ny {
        let y = ya + hy * j as f64;
        if (j - 1) % 128 == 0 {
            for (ph, &x) in phase.iter_mut().zip(&xs) {
                *ph = e(-y * t / x);
            }
        }
        let wy = params.outer.eval(y);
        if wy != 0.0 {
            let (mut j1, mut j2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            let (mut c1, mut c2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for (k, ph) in phase.iter().enumerate() {
                let u1 = b1[k] * ph;
                let u2 = b2[k] * ph;
                j1 += u1;
                j2 += u2;
                // xs[k] = xa + (k + 1) hx; odd k are the even-index nodes of the fine grid
                if k % 2 == 1 {
                    c1 += u1;
                    c2 += u2;
                }
            }
            fine += j1 * j2.conj() * (wy * hx * hx);
            if j % 2 == 0 {
                coarse += c1 * c2.conj() * (wy * 4.0 * hx * hx);
            }
        }
        for (ph, rot) in phase.iter_mut().zip(&rotation) {
            *ph *= rot;
        }
    }
    fine *= hy;
    coarse *= 2.0 * hy;
    let (z1, z2) = (params.z(params.first), params.z(params.second));
    let delta = params.spacing_delta();
    let spacing_bound = (delta != 0).then(|| {
        m * m * (params.first.ell * params.second.ell) as f64 / (params.n_scale * delta.unsigned_abs() as f64)
    });
    let derivative_test_size = (z1 != z2).then(|| 1.0 / (t.abs() * (z1 - z2).abs()));
    Ok(FrakJReport {
        value: fine,
        error_estimate: (fine - coarse).norm(),
        z1,
        z2,
        in_regime: params.in_regime(),
        delta,
        trivial_bound: 1.0 / t.abs(),
        spacing_bound,
        derivative_test_size,
    })
}

/// Fitted constants of `|J| <= min(C1 / t, C2 M^2 l1 l2 / (N |l1 r2 p2 - l2 r1 p1|))`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrakJBoundFit {
    pub points: usize,
    /// `max |J| t`.
    pub c1: f64,
    /// `max |J| / spacing_bound` over points with a nonzero spacing difference.
    pub c2: f64,
    pub spacing_points: usize,
    /// Largest quadrature error estimate relative to `|J|` (or to `1/t` when `J` is tiny).
    pub max_relative_error: f64,
    pub reports: Vec<FrakJReport>,
}

/// `N` placing `z = z_target` at the triple `(1, p, l)`.
pub fn frakj_scale_for(modulus: u64, t: f64, p: u64, ell: u64, z_target: f64) -> f64 {
    let m = modulus as f64;
    z_target * m * m * t * t * ell as f64 / (16.0 * PI * PI * p as f64)
}

/// `count` random parameter sets with every stationary point inside the support of `V`.
///
/// For each `(M, t)` drawn from the lists, `N` puts `z = 100` at `(r, p, l) = (1, 2, 3)`; the
/// triples are drawn with `r <= 3`, `p` in `{2, 3, 5}` and `l` in `{2, 3, 5}`, and kept when the
/// pair is in regime. Both weights are the bump on `[1, 2]`.
pub fn frakj_acceptance_grid(moduli: &[u64], ts: &[f64], count: usize, seed: u64) -> Result<Vec<FrakJParams>> {
    if moduli.is_empty() || ts.is_empty() {
        return Err(Error::domain("the frak J grid needs at least one modulus and one t"));
    }
    let weight = SmoothWeight::bump(1.0, 2.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let primes = [2u64, 3, 5];
    let triple = |rng: &mut ChaCha8Rng| Triple {
        r: rng.gen_range(1..=3),
        p: primes[rng.gen_range(0..primes.len())],
        ell: primes[rng.gen_range(0..primes.len())],
    };
    let mut grid = Vec::with_capacity(count);
    let mut attempts = 0;
    while grid.len() < count {
        attempts += 1;
        if attempts > 1000 * count.max(1) {
            return Err(Error::domain("too few in-regime parameter sets"));
        }
        let modulus = moduli[rng.gen_range(0..moduli.len())];
        let t = ts[rng.gen_range(0..ts.len())];
        let params = FrakJParams {
            modulus,
            t,
            n_scale: frakj_scale_for(modulus, t, 2, 3, 100.0),
            first: triple(&mut rng),
            second: triple(&mut rng),
            inner: weight.clone(),
            outer: weight.clone(),
        };
        if params.in_regime() {
            grid.push(params);
        }
    }
    Ok(grid)
}

/// Evaluates every grid point in parallel and fits the two constants.
pub fn frakj_bound_fit(grid: &[FrakJParams]) -> Result<FrakJBoundFit> {
    let reports: Vec<FrakJReport> = grid.par_iter().map(frak_j).collect::<Result<_>>()?;
    let c1 = grid
        .iter()
        .zip(&reports)
        .map(|(g, r)| r.value.norm() * g.t.abs())
        .fold(0.0, f64::max);
    let spacing: Vec<f64> = reports
        .iter()
        .filter_map(|r| r.spacing_bound.map(|b| r.value.norm() / b))
        .collect();
    let max_relative_error = reports
        .iter()
        .map(|r| r.error_estimate / r.value.norm().max(1e-6 * r.trivial_bound))
        .fold(0.0, f64::max);
    Ok(FrakJBoundFit {
        points: reports.len(),
        c1,
        c2: spacing.iter().copied().fold(0.0, f64::max),
        spacing_points: spacing.len(),
        max_relative_error,
        reports,
    })
}
