use num_complex::Complex64;

use super::SmoothWeight;
use crate::expsums::e;

/// Batched evaluation of `nu -> int x^{-it} e(-b/x) V(x) e(-nu x) dx`.
///
/// The amplitude is sampled once on a uniform grid; each frequency then costs one pass.
/// The trapezoid rule converges faster than any power of the step here because `V` and all of
/// its derivatives vanish at the ends of the support.
#[derive(Debug, Clone)]
pub struct FourierSampler {
    start: f64,
    step: f64,
    values: Vec<Complex64>,
}

impl FourierSampler {
    pub fn new(weight: &SmoothWeight, t: f64, hyperbolic: f64, nodes_per_unit: f64) -> Self {
        let (a, b) = weight.support();
        let n = ((b - a) * nodes_per_unit).ceil().max(16.0) as usize;
        let step = (b - a) / n as f64;
        let start = a + step;
        let values = (1..n)
            .map(|i| {
                let x = a + step * i as f64;
                let v = weight.eval(x);
                Complex64::new(0.0, -t * x.ln()).exp() * e(-hyperbolic / x) * v
            })
            .collect();
        FourierSampler { start, step, values }
    }

    /// Sampler for `nu -> int_a^b g(x) e(-nu x) dx` with `g` vanishing to all orders at both ends.
    pub fn from_amplitude<G: Fn(f64) -> Complex64>(support: (f64, f64), nodes_per_unit: f64, amplitude: G) -> Self {
        let (a, b) = support;
        let n = ((b - a) * nodes_per_unit).ceil().max(16.0) as usize;
        let step = (b - a) / n as f64;
        let values = (1..n).map(|i| amplitude(a + step * i as f64)).collect();
        FourierSampler {
            start: a + step,
            step,
            values,
        }
    }

    /// Sampler over precomputed amplitude values at `start + k step`, `k = 0..values.len()`.
    pub fn from_samples(start: f64, step: f64, values: Vec<Complex64>) -> Self {
        FourierSampler { start, step, values }
    }

    /// The same rule on every other node, for error estimates.
    pub fn coarsened(&self) -> Self {
        FourierSampler {
            start: self.start + self.step,
            step: 2.0 * self.step,
            values: self.values.iter().skip(1).step_by(2).copied().collect(),
        }
    }

    /// Sampler for the amplitude of the `J_it` integrals: `b = n t / N`.
    pub fn for_j_it(weight: &SmoothWeight, t: f64, n: f64, n_scale: f64, nodes_per_unit: f64) -> Self {
        Self::new(weight, t, n * t / n_scale, nodes_per_unit)
    }

    pub fn nodes(&self) -> usize {
        self.values.len()
    }

    pub fn eval(&self, nu: f64) -> Complex64 {
        let rotation = e(-nu * self.step);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut phase = Complex64::new(1.0, 0.0);
        for (k, v) in self.values.iter().enumerate() {
            if k % 256 == 0 {
                // resynchronize the rotation to keep the recurrence drift at rounding level
                phase = e(-nu * (self.start + self.step * k as f64));
            }
            acc += v * phase;
            phase *= rotation;
        }
        acc * self.step
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converges_under_refinement() {
        let w = SmoothWeight::bump(5.0, 15.0).unwrap();
        let coarse = FourierSampler::for_j_it(&w, 100.0, 15_000.0, 1e4, 64.0);
        let fine = FourierSampler::for_j_it(&w, 100.0, 15_000.0, 1e4, 256.0);
        for nu in [0.0, 1.3, -2.7, 6.0] {
            let (a, b) = (coarse.eval(nu), fine.eval(nu));
            assert!((a - b).norm() < 1e-12, "nu={nu}: {a} vs {b}");
        }
    }

    #[test]
    fn zero_frequency_of_plain_bump() {
        let w = SmoothWeight::bump(1.0, 2.0).unwrap();
        let s = FourierSampler::new(&w, 0.0, 0.0, 2000.0);
        let diff = (s.eval(0.0).re - w.integral()).abs();
        assert!(diff < 1e-13, "{diff}");
    }
}
