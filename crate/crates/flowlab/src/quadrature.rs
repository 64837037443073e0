//! Fixed Gauss–Legendre rules for the flow solver's loop integrals.

use std::f64::consts::PI;

/// Nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Rule for ∫_k f = (2π)^{−4} ∫ d⁴k f(|k|, cos θ) with a hard radial cutoff
/// at `cutoff_factor`·Λ.
#[derive(Debug, Clone)]
pub struct LoopQuadrature {
    /// Radial nodes and weights on [0, 1].
    radial: Vec<(f64, f64)>,
    /// (cos θ, sin²θ·weight) on θ ∈ [0, π].
    angular: Vec<(f64, f64)>,
    pub cutoff_factor: f64,
}

const MEASURE: f64 = 4.0 * PI / (16.0 * PI * PI * PI * PI);

impl LoopQuadrature {
    pub fn new(radial_points: usize, angular_points: usize, cutoff_factor: f64) -> Self {
        let (x, w) = gauss_legendre(radial_points);
        let radial = x.iter().zip(&w).map(|(&x, &w)| (0.5 * (x + 1.0), 0.5 * w)).collect();
        let (x, w) = gauss_legendre(angular_points);
        let angular = x
            .iter()
            .zip(&w)
            .map(|(&x, &w)| {
                let theta = 0.5 * PI * (x + 1.0);
                (theta.cos(), 0.5 * PI * w * theta.sin().powi(2))
            })
            .collect();
        LoopQuadrature { radial, angular, cutoff_factor }
    }

    pub fn kmax(&self, lambda: f64) -> f64 {
        self.cutoff_factor * lambda
    }

    /// ∫_k f(|k|, cos θ) over |k| ≤ kmax(Λ).
    pub fn integrate<F: FnMut(f64, f64) -> f64>(&self, lambda: f64, mut f: F) -> f64 {
        let kmax = self.kmax(lambda);
        let mut total = 0.0;
        for &(t, wr) in &self.radial {
            let k = kmax * t;
            let mut inner = 0.0;
            for &(c, wa) in &self.angular {
                inner += wa * f(k, c);
            }
            total += wr * k * k * k * inner;
        }
        total * kmax * MEASURE
    }

    /// ∫_k f(|k|) for angle-independent integrands.
    pub fn integrate_radial<F: FnMut(f64) -> f64>(&self, lambda: f64, mut f: F) -> f64 {
        let kmax = self.kmax(lambda);
        let mut total = 0.0;
        for &(t, wr) in &self.radial {
            let k = kmax * t;
            total += wr * k * k * k * f(k);
        }
        // ∫_0^π sin²θ dθ = π/2.
        total * kmax * MEASURE * PI / 2.0
    }

    pub fn nodes(&self) -> (usize, usize) {
        (self.radial.len(), self.angular.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(12);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(22)).sum();
        assert!((m - 2.0 / 23.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_loop_integral() {
        // ∫_k e^{−k²/Λ²} = Λ⁴/(16π²).
        let q = LoopQuadrature::new(64, 24, 8.0);
        for lambda in [0.3f64, 1.0, 7.0] {
            let exact = lambda.powi(4) / (16.0 * PI * PI);
            let r = q.integrate_radial(lambda, |k| (-(k * k) / (lambda * lambda)).exp());
            let a = q.integrate(lambda, |k, _| (-(k * k) / (lambda * lambda)).exp());
            assert!(((r - exact) / exact).abs() < 1e-13);
            assert!(((a - exact) / exact).abs() < 1e-13);
        }
    }

    #[test]
    fn angular_moments() {
        // ⟨cos²θ⟩ with the sin²θ weight is 1/4.
        let q = LoopQuadrature::new(32, 24, 8.0);
        let lambda = 1.0;
        let g = |k: f64| (-(k * k)).exp();
        let plain = q.integrate(lambda, |k, _| g(k));
        let moment = q.integrate(lambda, |k, c| g(k) * c * c);
        assert!((moment / plain - 0.25).abs() < 1e-14);
    }
}
