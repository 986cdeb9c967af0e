//! Gauss–Legendre rules and small closed-form exponential moments.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            let w = 2.0 / ((1.0 - x * x) * d * d);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped to [a, b].
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (c + h * x, h * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }

    pub fn integrate_c<F: FnMut(f64) -> Complex64>(&self, a: f64, b: f64, mut f: F) -> Complex64 {
        self.on(a, b).map(|(x, w)| f(x) * w).sum()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// `∫₀^h e^{iκu} du`.
pub fn exp_moment0(kappa: Complex64, h: f64) -> Complex64 {
    let s = kappa * h;
    if s.norm() < 1e-3 {
        let i = Complex64::i();
        // h·(1 + is/2 + (is)²/6 + (is)³/24 + (is)^4/120)
        let is = i * s;
        h * (1.0 + is / 2.0 + is * is / 6.0 + is * is * is / 24.0 + is * is * is * is / 120.0)
    } else {
        ((Complex64::i() * s).exp() - 1.0) / (Complex64::i() * kappa)
    }
}

/// `∫₀^h u·e^{iκu} du`.
pub fn exp_moment1(kappa: Complex64, h: f64) -> Complex64 {
    let s = kappa * h;
    let i = Complex64::i();
    if s.norm() < 1e-2 {
        let is = i * s;
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        // Σ (is)^k / (k!(k+2))
        let mut fact = 1.0;
        for k in 0..10 {
            if k > 0 {
                term *= is;
                fact *= k as f64;
            }
            sum += term / (fact * (k as f64 + 2.0));
        }
        h * h * sum
    } else {
        let e = (i * s).exp();
        h * e / (i * kappa) + (e - 1.0) / (kappa * kappa)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let g = GaussLegendre::new(8);
        for deg in 0..16 {
            let got = g.integrate(0.0, 2.0, |x| x.powi(deg));
            let want = 2f64.powi(deg + 1) / (deg as f64 + 1.0);
            assert!((got - want).abs() < 1e-12 * want.max(1.0), "deg {deg}");
        }
    }

    #[test]
    fn weights_sum_to_two() {
        for n in 1..30 {
            let g = GaussLegendre::new(n);
            let s: f64 = g.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn moments_match_quadrature() {
        let g = GaussLegendre::new(20);
        for &k in &[
            Complex64::new(0.0, 0.0),
            Complex64::new(1e-5, 0.0),
            Complex64::new(3.0, 0.5),
            Complex64::new(-2.0, -1.0),
            Complex64::new(0.004, 0.001),
        ] {
            let h = 0.7;
            let m0 = g.integrate_c(0.0, h, |u| (Complex64::i() * k * u).exp());
            let m1 = g.integrate_c(0.0, h, |u| u * (Complex64::i() * k * u).exp());
            assert!((exp_moment0(k, h) - m0).norm() < 1e-13);
            assert!((exp_moment1(k, h) - m1).norm() < 1e-13);
        }
    }
}
