//! Truncated Toeplitz operators on Paley–Wiener spaces in the orthonormal
//! sinc lattice basis.

use crate::error::{Error, Result};
use crate::linalg::{cholesky_lower, spd_solve, sym_eigenvalues};
use crate::measures::Measure;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// `sin u / u` with the removable singularity filled in.
pub fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// Complex `sin w / w`.
pub fn sinc_c(w: Complex64) -> Complex64 {
    if w.norm() < 1e-4 {
        1.0 - w * w / 6.0
    } else {
        w.sin() / w
    }
}

/// Reproducing kernel of `PW_r` at `λ`, evaluated at `z`:
/// `sin r(z−λ̄) / (π(z−λ̄))`.
pub fn sinc_kernel(r: f64, lambda: Complex64, z: Complex64) -> Complex64 {
    sinc_c(r * (z - lambda.conj())) * (r / PI)
}

/// Real version of [`sinc_kernel`] for real arguments.
pub fn sinc_kernel_real(r: f64, x: f64, y: f64) -> f64 {
    r / PI * sinc(r * (x - y))
}

/// Orthonormal basis `e_k(z) = (π/r)^{1/2} sin r(z−λ_k) / (π(z−λ_k))`,
/// `λ_k = πk/r`, `k = −N..=N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SincBasis {
    pub r: f64,
    pub n: usize,
}

impl SincBasis {
    pub fn new(r: f64, n: usize) -> Self {
        SincBasis { r, n }
    }

    pub fn len(&self) -> usize {
        2 * self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lattice node of basis index `i ∈ 0..len()` (that is, `k = i − N`).
    pub fn node(&self, i: usize) -> f64 {
        PI * (i as f64 - self.n as f64) / self.r
    }

    pub fn eval_real(&self, i: usize, x: f64) -> f64 {
        (PI / self.r).sqrt() * sinc_kernel_real(self.r, x, self.node(i))
    }

    pub fn eval(&self, i: usize, z: Complex64) -> Complex64 {
        sinc_kernel(self.r, Complex64::new(self.node(i), 0.0), z) * (PI / self.r).sqrt()
    }

    /// Coefficients of `sinc_{r,λ}`: `⟨sinc_{r,λ}, e_k⟩ = e_k(λ̄)`.
    pub fn kernel_coefficients(&self, lambda: Complex64) -> Vec<Complex64> {
        (0..self.len()).map(|i| self.eval(i, lambda.conj())).collect()
    }

    /// Evaluates `Σ c_k e_k(z)`.
    pub fn evaluate(&self, coeffs: &[Complex64], z: Complex64) -> Complex64 {
        coeffs.iter().enumerate().map(|(i, c)| c * self.eval(i, z)).sum()
    }
}

/// Gram matrix `G_jk = ∫ e_j ē_k dμ` of `T_{μ,r}`.
#[derive(Debug, Clone)]
pub struct ToeplitzOperator {
    pub basis: SincBasis,
    pub gram: DMatrix<f64>,
    /// Whether a Cholesky factorization of `gram` succeeded.
    pub positive_definite: bool,
    background: f64,
}

impl ToeplitzOperator {
    pub fn eigenvalues(&self) -> Vec<f64> {
        sym_eigenvalues(&self.gram)
    }

    pub fn background(&self) -> f64 {
        self.background
    }
}

/// Assembles `T_{μ,r}` with `2N+1` lattice functions.
///
/// The background density contributes exactly `background·I`; the remaining
/// signed part of `μ` is integrated by its window quadrature and atoms.
pub fn assemble_toeplitz(mu: &Measure, r: f64, n: usize) -> Result<ToeplitzOperator> {
    if !(r > 0.0) {
        return Err(Error::InvalidInput(format!("bandwidth r must be positive, got {r}")));
    }
    let basis = SincBasis::new(r, n);
    let nu = mu.nu_quadrature();
    let len = basis.len();
    let mut gram = DMatrix::<f64>::identity(len, len) * mu.background();
    if !nu.is_empty() {
        let q = nu.len();
        let cols: Vec<f64> = (0..q)
            .into_par_iter()
            .flat_map_iter(|p| {
                let x = nu.nodes[p];
                (0..len).map(move |i| basis.eval_real(i, x))
            })
            .collect();
        let e = DMatrix::from_vec(len, q, cols);
        let mut ew = e.clone();
        for (p, mut col) in ew.column_iter_mut().enumerate() {
            col *= nu.weights[p];
        }
        gram += &ew * e.transpose();
    }
    let sym = (&gram + gram.transpose()) * 0.5;
    let positive_definite = cholesky_lower(&sym).is_ok();
    Ok(ToeplitzOperator { basis, gram: sym, positive_definite, background: mu.background() })
}

/// Solves `gram·x = g` for complex `g`.
pub fn solve_inverse(t: &ToeplitzOperator, g: &[Complex64]) -> Result<Vec<Complex64>> {
    let len = t.basis.len();
    if g.len() != len {
        return Err(Error::GridMismatch { expected: len, got: g.len() });
    }
    let re = DVector::from_iterator(len, g.iter().map(|c| c.re));
    let im = DVector::from_iterator(len, g.iter().map(|c| c.im));
    let xr = spd_solve(&t.gram, &re)?;
    let xi = if im.iter().any(|v| *v != 0.0) { spd_solve(&t.gram, &im)? } else { DVector::zeros(len) };
    Ok(xr.iter().zip(xi.iter()).map(|(a, b)| Complex64::new(*a, *b)).collect())
}

/// `‖T_{μ,r}^{-1} sinc_{r,0}‖²_{L²(μ)} = sᵀ·G⁻¹·s̄`.
pub fn rk_norm_sq(mu: &Measure, r: f64, n: usize) -> Result<f64> {
    let t = assemble_toeplitz(mu, r, n)?;
    rk_norm_sq_of(&t)
}

pub(crate) fn rk_norm_sq_of(t: &ToeplitzOperator) -> Result<f64> {
    let len = t.basis.len();
    let s0 = (t.basis.r / PI).sqrt();
    let mut rhs = DVector::zeros(len);
    rhs[t.basis.n] = s0;
    let x = spd_solve(&t.gram, &rhs)?;
    let v = s0 * x[t.basis.n];
    if !(v > 0.0) {
        return Err(Error::NotSampling { min_eig: v });
    }
    Ok(v)
}

/// Lattice value of `(T_{μ,r}^{-1} sinc_{r,λ})(z)`.
///
/// Writes the solution as `sinc_{r,λ}/background + δ` and expands only the
/// correction `δ` in the lattice, so measures that are a constant multiple
/// of Lebesgue measure are reproduced exactly.
pub fn inverse_kernel_lattice(
    t: &ToeplitzOperator,
    lambda: Complex64,
    z: Complex64,
) -> Result<Complex64> {
    let bg = t.background;
    if !(bg > 0.0) {
        let c = solve_inverse(t, &t.basis.kernel_coefficients(lambda))?;
        return Ok(t.basis.evaluate(&c, z));
    }
    let s = t.basis.kernel_coefficients(lambda);
    let len = s.len();
    let gnu = &t.gram - DMatrix::<f64>::identity(len, len) * bg;
    let sr = DVector::from_iterator(len, s.iter().map(|c| c.re));
    let si = DVector::from_iterator(len, s.iter().map(|c| c.im));
    let rr = -(&gnu * sr) / bg;
    let ri = -(&gnu * si) / bg;
    let rhs: Vec<Complex64> = rr.iter().zip(ri.iter()).map(|(a, b)| Complex64::new(*a, *b)).collect();
    let delta = solve_inverse(t, &rhs)?;
    Ok(sinc_kernel(t.basis.r, lambda, z) / bg + t.basis.evaluate(&delta, z))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_kernel_values() {
        let z0 = Complex64::new(0.0, 0.0);
        assert!((sinc_kernel(PI, z0, z0) - 1.0).norm() < 1e-15);
        assert!(sinc_kernel(PI, z0, Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let i = Complex64::i();
        // sin(2i)/(2πi) by its power series: Σ 2^{2k}/((2k+1)!)·(1/π).
        let mut series = 0.0;
        let mut term = 1.0;
        for k in 0..20 {
            if k > 0 {
                term *= 4.0 / ((2 * k) as f64 * (2 * k + 1) as f64);
            }
            series += term;
        }
        let want = series / PI;
        let got = sinc_kernel(1.0, i, i);
        assert!((got - want).norm() < 1e-14);
        assert!((want - 0.577_233).abs() < 1e-6);
    }

    #[test]
    fn basis_is_interpolating() {
        let b = SincBasis::new(1.3, 5);
        for i in 0..b.len() {
            for j in 0..b.len() {
                let v = b.eval_real(i, b.node(j));
                let want = if i == j { (1.3 / PI).sqrt() } else { 0.0 };
                assert!((v - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn lebesgue_gram_is_identity() {
        let mu = Measure::lebesgue(40.0);
        let t = assemble_toeplitz(&mu, 2.0, 12).unwrap();
        assert!((t.gram.clone() - DMatrix::identity(25, 25)).abs().max() < 1e-15);
        let t2 = assemble_toeplitz(&mu.scaled(2.0), 2.0, 12).unwrap();
        assert!((t2.gram - DMatrix::identity(25, 25) * 2.0).abs().max() < 1e-15);
    }

    #[test]
    fn atoms_add_rank_two_update() {
        let mu = Measure::lebesgue(40.0).with_atom(PI, 1.0).unwrap();
        let t = assemble_toeplitz(&mu, 1.0, 8).unwrap();
        let b = t.basis;
        for j in 0..b.len() {
            for k in 0..b.len() {
                let d = if j == k { 1.0 } else { 0.0 };
                let want = d
                    + b.eval_real(j, PI) * b.eval_real(k, PI)
                    + b.eval_real(j, -PI) * b.eval_real(k, -PI);
                assert!((t.gram[(j, k)] - want).abs() < 1e-14);
            }
        }
        // The atoms sit on lattice nodes ±π when r = 1.
        assert!((t.gram[(9, 9)] - (1.0 + 1.0 / PI)).abs() < 1e-14);
    }

    #[test]
    fn solve_identity_and_scaled() {
        let mu = Measure::lebesgue(40.0);
        let t = assemble_toeplitz(&mu, 1.0, 4).unwrap();
        let mut g = vec![Complex64::new(0.0, 0.0); 9];
        g[4] = 1.0.into();
        assert_eq!(solve_inverse(&t, &g).unwrap(), g);
        let t2 = assemble_toeplitz(&mu.scaled(2.0), 1.0, 4).unwrap();
        let x = solve_inverse(&t2, &g).unwrap();
        assert!((x[4] - 0.5).norm() < 1e-15);
    }

    #[test]
    fn rk_norm_of_scaled_lebesgue() {
        for &c in &[0.5, 1.0, 3.0] {
            let mu = Measure::lebesgue(40.0).scaled(c);
            let v = rk_norm_sq(&mu, 1.7, 10).unwrap();
            assert!((v - 1.7 / (c * PI)).abs() < 1e-14);
        }
    }

    #[test]
    fn lattice_kernel_exact_for_scaled_lebesgue() {
        let mu = Measure::lebesgue(40.0).scaled(2.0);
        let t = assemble_toeplitz(&mu, 2.0, 8).unwrap();
        let (l, z) = (Complex64::new(0.3, 0.2), Complex64::new(-1.0, 0.5));
        let got = inverse_kernel_lattice(&t, l, z).unwrap();
        assert!((got - sinc_kernel(2.0, l, z) / 2.0).norm() < 1e-15);
    }
}
