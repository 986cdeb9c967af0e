//! Diagonal canonical systems `JX' = zHX`, `H = diag(w, 1/w)`, with
//! `J(u, v) = (−v, u)` and `X(0) = (1, 0)`.

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Piecewise-constant positive weight on a grid `0 = r_0 < … < r_M = a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightProfile {
    grid: Vec<f64>,
    w: Vec<f64>,
}

impl WeightProfile {
    pub fn new(grid: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::InvalidInput("weight grid needs at least one cell".into()));
        }
        if grid[0] != 0.0 {
            return Err(Error::InvalidInput(format!("weight grid must start at 0, got {}", grid[0])));
        }
        if grid.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::InvalidInput("weight grid must be strictly increasing".into()));
        }
        if w.len() + 1 != grid.len() {
            return Err(Error::GridMismatch { expected: grid.len() - 1, got: w.len() });
        }
        if let Some(v) = w.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput(format!("weight must be positive and finite, got {v}")));
        }
        Ok(WeightProfile { grid, w })
    }

    pub fn uniform(a: f64, w: Vec<f64>) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::InvalidInput(format!("interval length must be positive, got {a}")));
        }
        let m = w.len();
        let grid = uniform_grid(a, m);
        Self::new(grid, w)
    }

    pub fn constant(a: f64, cells: usize, c: f64) -> Result<Self> {
        Self::uniform(a, vec![c; cells])
    }

    /// Samples `f` at cell midpoints of a uniform grid.
    pub fn from_fn<F: Fn(f64) -> f64>(a: f64, cells: usize, f: F) -> Result<Self> {
        let h = a / cells as f64;
        Self::uniform(a, (0..cells).map(|i| f((i as f64 + 0.5) * h)).collect())
    }

    /// Weight `e^φ` from cell values of `φ`.
    pub fn from_log(grid: Vec<f64>, phi: &[f64]) -> Result<Self> {
        Self::new(grid, phi.iter().map(|p| p.exp()).collect())
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn cells(&self) -> usize {
        self.w.len()
    }

    pub fn a(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.grid[i + 1] - self.grid[i]
    }

    pub fn phi(&self, i: usize) -> f64 {
        self.w[i].ln()
    }

    pub fn phis(&self) -> Vec<f64> {
        self.w.iter().map(|w| w.ln()).collect()
    }

    /// Index of the cell containing `r`, reading cell boundaries from the
    /// left cell (`r = r_k` with `k ≥ 1` belongs to cell `k − 1`).
    pub fn cell_of(&self, r: f64) -> usize {
        let k = self.grid.partition_point(|g| *g < r);
        k.saturating_sub(1).min(self.cells() - 1)
    }

    /// `∫₀ᵃ trace H = Σ (w_i + 1/w_i)·Δr_i`.
    pub fn trace_integral(&self) -> f64 {
        (0..self.cells()).map(|i| (self.w[i] + 1.0 / self.w[i]) * self.width(i)).sum()
    }

    /// Common cell width if the grid is uniform to relative tolerance `tol`.
    pub fn uniform_step(&self, tol: f64) -> Result<f64> {
        let h = self.a() / self.cells() as f64;
        let dev = (0..self.cells()).map(|i| (self.width(i) - h).abs()).fold(0.0, f64::max);
        if dev > tol * h {
            Err(Error::NonUniformGrid(dev))
        } else {
            Ok(h)
        }
    }

    /// The profile restricted to its first `cells` cells.
    pub fn truncated(&self, cells: usize) -> Result<Self> {
        if cells == 0 || cells > self.cells() {
            return Err(Error::InvalidInput(format!("cannot keep {cells} of {} cells", self.cells())));
        }
        Self::new(self.grid[..=cells].to_vec(), self.w[..cells].to_vec())
    }

    pub fn type_profile(&self) -> TypeProfile {
        let v: Vec<f64> = self.w.iter().map(|w| 1.0 / w).collect();
        type_profile(&self.grid, &self.w, &v).expect("valid profile")
    }
}

pub(crate) fn uniform_grid(a: f64, m: usize) -> Vec<f64> {
    (0..=m).map(|i| if i == m { a } else { a * i as f64 / m as f64 }).collect()
}

/// `(Θ⁺, Θ⁻)` pair.
pub type Theta = [Complex64; 2];

/// Propagates `x` across a cell of weight `w` and length `d`.
pub fn transfer(w: f64, d: f64, z: Complex64, x: Theta) -> Theta {
    let (c, s) = ((z * d).cos(), (z * d).sin());
    [c * x[0] + s / w * x[1], -(s * w) * x[0] + c * x[1]]
}

/// Transfer matrix `[[cos zd, sin(zd)/w], [−w sin zd, cos zd]]`.
pub fn transfer_matrix(w: f64, d: f64, z: Complex64) -> [[Complex64; 2]; 2] {
    let (c, s) = ((z * d).cos(), (z * d).sin());
    [[c, s / w], [-(s * w), c]]
}

/// `Θ(r, z)` sampled on the grid nodes of a weight profile.
#[derive(Debug, Clone, Serialize)]
pub struct ThetaSolution {
    pub z: Complex64,
    pub grid: Vec<f64>,
    pub theta_plus: Vec<Complex64>,
    pub theta_minus: Vec<Complex64>,
}

impl ThetaSolution {
    /// `Θ(r, z)` at any `r ∈ [0, a]` by partial propagation from the
    /// nearest node on the left.
    pub fn at(&self, h: &WeightProfile, r: f64) -> Theta {
        let k = h.cell_of(r);
        let x = [self.theta_plus[k], self.theta_minus[k]];
        transfer(h.w[k], r - h.grid[k], self.z, x)
    }
}

pub fn solve_theta(h: &WeightProfile, z: Complex64) -> ThetaSolution {
    let m = h.cells();
    let mut plus = Vec::with_capacity(m + 1);
    let mut minus = Vec::with_capacity(m + 1);
    let mut x = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    plus.push(x[0]);
    minus.push(x[1]);
    for i in 0..m {
        x = transfer(h.w[i], h.width(i), z, x);
        plus.push(x[0]);
        minus.push(x[1]);
    }
    ThetaSolution { z, grid: h.grid.clone(), theta_plus: plus, theta_minus: minus }
}

/// `Θ(r, z)` for a single `r ∈ [0, a]`.
pub fn theta_at(h: &WeightProfile, r: f64, z: Complex64) -> Theta {
    let mut x = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    for i in 0..h.cells() {
        let (lo, hi) = (h.grid[i], h.grid[i + 1]);
        if r <= lo {
            break;
        }
        x = transfer(h.w[i], hi.min(r) - lo, z, x);
    }
    x
}

const DIAG_GAP: f64 = 1e-6;
const FD_STEP: f64 = 1e-5;

/// Reproducing kernel of `B(H, r)` at `λ`, evaluated at `z`:
/// `(1/π)[Θ⁺(r,z)Θ⁻(r,λ̄) − Θ⁻(r,z)Θ⁺(r,λ̄)]/(z − λ̄)`.
///
/// Near the diagonal the difference quotient is replaced by a central
/// difference of the numerator around the midpoint of `z` and `λ̄`.
pub fn db_kernel(h: &WeightProfile, r: f64, lambda: Complex64, z: Complex64) -> Complex64 {
    let lb = lambda.conj();
    let tl = theta_at(h, r, lb);
    let numer = |zz: Complex64| {
        let t = theta_at(h, r, zz);
        t[0] * tl[1] - t[1] * tl[0]
    };
    let d = z - lb;
    if d.norm() > DIAG_GAP {
        numer(z) / (d * PI)
    } else {
        let m = (z + lb) * 0.5;
        (numer(m + FD_STEP) - numer(m - FD_STEP)) / (2.0 * FD_STEP * PI)
    }
}

/// Weyl–Titchmarsh transform `(1/√π)∫₀ᵃ ⟨H(r)X(r), Θ(r, z̄)⟩ dr` with the
/// sesquilinear pairing, so the integrand is `H X · Θ(r, z)`.
///
/// `x` holds `X` at the grid nodes; it is interpolated linearly inside each
/// cell while `Θ` is propagated exactly.
pub fn weyl_transform(h: &WeightProfile, x: &[Theta], z_points: &[Complex64]) -> Result<Vec<Complex64>> {
    if x.len() != h.grid.len() {
        return Err(Error::GridMismatch { expected: h.grid.len(), got: x.len() });
    }
    let gl = GaussLegendre::new(8);
    Ok(z_points
        .par_iter()
        .map(|&z| {
            let sol = solve_theta(h, z);
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..h.cells() {
                let (r0, r1) = (h.grid[i], h.grid[i + 1]);
                let d = r1 - r0;
                let t0 = [sol.theta_plus[i], sol.theta_minus[i]];
                acc += gl.integrate_c(r0, r1, |r| {
                    let s = (r - r0) / d;
                    let xp = x[i][0] * (1.0 - s) + x[i + 1][0] * s;
                    let xm = x[i][1] * (1.0 - s) + x[i + 1][1] * s;
                    let t = transfer(h.w[i], r - r0, z, t0);
                    xp * h.w[i] * t[0] + xm / h.w[i] * t[1]
                });
            }
            acc / PI.sqrt()
        })
        .collect())
}

/// Cumulative `∫₀ʳ √(w·v)` for a diagonal pair `(w, v)` and its
/// left-continuous inverse `ξ`.
#[derive(Debug, Clone, Serialize)]
pub struct TypeProfile {
    pub grid: Vec<f64>,
    pub cumulative: Vec<f64>,
}

pub fn type_profile(grid: &[f64], w: &[f64], v: &[f64]) -> Result<TypeProfile> {
    if w.len() + 1 != grid.len() || v.len() != w.len() {
        return Err(Error::GridMismatch { expected: grid.len() - 1, got: w.len().min(v.len()) });
    }
    if w.iter().chain(v).any(|x| !(*x >= 0.0)) {
        return Err(Error::InvalidInput("diagonal entries must be nonnegative".into()));
    }
    let mut cumulative = vec![0.0];
    for i in 0..w.len() {
        let c = cumulative[i] + (w[i] * v[i]).sqrt() * (grid[i + 1] - grid[i]);
        cumulative.push(c);
    }
    Ok(TypeProfile { grid: grid.to_vec(), cumulative })
}

impl TypeProfile {
    pub fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn value(&self, r: f64) -> f64 {
        let g = &self.grid;
        if r <= g[0] {
            return 0.0;
        }
        if r >= *g.last().unwrap() {
            return self.total();
        }
        let k = g.partition_point(|x| *x <= r) - 1;
        let s = (r - g[k]) / (g[k + 1] - g[k]);
        self.cumulative[k] + s * (self.cumulative[k + 1] - self.cumulative[k])
    }

    /// `ξ(s) = inf{r : type(r) ≥ s}`.
    pub fn xi(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return self.grid[0];
        }
        let c = &self.cumulative;
        if s >= self.total() {
            let k = c.partition_point(|x| *x < self.total());
            return self.grid[k.min(c.len() - 1)];
        }
        let k = c.partition_point(|x| *x < s);
        // c[k-1] < s ≤ c[k], and the cell k-1 has positive slope.
        let (c0, c1) = (c[k - 1], c[k]);
        let (g0, g1) = (self.grid[k - 1], self.grid[k]);
        g0 + (s - c0) / (c1 - c0) * (g1 - g0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cz(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_weight_gives_cos_sin() {
        let h = WeightProfile::constant(2.0, 16, 1.0).unwrap();
        let z = cz(1.3, -0.4);
        let sol = solve_theta(&h, z);
        for (k, r) in h.grid().iter().enumerate() {
            assert!((sol.theta_plus[k] - (z * r).cos()).norm() < 1e-13);
            assert!((sol.theta_minus[k] + (z * r).sin()).norm() < 1e-13);
        }
    }

    #[test]
    fn constant_weight_closed_form() {
        let c = 2.5;
        let h = WeightProfile::constant(3.0, 7, c).unwrap();
        let z = cz(0.7, 0.2);
        let t = theta_at(&h, 2.2, z);
        assert!((t[0] - (z * 2.2).cos()).norm() < 1e-13);
        assert!((t[1] + (z * 2.2).sin() * c).norm() < 1e-13);
    }

    #[test]
    fn zero_energy_is_constant() {
        let h = WeightProfile::from_fn(1.0, 9, |r| 1.0 + r * r).unwrap();
        let sol = solve_theta(&h, cz(0.0, 0.0));
        assert!(sol.theta_plus.iter().all(|v| *v == cz(1.0, 0.0)));
        assert!(sol.theta_minus.iter().all(|v| *v == cz(0.0, 0.0)));
    }

    #[test]
    fn kernel_matches_sinc_for_unit_weight() {
        let h = WeightProfile::constant(PI, 10, 1.0).unwrap();
        for (l, z) in [(cz(0.0, 0.0), cz(0.7, 0.0)), (cz(0.0, 1.0), cz(1.0, 1.0)), (cz(-1.0, 0.0), cz(3.0, 0.0))] {
            let r = 2.0;
            let want = crate::toeplitz_pw::sinc_kernel(r, l, z);
            assert!((db_kernel(&h, r, l, z) - want).norm() < 1e-13);
        }
    }

    #[test]
    fn kernel_scales_with_constant_weight() {
        let h = WeightProfile::constant(2.0, 4, 3.0).unwrap();
        let (l, z) = (cz(0.5, -0.3), cz(-1.2, 0.4));
        let want = crate::toeplitz_pw::sinc_kernel(1.5, l, z) * 3.0;
        assert!((db_kernel(&h, 1.5, l, z) - want).norm() < 1e-13);
    }

    #[test]
    fn kernel_diagonal() {
        let h = WeightProfile::constant(2.0, 4, 1.0).unwrap();
        let v = db_kernel(&h, 1.5, cz(0.4, 0.0), cz(0.4, 0.0));
        assert!((v - 1.5 / PI).norm() < 1e-9);
        let v = db_kernel(&h, 1.5, cz(0.4, 0.8), cz(0.4, -0.8));
        assert!((v - 1.5 / PI).norm() < 1e-9);
        let h = WeightProfile::from_fn(2.0, 20, |r| 1.0 + 0.5 * r).unwrap();
        let near = db_kernel(&h, 1.7, cz(0.4, 0.1), cz(0.4, -0.1 + 2e-6));
        let at = db_kernel(&h, 1.7, cz(0.4, 0.1), cz(0.4, -0.1));
        assert!((near - at).norm() < 1e-5);
    }

    #[test]
    fn weyl_transform_of_theta_is_sinc() {
        let a = 2.0;
        let h = WeightProfile::constant(a, 64, 1.0).unwrap();
        let l = cz(0.6, 0.3);
        let sol = solve_theta(&h, l.conj());
        let x: Vec<Theta> = (0..=64).map(|k| [sol.theta_plus[k], sol.theta_minus[k]]).collect();
        let zs = [cz(0.0, 0.0), cz(1.1, -0.4), cz(-2.0, 0.5)];
        let got = weyl_transform(&h, &x, &zs).unwrap();
        for (g, z) in got.iter().zip(zs) {
            let want = crate::toeplitz_pw::sinc_kernel(a, l, z) * PI.sqrt();
            assert!((g - want).norm() < 1e-4, "{g} vs {want}");
        }
    }

    #[test]
    fn weyl_transform_at_zero_integrates_weight() {
        let h = WeightProfile::from_fn(1.5, 12, |r| 2.0 + r).unwrap();
        let one = [cz(1.0, 0.0), cz(0.0, 0.0)];
        let got = weyl_transform(&h, &vec![one; 13], &[cz(0.0, 0.0)]).unwrap()[0];
        let want: f64 = (0..12).map(|i| h.weights()[i] * h.width(i)).sum::<f64>() / PI.sqrt();
        assert!((got - want).norm() < 1e-13);
        let zero = weyl_transform(&h, &vec![[cz(0.0, 0.0); 2]; 13], &[cz(1.0, 1.0)]).unwrap()[0];
        assert_eq!(zero, cz(0.0, 0.0));
        assert!(matches!(weyl_transform(&h, &[one], &[]), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn type_profile_cases() {
        let h = WeightProfile::from_fn(2.0, 8, |r| 1.0 + r).unwrap();
        let t = h.type_profile();
        assert!((t.value(1.3) - 1.3).abs() < 1e-14);
        assert!((t.xi(0.77) - 0.77).abs() < 1e-14);

        let grid = vec![0.0, 0.5, 1.0, 2.0];
        let t = type_profile(&grid, &[1.0, 1.0, 1.0], &[1.0, 0.0, 1.0]).unwrap();
        assert!((t.total() - 1.5).abs() < 1e-15);
        assert_eq!(t.xi(0.5), 0.5);
        assert!((t.xi(0.5 + 1e-9) - (1.0 + 1e-9)).abs() < 1e-12);

        let t = type_profile(&[0.0, 1.0], &[4.0], &[1.0]).unwrap();
        assert_eq!(t.value(1.0), 2.0);
    }
}
