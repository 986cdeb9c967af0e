//! Krein orthogonal entire functions `P_t`, `P_t*` built from `Θ`, the
//! Christoffel–Darboux identity, and the transform `F_μ`.
//!
//! With `t = 2r`, `P_t(z) = e^{irz}(e^{φ/2}Θ⁺(r,z) − i e^{−φ/2}Θ⁻(r,z))` and
//! `P_t*` uses `+i`. Inside a cell `φ` is constant, so
//! `P_t = P_{t_k}·e^{iz(t−t_k)}` and `P_t*` is constant there.

use crate::canonical_system::{db_kernel, solve_theta, WeightProfile};
use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::quadrature::{exp_moment0, exp_moment1, GaussLegendre};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `P_t(z)`, `P_t*(z)` on the grid `t_k = 2r_k`.
#[derive(Debug, Clone, Serialize)]
pub struct KreinFamily {
    pub z: Complex64,
    pub t_grid: Vec<f64>,
    /// Node values, reading `φ` from the cell on the left of each node.
    pub p: Vec<Complex64>,
    pub p_star: Vec<Complex64>,
    /// Values at the left end of every cell with that cell's `φ`.
    pub p_cell: Vec<Complex64>,
    pub p_star_cell: Vec<Complex64>,
}

fn assemble(r: f64, phi: f64, tp: Complex64, tm: Complex64, z: Complex64) -> (Complex64, Complex64) {
    let e = (I * z * r).exp();
    let (a, b) = (tp * (0.5 * phi).exp(), tm * (-0.5 * phi).exp());
    (e * (a - I * b), e * (a + I * b))
}

pub fn krein_from_theta(h: &WeightProfile, z: Complex64) -> KreinFamily {
    let sol = solve_theta(h, z);
    let m = h.cells();
    let grid = h.grid();
    let mut p = Vec::with_capacity(m + 1);
    let mut p_star = Vec::with_capacity(m + 1);
    let mut p_cell = Vec::with_capacity(m);
    let mut p_star_cell = Vec::with_capacity(m);
    for k in 0..=m {
        let (tp, tm) = (sol.theta_plus[k], sol.theta_minus[k]);
        let left = if k == 0 { 0 } else { k - 1 };
        let (a, b) = assemble(grid[k], h.phi(left), tp, tm, z);
        p.push(a);
        p_star.push(b);
        if k < m {
            let (a, b) = assemble(grid[k], h.phi(k), tp, tm, z);
            p_cell.push(a);
            p_star_cell.push(b);
        }
    }
    KreinFamily {
        z,
        t_grid: grid.iter().map(|r| 2.0 * r).collect(),
        p,
        p_star,
        p_cell,
        p_star_cell,
    }
}

impl KreinFamily {
    /// `(P_t(z), P_t*(z))` at any `t ∈ [0, 2a]`; at a node the left cell is used.
    pub fn eval(&self, t: f64) -> (Complex64, Complex64) {
        let k = self.cell_of(t);
        (self.p_cell[k] * (I * self.z * (t - self.t_grid[k])).exp(), self.p_star_cell[k])
    }

    fn cell_of(&self, t: f64) -> usize {
        let k = self.t_grid.partition_point(|g| *g < t);
        k.saturating_sub(1).min(self.p_cell.len() - 1)
    }

    pub fn cells(&self) -> usize {
        self.p_cell.len()
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CdReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
}

/// Compares `∫₀ʳ P_t(z) conj(P_t(λ)) dt` with
/// `2π e^{i(r/2)(z−λ̄)} k_{B(H,r/2),λ}(z)`.
///
/// The left side is integrated exactly cell by cell.
pub fn christoffel_darboux(h: &WeightProfile, r: f64, z: Complex64, lambda: Complex64) -> Result<CdReport> {
    if !(r > 0.0 && r <= 2.0 * h.a() * (1.0 + 1e-12)) {
        return Err(Error::InvalidInput(format!("r = {r} outside (0, {}]", 2.0 * h.a())));
    }
    let fz = krein_from_theta(h, z);
    let fl = krein_from_theta(h, lambda);
    let kappa = z - lambda.conj();
    let mut lhs = Complex64::new(0.0, 0.0);
    for k in 0..fz.cells() {
        let t0 = fz.t_grid[k];
        if t0 >= r {
            break;
        }
        let len = fz.t_grid[k + 1].min(r) - t0;
        lhs += fz.p_cell[k] * fl.p_cell[k].conj() * exp_moment0(kappa, len);
    }
    let rhs = 2.0 * PI * (I * (0.5 * r) * kappa).exp() * db_kernel(h, 0.5 * r, lambda, z);
    Ok(CdReport { lhs, rhs, residual: (lhs - rhs).norm() })
}

/// Residual of [`christoffel_darboux`].
pub fn christoffel_darboux_residual(h: &WeightProfile, r: f64, z: Complex64, lambda: Complex64) -> Result<f64> {
    Ok(christoffel_darboux(h, r, z, lambda)?.residual)
}

/// `(1/√(2π))∫₀ʳ f(t)P_t(z) dt` for `f` sampled at the first `K+1` nodes of
/// the `t` grid (`r = t_K`), interpolated linearly inside each cell.
pub fn apply_f_mu(h: &WeightProfile, f: &[Complex64], z_points: &[Complex64]) -> Result<Vec<Complex64>> {
    let m = h.cells();
    if f.len() < 2 || f.len() > m + 1 {
        return Err(Error::GridMismatch { expected: m + 1, got: f.len() });
    }
    let k_max = f.len() - 1;
    Ok(z_points
        .par_iter()
        .map(|&z| {
            let fam = krein_from_theta(h, z);
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..k_max {
                let len = fam.t_grid[k + 1] - fam.t_grid[k];
                let slope = (f[k + 1] - f[k]) / len;
                acc += fam.p_cell[k] * (f[k] * exp_moment0(z, len) + slope * exp_moment1(z, len));
            }
            acc / (2.0 * PI).sqrt()
        })
        .collect())
}

/// `(1/√(2π))∫₀ʳ f(t)P_t(z) dt` for a function `f`, by Gauss–Legendre on
/// each `t` cell.
pub fn apply_f_mu_fn<F>(h: &WeightProfile, f: F, r: f64, z_points: &[Complex64]) -> Result<Vec<Complex64>>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    if !(r > 0.0 && r <= 2.0 * h.a() * (1.0 + 1e-12)) {
        return Err(Error::InvalidInput(format!("r = {r} outside (0, {}]", 2.0 * h.a())));
    }
    let gl = GaussLegendre::new(16);
    Ok(z_points
        .par_iter()
        .map(|&z| {
            let fam = krein_from_theta(h, z);
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..fam.cells() {
                let t0 = fam.t_grid[k];
                if t0 >= r {
                    break;
                }
                let t1 = fam.t_grid[k + 1].min(r);
                let pk = fam.p_cell[k];
                acc += gl.integrate_c(t0, t1, |t| f(t) * pk * (I * z * (t - t0)).exp());
            }
            acc / (2.0 * PI).sqrt()
        })
        .collect())
}

/// Coefficients `c_{k,q}` with `P_{t_k}(x) = Σ_{q≤k} c_{k,q} e^{ix t_q}` on a
/// uniform grid (cell-`k` value of `φ` at the left end of cell `k`).
///
/// Row `k` is lower-triangular. The time-domain image of `F_μ` is then
/// `g(t_q + u) = Σ_{k≥q} c_{k,q} f(t_k + u)`, so `F_μ f = F g` with `F` the
/// unitary Fourier transform `f ↦ (1/√(2π))∫ f(t)e^{itx} dt`.
pub fn krein_coefficients(h: &WeightProfile) -> Result<DMatrix<f64>> {
    h.uniform_step(1e-9)?;
    let m = h.cells();
    let off = m;
    let zero = Complex64::new(0.0, 0.0);
    let mut tp = vec![zero; 2 * m + 1];
    let mut tm = vec![zero; 2 * m + 1];
    tp[off] = Complex64::new(1.0, 0.0);
    let mut c = DMatrix::<f64>::zeros(m, m);
    for k in 0..m {
        let w = h.weights()[k];
        let sq = w.sqrt();
        for q in -(k as i64)..=(k as i64) {
            if (k as i64 + q) % 2 != 0 {
                continue;
            }
            let idx = (q + off as i64) as usize;
            let comb = tp[idx] * sq - I * tm[idx] / sq;
            c[(k, ((k as i64 + q) / 2) as usize)] = comb.re;
        }
        // M(x) = e^{iΔx}M₊ + e^{−iΔx}M₋ with
        // M₊ = ½[[1, −i/w], [iw, 1]], M₋ = ½[[1, i/w], [−iw, 1]].
        let mut np = vec![zero; 2 * m + 1];
        let mut nm = vec![zero; 2 * m + 1];
        for idx in 0..2 * m + 1 {
            let (a, b) = (tp[idx], tm[idx]);
            if a == zero && b == zero {
                continue;
            }
            let plus = (0.5 * (a - I * b / w), 0.5 * (I * w * a + b));
            let minus = (0.5 * (a + I * b / w), 0.5 * (-I * w * a + b));
            if idx + 1 < 2 * m + 1 {
                np[idx + 1] += plus.0;
                nm[idx + 1] += plus.1;
            }
            if idx >= 1 {
                np[idx - 1] += minus.0;
                nm[idx - 1] += minus.1;
            }
        }
        tp = np;
        tm = nm;
    }
    Ok(c)
}

#[derive(Debug, Clone, Serialize)]
pub struct UnitarityReport {
    /// `⟨f_i, f_j⟩_{L²[0,2a]}` for `f_i = χ_{r_i}·conj(P_t(λ_i))`.
    pub time_gram: Vec<Vec<Complex64>>,
    /// `⟨F_μ f_i, F_μ f_j⟩_{L²(μ)}`.
    pub mu_gram: Vec<Vec<Complex64>>,
    /// Largest entrywise difference.
    pub residual: f64,
    /// `residual` divided by the largest entry of `time_gram`.
    pub relative_residual: f64,
}

/// Compares the Gram matrix of `χ_{r_i}·conj(P_t(λ_i))` in `L²[0,2a]` with
/// that of their `F_μ` images in `L²(μ)`.
///
/// The Lebesgue part of `μ` is evaluated exactly through
/// [`krein_coefficients`]; the remaining signed part uses the measure's
/// quadrature nodes. Every `r_i` must be a node of the (uniform) `t` grid.
pub fn f_mu_unitarity(h: &WeightProfile, mu: &Measure, probes: &[(f64, Complex64)]) -> Result<UnitarityReport> {
    let step = 2.0 * h.uniform_step(1e-9)?;
    let m = h.cells();
    let mut ks = Vec::with_capacity(probes.len());
    for &(r, _) in probes {
        let k = (r / step).round();
        if !(k >= 1.0 && k <= m as f64) || (k * step - r).abs() > 1e-9 * step.max(r) {
            return Err(Error::InvalidInput(format!("probe radius {r} is not a node of the t grid")));
        }
        ks.push(k as usize);
    }
    let c = krein_coefficients(h)?;
    let fams: Vec<KreinFamily> = probes.par_iter().map(|&(_, l)| krein_from_theta(h, l)).collect();
    let n = probes.len();

    let gamma: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            (0..m)
                .map(|q| (q..ks[i]).map(|k| fams[i].p_cell[k].conj() * c[(k, q)]).sum())
                .collect()
        })
        .collect();

    let nu = mu.nu_quadrature();
    let kappa: Vec<Vec<Complex64>> = probes
        .par_iter()
        .map(|&(r, l)| {
            nu.nodes
                .iter()
                .map(|&y| {
                    let y = Complex64::new(y, 0.0);
                    (I * (0.5 * r) * (y - l.conj())).exp() * db_kernel(h, 0.5 * r, l, y)
                })
                .collect()
        })
        .collect();

    let bg = mu.background();
    let mut time_gram = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    let mut mu_gram = time_gram.clone();
    let mut residual: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let (li, lj) = (probes[i].1, probes[j].1);
            let mom = exp_moment0(lj - li.conj(), step);
            let t: Complex64 = (0..ks[i].min(ks[j]))
                .map(|k| fams[i].p_cell[k].conj() * fams[j].p_cell[k])
                .sum::<Complex64>()
                * mom;
            let g: Complex64 = (0..m).map(|q| gamma[i][q] * gamma[j][q].conj()).sum::<Complex64>() * mom;
            let nu_part: Complex64 = (0..nu.len())
                .map(|p| kappa[i][p] * kappa[j][p].conj() * nu.weights[p])
                .sum();
            let v = g * bg + nu_part * (2.0 * PI);
            time_gram[i][j] = t;
            mu_gram[i][j] = v;
            residual = residual.max((t - v).norm());
            scale = scale.max(t.norm());
        }
    }
    let relative_residual = if scale > 0.0 { residual / scale } else { residual };
    Ok(UnitarityReport { time_gram, mu_gram, residual, relative_residual })
}
