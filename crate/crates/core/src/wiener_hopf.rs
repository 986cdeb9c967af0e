//! Wiener–Hopf operators `f ↦ βf + ∫₀ᵃ K(x−y)f(x)dx` on `[0, a]`, their
//! chain-preserving triangular factorizations, and outer functions of
//! piecewise-constant symbols.

use crate::canonical_system::WeightProfile;
use crate::error::{Error, Result};
use crate::inverse_spectral::{recover_weight, RecoverOptions};
use crate::krein_functions::krein_coefficients;
use crate::linalg::{cholesky_lower, inf_norm, max_abs, sym_eigenvalues};
use crate::measures::Measure;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Even symbol `σ(ξ)`: `value` on `±[from, to)` for each piece, `background`
/// elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseSymbol {
    pub background: f64,
    pub pieces: Vec<(f64, f64, f64)>,
}

impl PiecewiseSymbol {
    /// `1 − μ·χ_{[−π,π]}`.
    pub fn sakhnovich(mu: f64) -> Self {
        PiecewiseSymbol { background: 1.0, pieces: vec![(0.0, PI, 1.0 - mu)] }
    }

    pub fn constant(c: f64) -> Self {
        PiecewiseSymbol { background: c, pieces: Vec::new() }
    }

    pub fn value(&self, xi: f64) -> f64 {
        let x = xi.abs();
        self.pieces
            .iter()
            .find(|(a, b, _)| x >= *a && x < *b)
            .map_or(self.background, |p| p.2)
    }

    /// `K(x) = (1/2π)∫(σ − background)e^{iξx}dξ`.
    pub fn kernel(&self, x: f64) -> f64 {
        self.pieces
            .iter()
            .map(|&(a, b, v)| {
                let d = v - self.background;
                let s = if x.abs() < 1e-12 { b - a } else { ((b * x).sin() - (a * x).sin()) / x };
                d * s / PI
            })
            .sum()
    }

    /// The symbol as the spectral measure `σ·dm`.
    pub fn to_measure(&self) -> Result<Measure> {
        if self.pieces.is_empty() {
            return Measure::constant(self.background, 40.0);
        }
        let mut pieces = self.pieces.clone();
        pieces.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut contiguous = Vec::new();
        let mut at = 0.0;
        for (a, b, v) in pieces {
            if a > at {
                contiguous.push((at, a, self.background));
            }
            contiguous.push((a, b, v));
            at = b;
        }
        Measure::piecewise(&contiguous, self.background)
    }

    fn check(&self) -> Result<()> {
        if !(self.background > 0.0) || self.pieces.iter().any(|p| !(p.2 > 0.0) || !(p.1 > p.0) || p.0 < 0.0) {
            return Err(Error::InvalidInput("symbol must be positive on nonempty pieces in [0, ∞)".into()));
        }
        Ok(())
    }
}

/// Integrable part of a convolution kernel.
#[derive(Clone)]
pub enum KernelShape {
    None,
    /// `−μ·sin(πx)/(πx)`.
    Sinc { mu: f64 },
    /// `c·e^{−|x|}`.
    Exp { c: f64 },
    Symbol(PiecewiseSymbol),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for KernelShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelShape::None => write!(f, "None"),
            KernelShape::Sinc { mu } => write!(f, "Sinc {{ mu: {mu} }}"),
            KernelShape::Exp { c } => write!(f, "Exp {{ c: {c} }}"),
            KernelShape::Symbol(s) => write!(f, "Symbol({s:?})"),
            KernelShape::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// `β·δ + K`.
#[derive(Debug, Clone)]
pub struct ConvolutionKernel {
    pub beta: f64,
    pub shape: KernelShape,
}

impl ConvolutionKernel {
    pub fn identity() -> Self {
        ConvolutionKernel { beta: 1.0, shape: KernelShape::None }
    }

    pub fn sakhnovich(mu: f64) -> Self {
        ConvolutionKernel { beta: 1.0, shape: KernelShape::Sinc { mu } }
    }

    pub fn exponential(c: f64) -> Self {
        ConvolutionKernel { beta: 1.0, shape: KernelShape::Exp { c } }
    }

    pub fn from_symbol(symbol: PiecewiseSymbol) -> Self {
        ConvolutionKernel { beta: symbol.background, shape: KernelShape::Symbol(symbol) }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.shape {
            KernelShape::None => 0.0,
            KernelShape::Sinc { mu } => {
                let u = PI * x;
                -mu * if u.abs() < 1e-8 { 1.0 } else { u.sin() / u }
            }
            KernelShape::Exp { c } => c * (-x.abs()).exp(),
            KernelShape::Symbol(s) => s.kernel(x),
            KernelShape::Custom(f) => f(x),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WienerHopfMatrix {
    pub n: usize,
    pub h: f64,
    pub a: f64,
    pub beta: f64,
    pub entries: DMatrix<f64>,
}

/// Midpoint collocation `W_jk = β·δ_jk + h·K((j−k)h)`, `h = a/n`.
pub fn discretize_wiener_hopf(kernel: &ConvolutionKernel, a: f64, n: usize) -> Result<WienerHopfMatrix> {
    if !(a > 0.0) || n == 0 {
        return Err(Error::InvalidInput("a and n must be positive".into()));
    }
    if let KernelShape::Symbol(s) = &kernel.shape {
        s.check()?;
    }
    let h = a / n as f64;
    let kp: Vec<f64> = (0..n).into_par_iter().map(|d| kernel.eval(d as f64 * h)).collect();
    let km: Vec<f64> = (0..n).into_par_iter().map(|d| kernel.eval(-(d as f64) * h)).collect();
    let scale = kp.iter().chain(&km).fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let asym = kp.iter().zip(&km).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    if asym > 1e-12 * scale {
        return Err(Error::NonRealSymbol(asym));
    }
    let entries = DMatrix::from_fn(n, n, |j, k| {
        let d = j.abs_diff(k);
        h * kp[d] + if j == k { kernel.beta } else { 0.0 }
    });
    Ok(WienerHopfMatrix { n, h, a, beta: kernel.beta, entries })
}

impl WienerHopfMatrix {
    pub fn eigenvalues(&self) -> Vec<f64> {
        sym_eigenvalues(&self.entries)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductOrder {
    /// `W = A*·A`.
    AdjointFirst,
    /// `W = A·A*`.
    AdjointLast,
}

/// Upper-triangular factor: column `j` of `A` lives on indices `≤ j`, so
/// `A` maps every initial index segment (the discrete `L²[0,r]`) into
/// itself.
#[derive(Debug, Clone, Serialize)]
pub struct TriangularFactor {
    pub a: DMatrix<f64>,
    pub order: ProductOrder,
    /// `‖product − W‖∞ / ‖W‖∞`.
    pub residual: f64,
    pub chain_preserved: bool,
}

fn is_upper(a: &DMatrix<f64>) -> bool {
    (0..a.nrows()).all(|i| (0..i).all(|j| a[(i, j)] == 0.0))
}

fn rel_residual(p: &DMatrix<f64>, w: &DMatrix<f64>) -> f64 {
    inf_norm(&(p - w)) / inf_norm(w)
}

/// `W = A*A` with `A` upper-triangular and a positive diagonal.
pub fn cholesky_factorize(w: &DMatrix<f64>) -> Result<TriangularFactor> {
    let l = cholesky_lower(w)?;
    let a = l.transpose();
    let residual = rel_residual(&(a.transpose() * &a), w);
    let chain_preserved = is_upper(&a);
    Ok(TriangularFactor { a, order: ProductOrder::AdjointFirst, residual, chain_preserved })
}

fn reverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| m[(n - 1 - i, n - 1 - j)])
}

/// `W = A·A*` with `A` upper-triangular, for persymmetric `W`.
///
/// With `W = LLᵀ` (`L` lower) and the index reversal `R`, `A = R·L·R` is
/// upper-triangular and `A·Aᵀ = R·W·R = W`.
pub fn reverse_factorize(w: &DMatrix<f64>) -> Result<TriangularFactor> {
    let defect = max_abs(&(reverse(w) - w));
    if defect > 1e-10 * max_abs(w).max(1e-300) {
        return Err(Error::NotPersymmetric(defect));
    }
    let l = cholesky_lower(w)?;
    let a = reverse(&l);
    let residual = rel_residual(&(&a * a.transpose()), w);
    let chain_preserved = is_upper(&a);
    Ok(TriangularFactor { a, order: ProductOrder::AdjointLast, residual, chain_preserved })
}

#[derive(Debug, Clone, Serialize)]
pub struct FmuFactor {
    /// Matrix of `A = F_μ⁻¹F` in the normalized indicator basis of `[0, a]`.
    pub a: DMatrix<f64>,
    /// Matrix of the Wiener–Hopf operator in the same basis.
    pub w: DMatrix<f64>,
    /// `‖A*A − W‖∞ / ‖W‖∞`.
    pub residual: f64,
    /// `max_{i>j}|A_ij| / max|A|`.
    pub triangularity_defect: f64,
    /// Largest difference of column norms between `A` and the Cholesky factor of `W`.
    pub column_norm_gap: f64,
    /// `‖W − W_collocation‖∞ / ‖W‖∞` when the measure has a piecewise symbol.
    pub collocation_gap: Option<f64>,
    /// Weight recovered on `[0, a/2]`.
    pub weight: WeightProfile,
}

/// Matrix `W_qj = ⟨F b_j, F b_q⟩_{L²(μ)}` of the Wiener–Hopf operator with
/// symbol `μ` in the basis `b_j = h^{-1/2}χ_{[jh,(j+1)h)}`.
pub fn galerkin_matrix(mu: &Measure, a: f64, n: usize) -> DMatrix<f64> {
    let h = a / n as f64;
    let nu = mu.nu_quadrature();
    let diag: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|d| {
            let s: f64 = nu
                .nodes
                .iter()
                .zip(&nu.weights)
                .map(|(&y, &wt)| {
                    let half = 0.5 * h * y;
                    let s2 = if half.abs() < 1e-8 { h * h } else { (2.0 * half.sin() / y).powi(2) };
                    wt * s2 * (d as f64 * h * y).cos()
                })
                .sum();
            s / (2.0 * PI * h)
        })
        .collect();
    DMatrix::from_fn(n, n, |q, j| diag[q.abs_diff(j)] + if q == j { mu.background() } else { 0.0 })
}

/// Builds `A = F_μ⁻¹F` on `[0, a]` with `n` cells.
///
/// `H` is recovered from `μ` on `[0, a/2]` with `n` cells; the Krein
/// coefficients `c_{k,q}` give `F_μ b_k = F(Σ_q c_{k,q} b_q)`, hence
/// `A = C̄·W` with `W` from [`galerkin_matrix`].
pub fn fmu_factorize(mu: &Measure, a: f64, n: usize, basis: usize) -> Result<FmuFactor> {
    let opts = RecoverOptions { cells: n, basis, check_drift: false, ..RecoverOptions::default() };
    let rep = recover_weight(mu, 0.5 * a, &opts)?;
    let weight = rep.weight_profile()?;
    let c = krein_coefficients(&weight)?;
    let w = galerkin_matrix(mu, a, n);
    let am = &c * &w;
    let residual = rel_residual(&(am.transpose() * &am), &w);
    let max_a = max_abs(&am);
    let mut below: f64 = 0.0;
    for i in 0..n {
        for j in 0..i {
            below = below.max(am[(i, j)].abs());
        }
    }
    let chol = cholesky_factorize(&w)?;
    let column_norm_gap = (0..n)
        .map(|j| (am.column(j).norm() - chol.a.column(j).norm()).abs())
        .fold(0.0, f64::max);
    Ok(FmuFactor {
        a: am,
        w,
        residual,
        triangularity_defect: below / max_a,
        column_norm_gap,
        collocation_gap: None,
        weight,
    })
}

/// [`fmu_factorize`] for a piecewise symbol, also reporting the distance
/// between the Galerkin matrix and the collocation matrix.
pub fn fmu_factorize_symbol(symbol: &PiecewiseSymbol, a: f64, n: usize, basis: usize) -> Result<FmuFactor> {
    symbol.check()?;
    let mu = symbol.to_measure()?;
    let mut f = fmu_factorize(&mu, a, n, basis)?;
    let col = discretize_wiener_hopf(&ConvolutionKernel::from_symbol(symbol.clone()), a, n)?;
    f.collocation_gap = Some(rel_residual(&col.entries, &f.w));
    Ok(f)
}

/// Outer function with modulus `σ'^{-1/2}` on ℝ, `σ' = σ/(2π)`:
/// `Π(z) = (1/√(2π))·exp((1/(2πi))∫(1+tz)/((z−t)(1+t²))·log σ'(t) dt)`,
/// integrated in closed form piece by piece.
pub fn outer_function(symbol: &PiecewiseSymbol, z: Complex64) -> Result<Complex64> {
    if !(z.im > 0.0) {
        return Err(Error::InvalidInput(format!("z = {z} is not in the upper half-plane")));
    }
    symbol.check()?;
    let log_sp = |s: f64| (s / (2.0 * PI)).ln();
    let c_bg = log_sp(symbol.background);
    let i = Complex64::i();
    // ∫_ℝ (1+tz)/((z−t)(1+t²)) dt = −iπ for Im z > 0.
    let mut integral = -i * PI * c_bg;
    let piece = |lo: f64, hi: f64| -> Complex64 {
        (z - lo).ln() - (z - hi).ln() + 0.5 * ((1.0 + hi * hi) / (1.0 + lo * lo)).ln()
    };
    for &(a, b, v) in &symbol.pieces {
        let d = log_sp(v) - c_bg;
        integral += (piece(a, b) + piece(-b, -a)) * d;
    }
    Ok((integral / (2.0 * PI * i)).exp() / (2.0 * PI).sqrt())
}

/// [`outer_function`] for `σ = 1 − μ·χ_{[−π,π]}`.
pub fn outer_pi(mu: f64, z: Complex64) -> Result<Complex64> {
    if !(0.0..1.0).contains(&mu) {
        return Err(Error::InvalidInput(format!("mu = {mu} outside [0, 1)")));
    }
    outer_function(&PiecewiseSymbol::sakhnovich(mu), z)
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub mu: f64,
    /// `(y, Π(iy))`.
    pub table: Vec<(f64, f64)>,
    pub limit: f64,
    /// `1/√(1−μ)`.
    pub expected: f64,
    /// `√(1−μ)`.
    pub rejected: f64,
    pub distance_expected: f64,
    pub distance_rejected: f64,
    pub tolerance: f64,
    pub indistinguishable: bool,
    pub pass: bool,
}

/// Geometric grid from `0.1` down to `y_min`.
pub fn default_y_grid(y_min: f64) -> Vec<f64> {
    let top: f64 = 0.1;
    let k = ((top / y_min).log10() * 4.0).ceil().max(1.0) as usize;
    (0..=k).map(|j| top * (y_min / top).powf(j as f64 / k as f64)).collect()
}

/// Tabulates `Π(iy)` as `y ↓ 0`, extrapolates the limit linearly in `y` from
/// the smallest samples, and compares it with `1/√(1−μ)` and `√(1−μ)`.
pub fn sakhnovich_audit(mu: f64, y_grid: &[f64]) -> Result<AuditReport> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidInput(format!("mu = {mu} outside (0, 1)")));
    }
    if y_grid.is_empty() || y_grid.iter().any(|y| !(*y > 0.0)) {
        return Err(Error::InvalidInput("y grid must be nonempty and positive".into()));
    }
    let mut table: Vec<(f64, f64)> = y_grid
        .par_iter()
        .map(|&y| outer_pi(mu, Complex64::new(0.0, y)).map(|p| (y, p.re)))
        .collect::<Result<_>>()?;
    table.sort_by(|p, q| p.0.total_cmp(&q.0));
    let pts = &table[..table.len().min(4)];
    let limit = if pts.len() == 1 {
        pts[0].1
    } else {
        let k = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
        let (mx, my) = (sx / k, sy / k);
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx > 0.0 {
            my - sxy / sxx * mx
        } else {
            my
        }
    };
    let tolerance = 1e-3;
    let expected = 1.0 / (1.0 - mu).sqrt();
    let rejected = (1.0 - mu).sqrt();
    let distance_expected = (limit - expected).abs();
    let distance_rejected = (limit - rejected).abs();
    let indistinguishable = (expected - rejected).abs() <= 10.0 * tolerance;
    let pass = !indistinguishable && distance_expected <= tolerance && distance_rejected > 10.0 * tolerance;
    Ok(AuditReport {
        mu,
        table,
        limit,
        expected,
        rejected,
        distance_expected,
        distance_rejected,
        tolerance,
        indistinguishable,
        pass,
    })
}
