//! A₂ characteristics, simplex integrals and averaged log-weights for
//! piecewise-constant weights.

use crate::canonical_system::WeightProfile;
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

pub type Weight = WeightProfile;

/// Largest `n` accepted by the simplex routines.
pub const N_MAX: usize = 12;
const FULL_SCAN_PAIRS: usize = 1_000_000;
const ANCHOR_ORDERS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanFamily {
    /// All cell-aligned intervals when there are at most 10⁶ of them, plus
    /// the anchored and dyadic families.
    Auto,
    /// Every interval with endpoints on the grid.
    CellAligned,
    /// `[0, t]`, `[δ_n t, t]` for grid nodes `t`, and dyadic intervals.
    AnchoredDyadic,
}

#[derive(Debug, Clone, Serialize)]
pub struct A2Report {
    pub a2_norm: f64,
    pub argmax: (f64, f64),
    pub intervals_scanned: usize,
    pub family: ScanFamily,
    pub b1: Option<f64>,
    pub b2: Option<f64>,
    pub b: Option<f64>,
}

/// `δ_n`: `1 − 1/(n+1)` for odd `n`, `1 − 1/n` for even `n`.
pub fn delta_n(n: usize) -> f64 {
    if n % 2 == 1 {
        1.0 - 1.0 / (n as f64 + 1.0)
    } else {
        1.0 - 1.0 / n as f64
    }
}

/// Exact antiderivatives of `w` and `1/w` on the grid.
struct Prefix<'a> {
    grid: &'a [f64],
    vals: Vec<f64>,
    cum: Vec<f64>,
}

impl<'a> Prefix<'a> {
    fn new(grid: &'a [f64], vals: Vec<f64>) -> Self {
        let mut cum = vec![0.0];
        for i in 0..vals.len() {
            cum.push(cum[i] + vals[i] * (grid[i + 1] - grid[i]));
        }
        Prefix { grid, vals, cum }
    }

    fn at(&self, x: f64) -> f64 {
        let k = self.grid.partition_point(|g| *g <= x).clamp(1, self.vals.len());
        self.cum[k - 1] + self.vals[k - 1] * (x - self.grid[k - 1])
    }

    /// `∫_l^r`, summing whole cells directly so short intervals keep their
    /// relative accuracy.
    fn integral(&self, l: f64, r: f64) -> f64 {
        let n = self.vals.len();
        let kl = self.grid.partition_point(|g| *g <= l).clamp(1, n) - 1;
        let kr = self.grid.partition_point(|g| *g < r).clamp(1, n) - 1;
        if kl == kr {
            return self.vals[kl] * (r - l);
        }
        let mut s = self.vals[kl] * (self.grid[kl + 1] - l) + self.vals[kr] * (r - self.grid[kr]);
        for k in kl + 1..kr {
            s += self.vals[k] * (self.grid[k + 1] - self.grid[k]);
        }
        s
    }
}

fn product(pw: &Prefix, pv: &Prefix, l: f64, r: f64) -> f64 {
    let len = r - l;
    pw.integral(l, r) * pv.integral(l, r) / (len * len)
}

/// Lower bound for `sup_I (avg_I w)(avg_I 1/w)` over a finite interval family.
pub fn a2_norm(w: &Weight, family: ScanFamily) -> A2Report {
    let grid = w.grid();
    let m = w.cells();
    let pw = Prefix::new(grid, w.weights().to_vec());
    let pv = Prefix::new(grid, w.weights().iter().map(|x| 1.0 / x).collect());
    let mut best = (f64::NEG_INFINITY, (0.0, 0.0));
    let mut scanned = 0usize;
    let take = |v: f64, l: f64, r: f64, best: &mut (f64, (f64, f64))| {
        if v > best.0 {
            *best = (v, (l, r));
        }
    };

    let full = match family {
        ScanFamily::CellAligned => true,
        ScanFamily::Auto => m * (m + 1) / 2 <= FULL_SCAN_PAIRS,
        ScanFamily::AnchoredDyadic => false,
    };
    if full {
        let (v, i, j) = (0..m)
            .into_par_iter()
            .map(|i| {
                let mut loc = (f64::NEG_INFINITY, i, i + 1);
                let (mut sw, mut sv) = (0.0, 0.0);
                for j in i + 1..=m {
                    let h = grid[j] - grid[j - 1];
                    sw += pw.vals[j - 1] * h;
                    sv += pv.vals[j - 1] * h;
                    let len = grid[j] - grid[i];
                    let v = sw * sv / (len * len);
                    if v > loc.0 {
                        loc = (v, i, j);
                    }
                }
                loc
            })
            .reduce(|| (f64::NEG_INFINITY, 0, 1), |a, b| if b.0 > a.0 { b } else { a });
        scanned += m * (m + 1) / 2;
        take(v, grid[i], grid[j], &mut best);
    }
    if family != ScanFamily::CellAligned {
        for &t in &grid[1..=m] {
            take(product(&pw, &pv, 0.0, t), 0.0, t, &mut best);
            scanned += 1;
            for n in (1..ANCHOR_ORDERS).step_by(2) {
                let l = delta_n(n) * t;
                take(product(&pw, &pv, l, t), l, t, &mut best);
                scanned += 1;
            }
        }
        let a = w.a();
        let levels = (m as f64).log2().ceil() as u32 + 2;
        for j in 0..=levels {
            let parts = 1usize << j;
            for k in 0..parts {
                let (l, r) = (a * k as f64 / parts as f64, a * (k + 1) as f64 / parts as f64);
                take(product(&pw, &pv, l, r), l, r, &mut best);
                scanned += 1;
            }
        }
    }
    A2Report {
        a2_norm: best.0,
        argmax: best.1,
        intervals_scanned: scanned,
        family,
        b1: None,
        b2: None,
        b: None,
    }
}

/// Scaled piecewise polynomial `e^{log_scale}·p_i(x − x_i)` on each cell.
#[derive(Debug, Clone)]
struct PiecewisePoly {
    log_scale: f64,
    coeffs: Vec<Vec<f64>>,
}

fn poly_eval(c: &[f64], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * u + a)
}

/// `∫₀ᵘ p`, as coefficients.
fn poly_antideriv(c: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0];
    out.extend(c.iter().enumerate().map(|(d, a)| a / (d as f64 + 1.0)));
    out
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

impl PiecewisePoly {
    fn log_eval(&self, grid: &[f64], t: f64) -> f64 {
        let k = grid.partition_point(|g| *g < t).saturating_sub(1).min(self.coeffs.len() - 1);
        self.log_scale + poly_eval(&self.coeffs[k], t - grid[k]).ln()
    }
}

/// `J_m` for `m = 0..=n`: `J_0 ≡ 1`, `J_m(s) = ∫₀ˢ e^{(−1)^{m+1}φ} J_{m−1}`.
fn simplex_levels(w: &Weight, n: usize) -> Vec<PiecewisePoly> {
    let grid = w.grid();
    let m = w.cells();
    let phi = w.phis();
    let mut levels = vec![PiecewisePoly { log_scale: 0.0, coeffs: vec![vec![1.0]; m] }];
    for lev in 1..=n {
        let sign = if lev % 2 == 1 { 1.0 } else { -1.0 };
        let shift = phi.iter().map(|p| sign * p).fold(f64::NEG_INFINITY, f64::max);
        let prev = &levels[lev - 1];
        let mut coeffs = Vec::with_capacity(m);
        let mut node = 0.0;
        for i in 0..m {
            let e = (sign * phi[i] - shift).exp();
            let mut c: Vec<f64> = poly_antideriv(&prev.coeffs[i]).into_iter().map(|a| a * e).collect();
            c[0] = node;
            node = poly_eval(&c, grid[i + 1] - grid[i]);
            coeffs.push(c);
        }
        let norm = if node > 0.0 { node } else { 1.0 };
        for c in coeffs.iter_mut() {
            c.iter_mut().for_each(|a| *a /= norm);
        }
        levels.push(PiecewisePoly { log_scale: prev.log_scale + shift + norm.ln(), coeffs });
    }
    levels
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > N_MAX {
        return Err(Error::InvalidInput(format!("simplex order n = {n} outside 1..={N_MAX}")));
    }
    Ok(())
}

/// `∫_{K_{t,n}} e^{G_{φ,n}} dm_n` for `φ = log w`, where
/// `K_{t,n} = {t ≥ x_1 ≥ … ≥ x_n ≥ 0}`.
pub fn simplex_exp_integral(w: &Weight, t: f64, n: usize) -> Result<f64> {
    Ok(simplex_exp_log(w, t, n)?.exp())
}

/// Logarithm of [`simplex_exp_integral`]; finite where the integral itself
/// would overflow.
pub fn simplex_exp_log(w: &Weight, t: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    check_t(w, t)?;
    let levels = simplex_levels(w, n);
    Ok(levels[n].log_eval(w.grid(), t))
}

fn check_t(w: &Weight, t: f64) -> Result<()> {
    if !(t > 0.0 && t <= w.a() * (1.0 + 1e-12)) {
        return Err(Error::InvalidInput(format!("t = {t} outside (0, {}]", w.a())));
    }
    Ok(())
}

/// `∫₀^τ |k_{τ,n}|` with `k_{τ,n}(s) = (2n/τⁿ)(2s − τ)^{n−1}`.
pub fn kernel_abs_integral(tau: f64, n: usize) -> f64 {
    let f = |s: f64| ((2.0 * s - tau) / tau).powi(n as i32);
    (f(0.5 * tau) - f(0.0)).abs() + (f(tau) - f(0.5 * tau)).abs()
}

/// `∫₀^τ φ(s) k_{τ,n}(s) ds`, exact for piecewise-constant `φ`.
pub fn phi_average(w: &Weight, tau: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("order n must be at least 1".into()));
    }
    check_t(w, tau)?;
    let grid = w.grid();
    let f = |s: f64| ((2.0 * s - tau) / tau).powi(n as i32);
    let mut acc = 0.0;
    for i in 0..w.cells() {
        let (a, b) = (grid[i], grid[i + 1].min(tau));
        if a >= tau {
            break;
        }
        acc += w.phi(i) * (f(b) - f(a));
    }
    Ok(acc)
}

/// `2(−1)^{n+1}(n!/τⁿ)∫_{K_{τ,n}} G_{φ,n} dm_n`, from the nested recursion
/// `M_m(s) = ∫₀ˢ [(−1)^{m+1}φ(u)u^{m−1}/(m−1)! + M_{m−1}(u)] du`.
pub fn phi_average_simplex(w: &Weight, tau: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    check_t(w, tau)?;
    let grid = w.grid();
    let cells = w.cells();
    // Work in the rescaled variable u = s/τ so that all polynomials stay O(1).
    let mut prev: Vec<Vec<f64>> = vec![vec![0.0]; cells];
    let mut fact = 1.0;
    for m in 1..=n {
        if m > 1 {
            fact *= (m - 1) as f64;
        }
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        let mut next = Vec::with_capacity(cells);
        let mut node = 0.0;
        for i in 0..cells {
            let x0 = grid[i] / tau;
            let hu = (grid[i + 1] - grid[i]) / tau;
            // u^{m−1} = (x0 + v)^{m−1} expanded in the local variable v.
            let mut mono = vec![0.0; m];
            let mut binom = 1.0;
            for d in 0..m {
                if d > 0 {
                    binom *= (m - d) as f64 / d as f64;
                }
                mono[d] = binom * x0.powi((m - 1 - d) as i32);
            }
            let mut integrand: Vec<f64> = mono.iter().map(|c| sign * w.phi(i) * c / fact).collect();
            for (d, c) in prev[i].iter().enumerate() {
                if d < integrand.len() {
                    integrand[d] += c;
                } else {
                    integrand.push(*c);
                }
            }
            let mut c = poly_antideriv(&integrand);
            c[0] = node;
            node = poly_eval(&c, hu);
            next.push(c);
        }
        prev = next;
    }
    let k = grid.partition_point(|g| *g < tau).saturating_sub(1).min(cells - 1);
    let moment = poly_eval(&prev[k], (tau - grid[k]) / tau);
    // The rescaling turned ∫ dm_n into τⁿ∫ dm_n(u); n!/τⁿ cancels τⁿ.
    let mut nf = 1.0;
    for j in 2..=n {
        nf *= j as f64;
    }
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    Ok(2.0 * sign * nf * moment)
}

#[derive(Debug, Clone, Serialize)]
pub struct Prop1Report {
    pub b1: f64,
    pub b2: f64,
    pub b: f64,
    /// `log₂` of `2²⁸(b₂ + b₁⁻²b₂)¹⁴`.
    pub log2_bound: f64,
    pub bound: f64,
    pub a2_actual: f64,
    pub a2_intervals: usize,
    pub satisfied: bool,
    /// Largest value of the weighted simplex functional for each `n`.
    pub functional_max: Vec<f64>,
    /// Largest `|[φ]_{δ_n r, n} − [φ]_{δ_{n+1} r, n+1}|` over odd `n`.
    pub step_gap: f64,
    pub step_gap_bound: f64,
    pub step_gap_holds: bool,
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Evaluates the simplex functional and the averages of `e^φ` on `r_grid`
/// for `n ≤ n_max`, derives the tightest `b₁, b₂`, and compares the A₂ scan
/// with `2²⁸(b₂ + b₁⁻²b₂)¹⁴`.
pub fn prop1_certificate(w: &Weight, n_max: usize, r_grid: &[f64]) -> Result<Prop1Report> {
    check_n(n_max)?;
    if r_grid.is_empty() {
        return Err(Error::InvalidInput("empty r grid".into()));
    }
    for &r in r_grid {
        check_t(w, r)?;
    }
    let grid = w.grid();
    let cells = w.cells();
    let phi = w.phis();
    let levels = simplex_levels(w, n_max);
    let pw = Prefix::new(grid, w.weights().to_vec());

    let mut b1 = f64::INFINITY;
    let mut b2 = f64::NEG_INFINITY;
    for &r in r_grid {
        let avg = pw.at(r) / r;
        b1 = b1.min(avg);
        b2 = b2.max(avg);
    }

    let mut functional_max = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let lev = &levels[n];
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let shift = phi.iter().map(|p| sign * p).fold(f64::NEG_INFINITY, f64::max);
        let sq: Vec<Vec<f64>> = lev.coeffs.iter().map(|c| poly_antideriv(&poly_mul(c, c))).collect();
        let mut full = vec![0.0];
        for i in 0..cells {
            let v = (sign * phi[i] - shift).exp() * poly_eval(&sq[i], grid[i + 1] - grid[i]);
            full.push(full[i] + v);
        }
        let mut best = f64::NEG_INFINITY;
        for &r in r_grid {
            let k = grid.partition_point(|g| *g < r).saturating_sub(1).min(cells - 1);
            let part = full[k] + (sign * phi[k] - shift).exp() * poly_eval(&sq[k], r - grid[k]);
            let log_an = (2 * n + 1) as f64 * r.ln() - ((2 * n + 1) as f64).ln() - 2.0 * ln_factorial(n);
            let logf = part.ln() + shift + 2.0 * lev.log_scale - log_an;
            best = best.max(logf.exp());
        }
        functional_max.push(best);
        b2 = b2.max(best);
    }

    let b = 2.0 * (b2 + b2 / (b1 * b1));
    let log2_bound = 28.0 + 14.0 * (b2 + b2 / (b1 * b1)).log2();
    let bound = log2_bound.exp2();
    let a2 = a2_norm(w, ScanFamily::Auto);
    let satisfied = a2.a2_norm.log2() <= log2_bound;

    let mut gap: f64 = 0.0;
    for n in (1..n_max).step_by(2) {
        for &r in r_grid {
            let tau = delta_n(n) * r;
            let g = (phi_average(w, tau, n)? - phi_average(w, tau, n + 1)?).abs();
            gap = gap.max(g);
        }
    }
    let step_gap_bound = 6.0 * b.ln();
    Ok(Prop1Report {
        b1,
        b2,
        b,
        log2_bound,
        bound,
        a2_actual: a2.a2_norm,
        a2_intervals: a2.intervals_scanned,
        satisfied,
        functional_max,
        step_gap: gap,
        step_gap_bound,
        step_gap_holds: gap <= step_gap_bound,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma1Report {
    pub b: f64,
    pub log_b: f64,
    /// Largest `(1/s)∫₀ˢ|φ|` over grid nodes `s ≤ r`.
    pub mean_abs_phi: f64,
    /// Largest `(1/s)∫₀ˢ e^{|φ|}` over grid nodes `s ≤ r`.
    pub mean_exp_abs_phi: f64,
    pub abs_margin: f64,
    pub exp_margin: f64,
    pub holds: bool,
}

/// Checks `(1/s)∫₀ˢ|φ| ≤ log b` and `(1/s)∫₀ˢ e^{|φ|} ≤ b` with
/// `b = 2(b₂ + b₁⁻²b₂)` at every grid node `s ≤ r` and at `r`.
pub fn lemma1_bounds(w: &Weight, r: f64, b1: f64, b2: f64) -> Result<Lemma1Report> {
    check_t(w, r)?;
    let grid = w.grid();
    let phi = w.phis();
    let pa = Prefix::new(grid, phi.iter().map(|p| p.abs()).collect());
    let pe = Prefix::new(grid, phi.iter().map(|p| p.abs().exp()).collect());
    let b = 2.0 * (b2 + b2 / (b1 * b1));
    let mut s_list: Vec<f64> = grid[1..].iter().copied().filter(|s| *s < r).collect();
    s_list.push(r);
    let mean_abs_phi = s_list.iter().map(|&s| pa.at(s) / s).fold(f64::NEG_INFINITY, f64::max);
    let mean_exp_abs_phi = s_list.iter().map(|&s| pe.at(s) / s).fold(f64::NEG_INFINITY, f64::max);
    let log_b = b.ln();
    let abs_margin = log_b - mean_abs_phi;
    let exp_margin = b - mean_exp_abs_phi;
    Ok(Lemma1Report {
        b,
        log_b,
        mean_abs_phi,
        mean_exp_abs_phi,
        abs_margin,
        exp_margin,
        holds: abs_margin >= 0.0 && exp_margin >= 0.0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ReverseHolderReport {
    /// `(p, C(p))` with `C(p) = sup_I (avg_I wᵖ)^{1/p} / avg_I w` over dyadic `I`.
    pub table: Vec<(f64, f64)>,
    pub c_max: f64,
    /// Largest `p` with `C(p) ≤ c_max`.
    pub p: Option<f64>,
    pub c: Option<f64>,
}

/// Empirical reverse-Hölder exponent of `w` over dyadic subintervals.
pub fn reverse_holder_probe(w: &Weight, p_grid: &[f64], c_max: f64) -> Result<ReverseHolderReport> {
    if p_grid.iter().any(|p| !(*p >= 1.0)) {
        return Err(Error::InvalidInput("reverse Hölder exponents must be at least 1".into()));
    }
    let grid = w.grid();
    let a = w.a();
    let pw = Prefix::new(grid, w.weights().to_vec());
    let levels = (w.cells() as f64).log2().ceil() as u32 + 1;
    let table: Vec<(f64, f64)> = p_grid
        .par_iter()
        .map(|&p| {
            let pp = Prefix::new(grid, w.weights().iter().map(|x| x.powf(p)).collect());
            let mut c: f64 = 1.0;
            for j in 0..=levels {
                let parts = 1usize << j;
                for k in 0..parts {
                    let (l, r) = (a * k as f64 / parts as f64, a * (k + 1) as f64 / parts as f64);
                    let len = r - l;
                    let lhs = (pp.integral(l, r) / len).powf(1.0 / p);
                    c = c.max(lhs / (pw.integral(l, r) / len));
                }
            }
            (p, c)
        })
        .collect();
    let best = table
        .iter()
        .filter(|(_, c)| *c <= c_max)
        .max_by(|x, y| x.0.total_cmp(&y.0))
        .copied();
    Ok(ReverseHolderReport { table, c_max, p: best.map(|b| b.0), c: best.map(|b| b.1) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(cells: usize, a: f64) -> Weight {
        WeightProfile::constant(a, cells, 1.0).unwrap()
    }

    #[test]
    fn constant_weight_has_unit_a2() {
        let w = WeightProfile::constant(2.0, 16, 3.7).unwrap();
        for f in [ScanFamily::Auto, ScanFamily::CellAligned, ScanFamily::AnchoredDyadic] {
            assert!((a2_norm(&w, f).a2_norm - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn step_weight() {
        let w = WeightProfile::uniform(1.0, vec![2.0, 0.5]).unwrap();
        let rep = a2_norm(&w, ScanFamily::CellAligned);
        assert!((rep.a2_norm - 25.0 / 16.0).abs() < 1e-14);
        assert_eq!(rep.argmax, (0.0, 1.0));
    }

    #[test]
    fn simplex_volume_and_constant() {
        let w = unit(10, 2.0);
        let mut fact = 1.0;
        for n in 1..=N_MAX {
            fact *= n as f64;
            let v = simplex_exp_integral(&w, 1.3, n).unwrap();
            assert!((v * fact / 1.3f64.powi(n as i32) - 1.0).abs() < 1e-12);
        }
        let w = WeightProfile::constant(2.0, 5, 0.4f64.exp()).unwrap();
        assert!((simplex_exp_integral(&w, 1.5, 1).unwrap() - 1.5 * 0.4f64.exp()).abs() < 1e-13);
    }

    #[test]
    fn simplex_linear_phi_converges() {
        // φ(u) = u sampled at midpoints; the exact value for the smooth φ is e^{-1}.
        let w = WeightProfile::from_fn(1.0, 400, |u| u.exp()).unwrap();
        let v = simplex_exp_integral(&w, 1.0, 2).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-5);
    }

    #[test]
    fn kernel_average_cases() {
        let w = WeightProfile::constant(1.0, 7, 1f64.exp()).unwrap();
        for n in 1..=8 {
            let want = if n % 2 == 1 { 2.0 } else { 0.0 };
            assert!((phi_average(&w, 0.8, n).unwrap() - want).abs() < 1e-13);
            assert!((kernel_abs_integral(0.8, n) - 2.0).abs() < 1e-15);
        }
        let w = WeightProfile::from_fn(1.0, 64, |s| s.exp()).unwrap();
        assert!((phi_average(&w, 1.0, 1).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn kernel_matches_simplex_form() {
        let w = WeightProfile::from_fn(2.0, 37, |s| (1.0 + (3.0 * s).sin() * s).exp()).unwrap();
        for n in 1..=8 {
            for &tau in &[0.3, 1.1, 2.0] {
                let k = phi_average(&w, tau, n).unwrap();
                let s = phi_average_simplex(&w, tau, n).unwrap();
                assert!((k - s).abs() < 1e-10, "n {n} tau {tau}: {k} vs {s}");
            }
        }
    }

    #[test]
    fn prop1_for_zero_phi() {
        let w = unit(8, 1.0);
        let rep = prop1_certificate(&w, 6, &[0.25, 0.5, 1.0]).unwrap();
        assert!((rep.b1 - 1.0).abs() < 1e-13 && (rep.b2 - 1.0).abs() < 1e-12);
        for f in &rep.functional_max {
            assert!((f - 1.0).abs() < 1e-12);
        }
        assert!((rep.log2_bound - 42.0).abs() < 1e-10);
        assert!(rep.satisfied && rep.step_gap_holds);
    }

    #[test]
    fn prop1_for_constant_phi() {
        let k: f64 = 0.7;
        let w = WeightProfile::constant(1.0, 8, k.exp()).unwrap();
        let rep = prop1_certificate(&w, 5, &[0.5, 1.0]).unwrap();
        for f in &rep.functional_max {
            assert!((f - k.exp()).abs() < 1e-12);
        }
        assert!((rep.b1 - k.exp()).abs() < 1e-13);
        assert!(rep.satisfied);
    }

    #[test]
    fn lemma1_cases() {
        let rep = lemma1_bounds(&unit(4, 1.0), 1.0, 1.0, 1.0).unwrap();
        assert!((rep.b - 4.0).abs() < 1e-15 && rep.holds);
        let w = WeightProfile::constant(1.0, 4, 10f64.exp()).unwrap();
        let rep = lemma1_bounds(&w, 1.0, 1.0, 1.0).unwrap();
        assert!(!rep.holds);
    }

    #[test]
    fn reverse_holder_unit() {
        let rep = reverse_holder_probe(&unit(16, 1.0), &[1.0, 2.0, 4.0], 2.0).unwrap();
        assert!(rep.table.iter().all(|(_, c)| (c - 1.0).abs() < 1e-14));
        assert_eq!(rep.p, Some(4.0));
    }

    #[test]
    fn delta_convention() {
        assert_eq!(delta_n(1), 0.5);
        assert_eq!(delta_n(2), 0.5);
        assert_eq!(delta_n(3), 0.75);
        assert_eq!(delta_n(4), 0.75);
    }

    #[test]
    fn order_bounds() {
        let w = unit(4, 1.0);
        assert!(simplex_exp_integral(&w, 0.5, 0).is_err());
        assert!(simplex_exp_integral(&w, 0.5, N_MAX + 1).is_err());
        assert!(simplex_exp_integral(&w, 1.5, 1).is_err());
    }
}
