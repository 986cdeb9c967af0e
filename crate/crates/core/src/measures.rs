//! Even measures `μ = σ·dm + Σ m_k(δ_{t_k} + δ_{-t_k})`.
//!
//! A measure is stored as a constant `background` density on all of ℝ plus a
//! deviation `σ − background` supported on a finite symmetric window, plus
//! atoms. The background part is handled analytically wherever the sinc
//! lattice makes that possible, so `c·Lebesgue` yields exactly `c·I`.

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::toeplitz_pw::assemble_toeplitz;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const EVEN_TOL: f64 = 1e-12;
/// Gauss–Legendre order used on every quadrature sub-cell.
pub const QUAD_ORDER: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interp {
    Linear,
    Constant,
}

/// Point mass `mass` at `±t` (once at the origin when `t == 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub t: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measure {
    edges: Vec<f64>,
    values: Vec<f64>,
    interp: Interp,
    background: f64,
    atoms: Vec<Atom>,
    tail_bound: f64,
    quad_step: f64,
}

/// Quadrature for the signed measure `ν = μ − background·dm`.
#[derive(Debug, Clone, Default)]
pub struct NuQuadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl NuQuadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameBounds {
    pub c1: f64,
    pub c2: f64,
    pub basis_size: usize,
    pub a: f64,
}

impl Measure {
    /// Lebesgue measure, windowed to `[-x_max, x_max]` for [`Measure::integrate`].
    pub fn lebesgue(x_max: f64) -> Self {
        Self::constant(1.0, x_max).expect("unit density is valid")
    }

    pub fn constant(c: f64, x_max: f64) -> Result<Self> {
        if !(c >= 0.0) {
            return Err(Error::NegativeMass(format!("density {c}")));
        }
        if !(x_max > 0.0) {
            return Err(Error::InvalidInput(format!("x_max must be positive, got {x_max}")));
        }
        Ok(Measure {
            edges: vec![-x_max, x_max],
            values: vec![c],
            interp: Interp::Constant,
            background: c,
            atoms: Vec::new(),
            tail_bound: 0.0,
            quad_step: default_grid_step(),
        })
    }

    /// Density given by samples on a symmetric grid.
    pub fn from_table(
        nodes: Vec<f64>,
        values: Vec<f64>,
        interp: Interp,
        background: f64,
    ) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidInput("density table needs at least two nodes".into()));
        }
        if nodes.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::InvalidInput("density grid must be strictly increasing".into()));
        }
        let expect = match interp {
            Interp::Linear => nodes.len(),
            Interp::Constant => nodes.len() - 1,
        };
        if values.len() != expect {
            return Err(Error::GridMismatch { expected: expect, got: values.len() });
        }
        let n = nodes.len();
        for i in 0..n {
            if (nodes[i] + nodes[n - 1 - i]).abs() > EVEN_TOL {
                return Err(Error::NonEvenInput(format!(
                    "grid node {} has no mirror image",
                    nodes[i]
                )));
            }
        }
        let m = values.len();
        for i in 0..m {
            if (values[i] - values[m - 1 - i]).abs() > EVEN_TOL {
                return Err(Error::NonEvenInput(format!(
                    "density differs at ±{}",
                    nodes[i].abs()
                )));
            }
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::NegativeMass(format!("density value {v}")));
        }
        if !(background >= 0.0) {
            return Err(Error::NegativeMass(format!("background {background}")));
        }
        Ok(Measure {
            edges: nodes,
            values,
            interp,
            background,
            atoms: Vec::new(),
            tail_bound: 0.0,
            quad_step: default_grid_step(),
        })
    }

    /// Piecewise-constant even density: `pieces` are `(from, to, value)` on
    /// `[0, ∞)`, contiguous from 0, mirrored to the negative axis.
    pub fn piecewise(pieces: &[(f64, f64, f64)], background: f64) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidInput("piecewise density needs at least one piece".into()));
        }
        let mut pos = vec![0.0];
        let mut vals = Vec::new();
        for (i, &(from, to, v)) in pieces.iter().enumerate() {
            if (from - pos[i]).abs() > EVEN_TOL {
                return Err(Error::InvalidInput(format!(
                    "piece {i} starts at {from}, expected {}",
                    pos[i]
                )));
            }
            if !(to > from) {
                return Err(Error::InvalidInput(format!("piece {i} is empty")));
            }
            pos.push(to);
            vals.push(v);
        }
        let mut edges: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
        edges.extend_from_slice(&pos[1..]);
        let mut values: Vec<f64> = vals.iter().rev().copied().collect();
        values.extend_from_slice(&vals);
        Self::from_table(edges, values, Interp::Constant, background)
    }

    /// Only atoms, zero density.
    pub fn atoms_only(atoms: &[Atom], x_max: f64) -> Result<Self> {
        Self::constant(0.0, x_max)?.with_atoms(atoms)
    }

    pub fn with_atom(self, t: f64, mass: f64) -> Result<Self> {
        self.with_atoms(&[Atom { t, mass }])
    }

    pub fn with_atoms(mut self, atoms: &[Atom]) -> Result<Self> {
        for a in atoms {
            if !(a.mass > 0.0) {
                return Err(Error::NegativeMass(format!("atom mass {} at {}", a.mass, a.t)));
            }
            if a.t < 0.0 {
                return Err(Error::NonEvenInput(format!(
                    "atom at {} (atoms are given by their nonnegative location)",
                    a.t
                )));
            }
            if let Some(b) = self.atoms.iter_mut().find(|b| (b.t - a.t).abs() <= EVEN_TOL) {
                b.mass += a.mass;
            } else {
                self.atoms.push(*a);
            }
        }
        self.atoms.sort_by(|p, q| p.t.total_cmp(&q.t));
        Ok(self)
    }

    pub fn with_tail_bound(mut self, tail_bound: f64) -> Self {
        self.tail_bound = tail_bound.max(0.0);
        self
    }

    /// Largest sub-cell width used by the window quadrature.
    pub fn with_quad_step(mut self, step: f64) -> Self {
        if step > 0.0 {
            self.quad_step = step;
        }
        self
    }

    /// Multiplies the whole measure by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= c);
        m.background *= c;
        m.atoms.iter_mut().for_each(|a| a.mass *= c);
        m.tail_bound *= c;
        m
    }

    pub fn background(&self) -> f64 {
        self.background
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn interp(&self) -> Interp {
        self.interp
    }

    pub fn grid(&self) -> &[f64] {
        &self.edges
    }

    pub fn window(&self) -> (f64, f64) {
        (self.edges[0], *self.edges.last().unwrap())
    }

    /// Density value at `x`; the background outside the window.
    pub fn sigma(&self, x: f64) -> f64 {
        let (lo, hi) = self.window();
        if x < lo || x > hi {
            return self.background;
        }
        let i = match self.edges.partition_point(|e| *e <= x) {
            0 => 0,
            k => (k - 1).min(self.edges.len() - 2),
        };
        self.cell_sigma(i, x)
    }

    fn cell_sigma(&self, i: usize, x: f64) -> f64 {
        match self.interp {
            Interp::Constant => self.values[i],
            Interp::Linear => {
                let (x0, x1) = (self.edges[i], self.edges[i + 1]);
                let s = (x - x0) / (x1 - x0);
                self.values[i] * (1.0 - s) + self.values[i + 1] * s
            }
        }
    }

    fn cell_deviation_is_zero(&self, i: usize) -> bool {
        match self.interp {
            Interp::Constant => self.values[i] == self.background,
            Interp::Linear => {
                self.values[i] == self.background && self.values[i + 1] == self.background
            }
        }
    }

    fn subcells(&self, i: usize) -> impl Iterator<Item = (f64, f64)> {
        let (x0, x1) = (self.edges[i], self.edges[i + 1]);
        let k = ((x1 - x0) / self.quad_step).ceil().max(1.0) as usize;
        let h = (x1 - x0) / k as f64;
        (0..k).map(move |j| (x0 + j as f64 * h, if j + 1 == k { x1 } else { x0 + (j + 1) as f64 * h }))
    }

    /// Nodes and signed weights for `ν = μ − background·dm`: window
    /// Gauss–Legendre nodes weighted by `σ − background`, then the atoms.
    pub fn nu_quadrature(&self) -> NuQuadrature {
        let gl = GaussLegendre::new(QUAD_ORDER);
        let mut q = NuQuadrature::default();
        for i in 0..self.edges.len() - 1 {
            if self.cell_deviation_is_zero(i) {
                continue;
            }
            for (a, b) in self.subcells(i) {
                for (x, w) in gl.on(a, b) {
                    let d = self.cell_sigma(i, x) - self.background;
                    if d != 0.0 {
                        q.nodes.push(x);
                        q.weights.push(w * d);
                    }
                }
            }
        }
        for a in &self.atoms {
            if a.t == 0.0 {
                q.nodes.push(0.0);
                q.weights.push(a.mass);
            } else {
                q.nodes.push(a.t);
                q.weights.push(a.mass);
                q.nodes.push(-a.t);
                q.weights.push(a.mass);
            }
        }
        q
    }

    /// `∫ f dμ` over the window plus the atoms, by Gauss–Legendre on each
    /// density cell.
    pub fn integrate<F: Fn(f64) -> Complex64>(&self, f: F) -> Complex64 {
        let gl = GaussLegendre::new(QUAD_ORDER);
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..self.edges.len() - 1 {
            for (a, b) in self.subcells(i) {
                for (x, w) in gl.on(a, b) {
                    s += f(x) * (w * self.cell_sigma(i, x));
                }
            }
        }
        s + self.atom_sum(&f)
    }

    fn atom_sum<F: Fn(f64) -> Complex64>(&self, f: F) -> Complex64 {
        self.atoms
            .iter()
            .map(|a| {
                if a.t == 0.0 {
                    f(0.0) * a.mass
                } else {
                    (f(a.t) + f(-a.t)) * a.mass
                }
            })
            .sum()
    }

    /// Trapezoid rule on the density grid for sampled `f`.
    ///
    /// `f_grid` holds `f` at every grid node; `f_atoms` holds `(f(t), f(-t))`
    /// for every atom in [`Measure::atoms`] order (the second entry is ignored
    /// for an atom at the origin).
    pub fn integrate_samples(
        &self,
        f_grid: &[Complex64],
        f_atoms: &[(Complex64, Complex64)],
    ) -> Result<Complex64> {
        if f_grid.len() != self.edges.len() {
            return Err(Error::GridMismatch { expected: self.edges.len(), got: f_grid.len() });
        }
        if f_atoms.len() != self.atoms.len() {
            return Err(Error::GridMismatch { expected: self.atoms.len(), got: f_atoms.len() });
        }
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..self.edges.len() - 1 {
            let h = self.edges[i + 1] - self.edges[i];
            s += match self.interp {
                Interp::Linear => (f_grid[i] * self.values[i] + f_grid[i + 1] * self.values[i + 1]) * (0.5 * h),
                Interp::Constant => (f_grid[i] + f_grid[i + 1]) * (0.5 * h * self.values[i]),
            };
        }
        for (a, (fp, fm)) in self.atoms.iter().zip(f_atoms) {
            s += if a.t == 0.0 { fp * a.mass } else { (fp + fm) * a.mass };
        }
        Ok(s)
    }

    /// Extreme eigenvalues of the truncated Toeplitz Gram matrix on `PW_a`.
    pub fn estimate_frame_bounds(&self, a: f64, n: usize) -> Result<FrameBounds> {
        if n < 8 {
            return Err(Error::InvalidInput(format!("basis size N = {n} is below 8")));
        }
        let op = assemble_toeplitz(self, a, n)?;
        let ev = op.eigenvalues();
        let (c1, c2) = (ev[0], *ev.last().unwrap());
        if c1 <= 1e-12 * c2.abs().max(1.0) {
            return Err(Error::NotSampling { min_eig: c1 });
        }
        Ok(FrameBounds { c1, c2, basis_size: op.basis.len(), a })
    }

    /// The measure as raw one-sided data (its own symmetrization).
    pub fn to_raw(&self) -> RawMeasure {
        let (nodes, values) = match self.interp {
            Interp::Linear => (self.edges.clone(), self.values.clone()),
            Interp::Constant => constant_to_linear(&self.edges, &self.values),
        };
        let mut atoms = Vec::new();
        for a in &self.atoms {
            if a.t == 0.0 {
                atoms.push((0.0, a.mass));
            } else {
                atoms.push((a.t, a.mass));
                atoms.push((-a.t, a.mass));
            }
        }
        RawMeasure { nodes, values, background: self.background, atoms }
    }
}

fn constant_to_linear(edges: &[f64], values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    // Represent the step function by doubled nodes a hair apart.
    let mut nodes = Vec::new();
    let mut vals = Vec::new();
    for i in 0..values.len() {
        let (a, b) = (edges[i], edges[i + 1]);
        let eps = 1e-9 * (b - a);
        nodes.push(if i == 0 { a } else { a + eps });
        vals.push(values[i]);
        nodes.push(if i + 1 == values.len() { b } else { b - eps });
        vals.push(values[i]);
    }
    (nodes, vals)
}

/// An arbitrary (not necessarily even) nonnegative measure: linearly
/// interpolated density on `nodes`, `background` outside, and signed atom
/// locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawMeasure {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub background: f64,
    pub atoms: Vec<(f64, f64)>,
}

impl RawMeasure {
    fn sigma(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if n == 0 || x < self.nodes[0] || x > self.nodes[n - 1] {
            return self.background;
        }
        let k = self.nodes.partition_point(|e| *e <= x).clamp(1, n - 1);
        let (x0, x1) = (self.nodes[k - 1], self.nodes[k]);
        let s = if x1 > x0 { (x - x0) / (x1 - x0) } else { 1.0 };
        self.values[k - 1] * (1.0 - s) + self.values[k] * s
    }
}

/// Even part `ν̃(S) = ½(ν(S) + ν(−S))` of a raw measure.
pub fn symmetrize(raw: &RawMeasure) -> Result<Measure> {
    if raw.values.len() != raw.nodes.len() {
        return Err(Error::GridMismatch { expected: raw.nodes.len(), got: raw.values.len() });
    }
    if raw.values.iter().any(|v| !(*v >= 0.0)) || !(raw.background >= 0.0) {
        return Err(Error::NegativeMass("density must be nonnegative".into()));
    }
    let mut grid: Vec<f64> = raw.nodes.iter().flat_map(|x| [x.abs(), -x.abs()]).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= EVEN_TOL);
    // Snap to an exactly symmetric grid.
    let n = grid.len();
    for i in 0..n / 2 {
        let m = 0.5 * (grid[n - 1 - i] - grid[i]);
        grid[i] = -m;
        grid[n - 1 - i] = m;
    }
    if n % 2 == 1 {
        grid[n / 2] = 0.0;
    }
    let mut measure = if grid.len() >= 2 {
        let values: Vec<f64> = grid.iter().map(|&x| 0.5 * (raw.sigma(x) + raw.sigma(-x))).collect();
        let mut v = values.clone();
        for i in 0..v.len() {
            v[i] = 0.5 * (values[i] + values[v.len() - 1 - i]);
        }
        Measure::from_table(grid, v, Interp::Linear, raw.background)?
    } else {
        Measure::constant(raw.background, 1.0)?
    };
    let mut atoms = Vec::new();
    for &(t, m) in &raw.atoms {
        if !(m > 0.0) {
            return Err(Error::NegativeMass(format!("atom mass {m} at {t}")));
        }
        if t == 0.0 {
            atoms.push(Atom { t: 0.0, mass: m });
        } else {
            atoms.push(Atom { t: t.abs(), mass: 0.5 * m });
        }
    }
    measure = measure.with_atoms(&atoms)?;
    Ok(measure)
}

/// Structured-text description of a measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub density: DensitySpec,
    #[serde(default)]
    pub atoms: Vec<[f64; 2]>,
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    #[serde(default = "default_grid_step")]
    pub grid_step: f64,
    #[serde(default)]
    pub tail_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    #[serde(rename = "type")]
    pub kind: DensityKind,
    pub values: DensityValues,
    #[serde(default)]
    pub interp: Option<Interp>,
    #[serde(default)]
    pub background: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityKind {
    Constant,
    Table,
    Piecewise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DensityValues {
    Scalar(f64),
    Rows(Vec<Vec<f64>>),
}

pub fn default_x_max() -> f64 {
    40.0
}

pub fn default_grid_step() -> f64 {
    0.25
}

impl MeasureSpec {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn constant(c: f64) -> Self {
        MeasureSpec {
            density: DensitySpec {
                kind: DensityKind::Constant,
                values: DensityValues::Scalar(c),
                interp: None,
                background: None,
            },
            atoms: Vec::new(),
            x_max: default_x_max(),
            grid_step: default_grid_step(),
            tail_bound: 0.0,
        }
    }
}

/// Builds a [`Measure`] from its structured description.
pub fn build_measure(spec: &MeasureSpec) -> Result<Measure> {
    let d = &spec.density;
    let base = match (d.kind, &d.values) {
        (DensityKind::Constant, DensityValues::Scalar(c)) => Measure::constant(*c, spec.x_max)?,
        (DensityKind::Constant, DensityValues::Rows(_)) => {
            return Err(Error::Config("constant density takes a single number".into()))
        }
        (DensityKind::Table, DensityValues::Rows(rows)) => {
            let interp = d.interp.unwrap_or(Interp::Linear);
            if rows.iter().any(|r| r.len() != 2) {
                return Err(Error::Config("table rows must be [x, sigma]".into()));
            }
            let nodes: Vec<f64> = rows.iter().map(|r| r[0]).collect();
            let mut values: Vec<f64> = rows.iter().map(|r| r[1]).collect();
            if interp == Interp::Constant {
                // Cell values are read from the left node of each cell.
                values.pop();
            }
            let background = d.background.unwrap_or_else(|| *values.last().unwrap_or(&0.0));
            Measure::from_table(nodes, values, interp, background)?
        }
        (DensityKind::Piecewise, DensityValues::Rows(rows)) => {
            if rows.iter().any(|r| r.len() != 3) {
                return Err(Error::Config("piecewise rows must be [from, to, sigma]".into()));
            }
            let bg = d
                .background
                .ok_or_else(|| Error::Config("piecewise density needs density.background".into()))?;
            let pieces: Vec<(f64, f64, f64)> = rows.iter().map(|r| (r[0], r[1], r[2])).collect();
            Measure::piecewise(&pieces, bg)?
        }
        (kind, DensityValues::Scalar(_)) => {
            return Err(Error::Config(format!("{kind:?} density needs a list of rows")))
        }
    };
    let atoms: Vec<Atom> = spec.atoms.iter().map(|[t, m]| Atom { t: *t, mass: *m }).collect();
    Ok(base
        .with_atoms(&atoms)?
        .with_tail_bound(spec.tail_bound)
        .with_quad_step(spec.grid_step))
}
