//! Uniform grids on the truncated half-line `[0, L]`, sampled fields and the
//! trapezoidal quadrature every estimate is measured with.
//!
//! Fields are treated as zero beyond `L`. All integrals use the composite
//! trapezoid rule on the grid nodes, so the running primitive of a field
//! vanishes exactly at `x = 0` and a discrete difference quotient of a
//! compactly supported profile has exactly zero mean.

use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result, SpeError};

/// Uniform discretization of `[0, L]` with `n` cells and `n + 1` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    length: f64,
    cells: usize,
    dx: f64,
}

/// Builds the uniform grid `x_i = i L / n`, `i = 0..=n`.
pub fn make_uniform_grid(length: f64, cells: usize) -> Result<Grid> {
    if !(length.is_finite() && length > 0.0) {
        return invalid_arg(format!("grid length must be positive and finite, got {length}"));
    }
    if cells < 2 {
        return invalid_arg(format!("grid needs at least 2 cells, got {cells}"));
    }
    Ok(Grid { length, cells, dx: length / cells as f64 })
}

impl Grid {
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn node_count(&self) -> usize {
        self.cells + 1
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Position of node `i`; the last node is pinned to `L` exactly.
    pub fn x(&self, i: usize) -> f64 {
        if i == self.cells {
            self.length
        } else {
            i as f64 * self.dx
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.node_count()).map(|i| self.x(i)).collect()
    }

    /// Trapezoid weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.cells {
            0.5 * self.dx
        } else {
            self.dx
        }
    }
}

/// Exponent of the norms the a-priori estimates are stated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
    L4,
    Inf,
}

impl Norm {
    pub fn from_p(p: f64) -> Result<Norm> {
        match p {
            p if p == 1.0 => Ok(Norm::L1),
            p if p == 2.0 => Ok(Norm::L2),
            p if p == 4.0 => Ok(Norm::L4),
            p if p == f64::INFINITY => Ok(Norm::Inf),
            _ => invalid_arg(format!("unsupported norm exponent p = {p}")),
        }
    }
}

/// Real-valued samples, one per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    /// Checked constructor: one finite value per node.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Field> {
        if values.len() != grid.node_count() {
            return Err(SpeError::InvalidData(format!(
                "field has {} values for a grid with {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SpeError::InvalidData(format!("non-finite field value at node {i}")));
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Grid) -> Field {
        Field { grid, values: vec![0.0; grid.node_count()] }
    }

    pub fn constant(grid: Grid, c: f64) -> Field {
        Field { grid, values: vec![c; grid.node_count()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Field> {
        Field::new(grid, (0..grid.node_count()).map(|i| f(grid.x(i))).collect())
    }

    /// Unchecked constructor for values produced by finite arithmetic.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Field {
        debug_assert_eq!(values.len(), grid.node_count());
        Field { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    /// `a * self + b * other`; the grids must match.
    pub fn combine(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        if self.grid != other.grid {
            return invalid_arg("fields live on different grids");
        }
        let values = self.values.iter().zip(&other.values).map(|(u, v)| a * u + b * v).collect();
        Ok(Field::from_raw(self.grid, values))
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.combine(1.0, other, -1.0)
    }
}

fn trapezoid(grid: &Grid, values: impl Iterator<Item = f64>) -> f64 {
    values.enumerate().map(|(i, v)| grid.weight(i) * v).sum()
}

/// Trapezoidal `(∫₀ᴸ |f|ᵖ)^{1/p}`, or the node-wise max for `p = ∞`.
pub fn lp_norm(f: &Field, p: Norm) -> f64 {
    let g = f.grid();
    let v = f.values().iter();
    match p {
        Norm::L1 => trapezoid(g, v.map(|x| x.abs())),
        Norm::L2 => trapezoid(g, v.map(|x| x * x)).sqrt(),
        Norm::L4 => trapezoid(g, v.map(|x| (x * x) * (x * x))).sqrt().sqrt(),
        Norm::Inf => f.max_abs(),
    }
}

/// Squared L² norm without the square root round-trip.
pub fn l2_squared(f: &Field) -> f64 {
    trapezoid(f.grid(), f.values().iter().map(|x| x * x))
}

/// Fourth power of the L⁴ norm.
pub fn l4_fourth(f: &Field) -> f64 {
    trapezoid(f.grid(), f.values().iter().map(|x| (x * x) * (x * x)))
}

/// Trapezoidal `∫₀ᴿ |f|`, interpolating `|f|` linearly at a cut point that
/// falls between nodes.
pub fn windowed_l1(f: &Field, r: f64) -> Result<f64> {
    let g = f.grid();
    if !(r > 0.0 && r <= g.length()) {
        return invalid_arg(format!("window R = {r} outside (0, {}]", g.length()));
    }
    let v = f.values();
    let pos = r / g.dx();
    let mut j = pos.floor() as usize;
    let mut frac = pos - j as f64;
    if frac > 1.0 - 1e-12 {
        j += 1;
        frac = 0.0;
    }
    if j >= g.cells() {
        return Ok(lp_norm(f, Norm::L1));
    }
    let mut sum = 0.0;
    for i in 0..j {
        sum += 0.5 * g.dx() * (v[i].abs() + v[i + 1].abs());
    }
    if frac > 1e-12 {
        let a = v[j].abs();
        let b = a + frac * (v[j + 1].abs() - a);
        sum += 0.5 * frac * g.dx() * (a + b);
    }
    Ok(sum)
}

/// Trapezoidal `∫₀ᴸ f`.
pub fn mean(f: &Field) -> f64 {
    trapezoid(f.grid(), f.values().iter().copied())
}
