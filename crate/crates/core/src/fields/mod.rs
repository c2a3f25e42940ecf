//! Periodic square grids, sampled fields and their spectral calculus.
//!
//! Samples live at cell centres `((i + 1/2) h, (j + 1/2) h)` of an `n × n`
//! grid on the flat torus of edge `side`, stored row-major with `j` (the
//! `y` index) as the row. All derivatives are Fourier multipliers, so
//! discrete integration by parts holds to round-off.

mod dump;
mod spectral;

pub use dump::{read_field, write_field, FieldMeta};
pub use spectral::Spectral;

use crate::error::{Error, Result};

/// Square periodic grid of `n × n` cells on a torus of edge `side`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodicGrid {
    n: usize,
    side: f64,
}

impl PeriodicGrid {
    pub fn new(n: usize, side: f64) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "cells per axis must be a power of two >= 4, got {n}"
            )));
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "side must be positive and finite, got {side}"
            )));
        }
        Ok(Self { n, side })
    }

    /// Cells per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    /// Grid spacing `side / n`.
    pub fn h(&self) -> f64 {
        self.side / self.n as f64
    }

    /// Number of samples per component.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Area of one cell.
    pub fn cell_area(&self) -> f64 {
        let h = self.h();
        h * h
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    /// Cell-centre coordinates of sample `(i, j)`.
    #[inline]
    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        let h = self.h();
        [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]
    }

    /// Cell-centre coordinates of the sample at flat index `k`.
    #[inline]
    pub fn point_at(&self, k: usize) -> [f64; 2] {
        self.point(k % self.n, k / self.n)
    }

    /// Iterator over all cell centres in storage order.
    pub fn points(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        (0..self.len()).map(move |k| self.point_at(k))
    }

    /// Same grid with twice as many cells per axis.
    pub fn refined(&self) -> Self {
        Self {
            n: self.n * 2,
            side: self.side,
        }
    }

    pub(crate) fn ensure_same(&self, other: &PeriodicGrid, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{what}: {}x{} (side {}) vs {}x{} (side {})",
                self.n, self.n, self.side, other.n, other.n, other.side
            )))
        }
    }
}

fn check_finite(what: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite {
            what,
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// Real samples at the cell centres of a [`PeriodicGrid`]. Always finite.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: PeriodicGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        check_finite("scalar field", &values)?;
        Ok(Self { grid, values })
    }

    /// Field sampled from `f(x, y)` at every cell centre.
    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = grid.points().map(|[x, y]| f(x, y)).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: PeriodicGrid, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.len()])
    }

    /// Caller guarantees finiteness (results of linear maps of finite data).
    pub(crate) fn from_vec_unchecked(grid: PeriodicGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Pointwise map; fails if the map produces a non-finite value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.ensure_same(&other.grid, "zip_map")?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::new(self.grid, values)
    }

    /// `h² Σ values`: the periodic midpoint rule.
    pub fn integrate(&self) -> f64 {
        self.grid.cell_area() * self.values.iter().sum::<f64>()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Periodic bicubic (Lagrange, 4×4 stencil) interpolation at `p`.
    pub fn interpolate(&self, p: [f64; 2]) -> f64 {
        let n = self.grid.n as isize;
        let h = self.grid.h();
        // Cell-centre index coordinates.
        let gx = p[0] / h - 0.5;
        let gy = p[1] / h - 0.5;
        let ix = gx.floor();
        let iy = gy.floor();
        let wx = lagrange4(gx - ix);
        let wy = lagrange4(gy - iy);
        let (ix, iy) = (ix as isize, iy as isize);
        let mut acc = 0.0;
        for (b, wyb) in wy.iter().enumerate() {
            let j = (iy + b as isize - 1).rem_euclid(n) as usize;
            let row = &self.values[j * self.grid.n..(j + 1) * self.grid.n];
            let mut line = 0.0;
            for (a, wxa) in wx.iter().enumerate() {
                let i = (ix + a as isize - 1).rem_euclid(n) as usize;
                line += wxa * row[i];
            }
            acc += wyb * line;
        }
        acc
    }
}

/// Cubic Lagrange weights for nodes -1, 0, 1, 2 at offset `t ∈ [0, 1)`.
fn lagrange4(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// Two-component field on a [`PeriodicGrid`]. Always finite.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: PeriodicGrid,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl VectorField {
    pub fn new(grid: PeriodicGrid, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != grid.len() || y.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples per component, got {} and {}",
                grid.len(),
                x.len(),
                y.len()
            )));
        }
        check_finite("vector field (x)", &x)?;
        check_finite("vector field (y)", &y)?;
        Ok(Self { grid, x, y })
    }

    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64, f64) -> [f64; 2]) -> Result<Self> {
        let (x, y) = grid.points().map(|[px, py]| f(px, py)).map(|v| (v[0], v[1])).unzip();
        Self::new(grid, x, y)
    }

    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self {
            grid,
            x: vec![0.0; grid.len()],
            y: vec![0.0; grid.len()],
        }
    }

    pub(crate) fn from_vecs_unchecked(grid: PeriodicGrid, x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { grid, x, y }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    #[inline]
    pub fn at(&self, k: usize) -> [f64; 2] {
        [self.x[k], self.y[k]]
    }

    pub fn component(&self, axis: usize) -> ScalarField {
        let values = if axis == 0 { self.x.clone() } else { self.y.clone() };
        ScalarField::from_vec_unchecked(self.grid, values)
    }

    /// Pointwise Euclidean norm.
    pub fn norm(&self) -> ScalarField {
        let values = self.x.iter().zip(&self.y).map(|(a, b)| a.hypot(*b)).collect();
        ScalarField::from_vec_unchecked(self.grid, values)
    }

    /// Pointwise dot product.
    pub fn dot(&self, other: &VectorField) -> Result<ScalarField> {
        self.grid.ensure_same(&other.grid, "dot")?;
        let values = (0..self.grid.len())
            .map(|k| self.x[k] * other.x[k] + self.y[k] * other.y[k])
            .collect();
        ScalarField::new(self.grid, values)
    }

    pub fn interpolate(&self, p: [f64; 2]) -> [f64; 2] {
        [self.component(0).interpolate(p), self.component(1).interpolate(p)]
    }
}

/// Coordinate difference reduced to the periodic cell `[-side/2, side/2]`.
#[inline]
pub fn wrap_periodic(d: f64, side: f64) -> f64 {
    d - side * (d / side).round()
}
