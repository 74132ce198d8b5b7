//! Uniform cell-centered grids and the fields sampled on them.
//!
//! Samples sit at cell centers `origin + (i + 1/2) h`. Values are stored
//! row-major with axis 0 slowest; two-dimensional grids keep a dummy third
//! axis of length one so index arithmetic is shared.

mod io;
mod voxel;

pub use io::{read_field, write_field, FieldFile};
pub use voxel::{
    dilate_set, indicator_ball, indicator_cube, surface_measure, Face, SurfaceMeasure, VoxelSet,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

/// A box grid with `n[a]` cells of width `extent[a] / n[a]` along each axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    origin: [f64; MAX_DIM],
    extent: [f64; MAX_DIM],
    n: [usize; MAX_DIM],
}

impl Grid {
    pub fn new(origin: &[f64], extent: &[f64], n: &[usize]) -> Result<Self> {
        let dim = origin.len();
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidGrid(format!(
                "dimension {dim} not supported (2 or 3)"
            )));
        }
        if extent.len() != dim || n.len() != dim {
            return Err(Error::InvalidGrid(
                "origin, extent and n must have the same length".into(),
            ));
        }
        let mut g = Grid {
            dim,
            origin: [0.0; MAX_DIM],
            extent: [1.0; MAX_DIM],
            n: [1; MAX_DIM],
        };
        for a in 0..dim {
            if !(extent[a] > 0.0) || !extent[a].is_finite() || !origin[a].is_finite() {
                return Err(Error::InvalidGrid(format!(
                    "axis {a}: extent must be positive and finite"
                )));
            }
            if n[a] < 2 {
                return Err(Error::InvalidGrid(format!(
                    "axis {a}: need at least 2 cells, got {}",
                    n[a]
                )));
            }
            g.origin[a] = origin[a];
            g.extent[a] = extent[a];
            g.n[a] = n[a];
        }
        Ok(g)
    }

    /// The cube `[lo, hi]^dim` with `n` cells per axis.
    pub fn uniform(dim: usize, lo: f64, hi: f64, n: usize) -> Result<Self> {
        Grid::new(&vec![lo; dim], &vec![hi - lo; dim], &vec![n; dim])
    }

    /// Cube grid with spacing `h` whose cell centers include the point `c`.
    pub fn centered_on(dim: usize, c: &[f64], half_cells: usize, h: f64) -> Result<Self> {
        let n = 2 * half_cells + 1;
        let origin: Vec<f64> = c.iter().map(|ci| ci - (half_cells as f64 + 0.5) * h).collect();
        Grid::new(&origin, &vec![n as f64 * h; dim], &vec![n; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.dim]
    }

    pub fn extent(&self) -> &[f64] {
        &self.extent[..self.dim]
    }

    pub fn shape(&self) -> &[usize] {
        &self.n[..self.dim]
    }

    pub(crate) fn shape3(&self) -> [usize; MAX_DIM] {
        self.n
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.extent[axis] / self.n[axis] as f64
    }

    pub fn spacings(&self) -> Vec<f64> {
        (0..self.dim).map(|a| self.spacing(a)).collect()
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    /// Euclidean length of a cell diagonal.
    pub fn cell_diagonal(&self) -> f64 {
        (0..self.dim)
            .map(|a| self.spacing(a).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn diameter(&self) -> f64 {
        self.extent().iter().map(|e| e * e).sum::<f64>().sqrt()
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        let mut r = 0;
        for a in 0..MAX_DIM {
            let i = if a < idx.len() { idx[a] } else { 0 };
            r = r * self.n[a] + i;
        }
        r
    }

    pub fn unravel(&self, mut lin: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        for a in (0..MAX_DIM).rev() {
            out[a] = lin % self.n[a];
            lin /= self.n[a];
        }
        out
    }

    /// Center of the cell with multi-index `idx`.
    pub fn center_of(&self, idx: &[usize]) -> [f64; MAX_DIM] {
        let mut c = [0.0; MAX_DIM];
        for a in 0..self.dim {
            c[a] = self.origin[a] + (idx[a] as f64 + 0.5) * self.spacing(a);
        }
        c
    }

    pub fn center(&self, lin: usize) -> [f64; MAX_DIM] {
        self.center_of(&self.unravel(lin))
    }

    /// Index of the cell containing `x`, if inside the box.
    pub fn locate(&self, x: &[f64]) -> Option<[usize; MAX_DIM]> {
        let mut out = [0; MAX_DIM];
        for a in 0..self.dim {
            let u = (x[a] - self.origin[a]) / self.spacing(a);
            if !(u >= 0.0) || u >= self.n[a] as f64 {
                return None;
            }
            out[a] = u.floor() as usize;
        }
        Some(out)
    }

    /// Number of cells from `idx` to the nearest grid edge (0 for edge cells).
    pub fn edge_distance(&self, idx: &[usize]) -> usize {
        (0..self.dim)
            .map(|a| idx[a].min(self.n[a] - 1 - idx[a]))
            .min()
            .unwrap_or(0)
    }

    /// Cells within `band` cells of the box edge.
    pub fn in_edge_band(&self, lin: usize, band: usize) -> bool {
        self.edge_distance(&self.unravel(lin)) < band
    }

    /// The grid of the set `{x : t x in box}`: origin and extent divided by `t`.
    pub fn dilate(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::param("t", t, "dilation factor must be positive"));
        }
        let origin: Vec<f64> = self.origin().iter().map(|o| o / t).collect();
        let extent: Vec<f64> = self.extent().iter().map(|e| e / t).collect();
        Grid::new(&origin, &extent, self.shape())
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(
                "fields live on different grids".into(),
            ));
        }
        Ok(())
    }
}

/// Real-valued samples on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Degenerate(format!("non-finite value at cell {i}")));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    /// Samples `f` at every cell center.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let d = grid.dim();
        let values = (0..grid.len()).map(|i| f(&grid.center(i)[..d])).collect();
        Self::new(grid, values)
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

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|v| f(*v)).collect())
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::from_raw(self.grid.clone(), self.values.iter().map(|v| a * v).collect())
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &ScalarField, b: f64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self::from_raw(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        ))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Integral by the midpoint rule.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }
}

/// `d`-vector samples on a grid, one array per component.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    components: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn new(grid: Grid, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.len() != grid.dim() {
            return Err(Error::InvalidGrid(format!(
                "expected {} components, got {}",
                grid.dim(),
                components.len()
            )));
        }
        for c in &components {
            if c.len() != grid.len() {
                return Err(Error::InvalidGrid("component length mismatch".into()));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::Degenerate("non-finite vector component".into()));
            }
        }
        Ok(Self { grid, components })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn component(&self, a: usize) -> &[f64] {
        &self.components[a]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    /// Pointwise Euclidean norm.
    pub fn magnitude(&self) -> ScalarField {
        let n = self.grid.len();
        let vals = (0..n)
            .map(|i| {
                self.components
                    .iter()
                    .map(|c| c[i] * c[i])
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        ScalarField::from_raw(self.grid.clone(), vals)
    }

    pub fn combine(&self, a: f64, other: &VectorField, b: f64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let comps = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect())
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            components: comps,
        })
    }
}

/// Relative L2 distance `|a - b| / |b|` over the cells selected by `keep`.
pub fn l2_relative(a: &[f64], b: &[f64], keep: impl Fn(usize) -> bool) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..a.len() {
        if keep(i) {
            num += (a[i] - b[i]).powi(2);
            den += b[i] * b[i];
        }
    }
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (num / den).sqrt()
    }
}

/// `max |a - b| / max |b|`.
pub fn sup_relative(a: &[f64], b: &[f64]) -> f64 {
    let num = a
        .iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let den = b.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// The smooth bump `exp(-1 / (1 - |x - c|^2 / r^2))` inside `B(c, r)`,
/// zero outside.
pub fn bump(grid: &Grid, center: &[f64], radius: f64) -> Result<ScalarField> {
    if !(radius > 0.0) {
        return Err(Error::param("radius", radius, "radius must be positive"));
    }
    ScalarField::from_fn(grid.clone(), |x| {
        let q = x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / (radius * radius);
        if q < 1.0 {
            (-1.0 / (1.0 - q)).exp()
        } else {
            0.0
        }
    })
}
