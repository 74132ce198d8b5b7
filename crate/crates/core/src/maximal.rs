//! Heat-kernel maximal functions of voxel sets and their boundaries.
//!
//! The supremum over `t > 0` is replaced by a maximum over a [`TimeGrid`].
//! For a voxel set `E` both `p_t * D chi_E` (through its faces) and
//! `grad p_t * chi_E` (through its cells) have exact closed forms in terms
//! of the error function, so the two are equal up to rounding.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField, SurfaceMeasure, VectorField, VoxelSet, MAX_DIM};
use crate::kernels::{gauss_interval, EXP_UNDERFLOW};
use crate::par;
use crate::spectral::{self, DEFAULT_PAD};

/// Strictly increasing, log-spaced heat times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t: Vec<f64>,
}

impl TimeGrid {
    pub const MIN_NODES: usize = 16;

    pub fn new(t_min: f64, t_max: f64, count: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_min < t_max && t_max.is_finite()) {
            return Err(Error::param("t_min", t_min, "need 0 < t_min < t_max"));
        }
        if count < Self::MIN_NODES {
            return Err(Error::param("count", count as f64, "need at least 16 times"));
        }
        let (a, b) = (t_min.ln(), t_max.ln());
        let t = (0..count)
            .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
            .collect();
        Ok(Self { t })
    }

    /// `[h^2/4, 4 diam^2]` with `per_decade` nodes per decade.
    pub fn for_grid(grid: &Grid, per_decade: usize) -> Result<Self> {
        let h = grid.spacings().into_iter().fold(f64::INFINITY, f64::min);
        let (lo, hi) = (0.25 * h * h, 4.0 * grid.diameter().powi(2));
        let decades = (hi / lo).log10();
        let count = ((decades * per_decade as f64).ceil() as usize + 1).max(Self::MIN_NODES);
        Self::new(lo, hi, count)
    }

    /// Inserts the log-midpoint between neighbours; every old node is kept.
    pub fn refined(&self) -> Self {
        let mut t = Vec::with_capacity(2 * self.t.len() - 1);
        for w in self.t.windows(2) {
            t.push(w[0]);
            t.push((w[0] * w[1]).sqrt());
        }
        t.push(*self.t.last().unwrap());
        Self { t }
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn decades(&self) -> f64 {
        (self.t[self.t.len() - 1] / self.t[0]).log10()
    }
}

/// One-dimensional heat kernel.
#[inline]
fn phi(x: f64, t: f64) -> f64 {
    let e = -x * x / (4.0 * t);
    if e < EXP_UNDERFLOW {
        0.0
    } else {
        e.exp() / (4.0 * PI * t).sqrt()
    }
}

/// `int p_t(x - y) nu(y) dH^(d-1)(y)` over the faces of `s`.
fn surface_heat_at(s: &SurfaceMeasure, t: f64, x: &[f64]) -> [f64; MAX_DIM] {
    let d = s.dim();
    let sigma = (2.0 * t).sqrt();
    let mut out = [0.0; MAX_DIM];
    for f in s.faces() {
        let n = phi(x[f.axis] - f.center[f.axis], t);
        if n == 0.0 {
            continue;
        }
        let mut v = n;
        for a in 0..d {
            if a != f.axis {
                v *= gauss_interval(x[a] - f.center[a], f.half[a], sigma);
            }
        }
        out[f.axis] += f.sign * v;
    }
    out
}

fn ensure_dim(s: &SurfaceMeasure, grid: &Grid) -> Result<()> {
    if s.dim() != grid.dim() {
        return Err(Error::GridMismatch("surface and grid dimensions differ".into()));
    }
    Ok(())
}

/// `p_t * nu H^(d-1)` at every cell center; equals `-p_t * D chi_E` when
/// `s` is the boundary of `E`.
pub fn heat_surface(s: &SurfaceMeasure, grid: &Grid, t: f64) -> Result<VectorField> {
    ensure_dim(s, grid)?;
    if !(t > 0.0) {
        return Err(Error::param("t", t, "heat time must be positive"));
    }
    let merged = s.merged();
    let d = grid.dim();
    let pts = par::map(grid.len(), |i| surface_heat_at(&merged, t, &grid.center(i)));
    let comps = (0..d).map(|a| pts.iter().map(|p| p[a]).collect()).collect();
    VectorField::new(grid.clone(), comps)
}

/// `max_t |p_t * D chi_E|` on the cell centers of `grid`, by direct sums
/// over the faces of `s`.
pub fn heat_maximal_surface(s: &SurfaceMeasure, grid: &Grid, tg: &TimeGrid) -> Result<ScalarField> {
    ensure_dim(s, grid)?;
    let merged = s.merged();
    let d = grid.dim();
    let out = par::map(grid.len(), |i| {
        let x = grid.center(i);
        tg.times()
            .iter()
            .map(|t| {
                let v = surface_heat_at(&merged, *t, &x);
                v[..d].iter().map(|c| c * c).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
    });
    Ok(ScalarField::from_raw(grid.clone(), out))
}

/// `t^(1/2) grad p_t * chi_E` at every cell center, with the kernel
/// integrated exactly over each cell of `E`.
pub fn heat_grad_set(e: &VoxelSet, t: f64) -> Result<VectorField> {
    if e.is_empty() {
        return Err(Error::Degenerate("empty set".into()));
    }
    if !(t > 0.0) {
        return Err(Error::param("t", t, "heat time must be positive"));
    }
    let grid = e.grid();
    let d = grid.dim();
    let shape = grid.shape3();
    let hs = grid.spacings();
    let sigma = (2.0 * t).sqrt();
    let rt = t.sqrt();
    let reach: Vec<usize> = (0..d).map(|a| shape[a] * DEFAULT_PAD).collect();
    // cell[a][|o|] and diff[a][o + reach]: cell mass and derivative kernels.
    let cell: Vec<Vec<f64>> = (0..d)
        .map(|a| {
            (0..=reach[a])
                .map(|o| gauss_interval(o as f64 * hs[a], 0.5 * hs[a], sigma))
                .collect()
        })
        .collect();
    let diff: Vec<Vec<f64>> = (0..d)
        .map(|a| {
            (0..=2 * reach[a])
                .map(|k| {
                    let o = k as f64 - reach[a] as f64;
                    phi((o + 0.5) * hs[a], t) - phi((o - 0.5) * hs[a], t)
                })
                .collect()
        })
        .collect();
    let vals = e.indicator().into_values();
    let mut comps = Vec::with_capacity(d);
    for k in 0..d {
        let c = spectral::convolve(grid, &vals, DEFAULT_PAD, |o| {
            let mut v = rt;
            for a in 0..d {
                v *= if a == k {
                    diff[a][(o[a] + reach[a] as isize) as usize]
                } else {
                    cell[a][o[a].unsigned_abs()]
                };
            }
            v
        })?;
        comps.push(c);
    }
    VectorField::new(grid.clone(), comps)
}

/// `max_t |t^(1/2) grad p_t * chi_E|` over the cell centers of `E`'s grid.
pub fn heat_grad_maximal_set(e: &VoxelSet, tg: &TimeGrid) -> Result<ScalarField> {
    if e.is_empty() {
        return Err(Error::Degenerate("empty set".into()));
    }
    let mut best = vec![0.0f64; e.grid().len()];
    for t in tg.times() {
        let m = heat_grad_set(e, *t)?.magnitude();
        for (b, v) in best.iter_mut().zip(m.values()) {
            *b = b.max(*v);
        }
    }
    Ok(ScalarField::from_raw(e.grid().clone(), best))
}
