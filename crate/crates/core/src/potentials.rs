//! Riesz potentials and the operators built on them.
//!
//! `I_a f` has three grid paths that share one discrete kernel:
//! [`riesz_direct`] (O(N^2) reference sum), [`riesz_fft`] (the same sum by
//! zero-padded transform) and [`riesz_heat`] (the heat-semigroup integral
//! in log time). The discrete kernel at a cell offset is the integral of
//! `|x|^(a-d) / gamma(a)` over that cell: exact near the origin (including
//! the singular self cell), corrected midpoint rule further out.
//!
//! Surface potentials of oriented face sets are evaluated pointwise by
//! adaptive quadrature ([`riesz_surface`]). A [`SurfaceMeasure`] carries
//! exterior normals, so its potential is `-I_a D chi_E`.

use std::f64::consts::PI;

use serde_json::json;
use statrs::function::gamma::{gamma, gamma_lr};

use crate::error::{Error, Result};
use crate::fields::{l2_relative, Grid, ScalarField, SurfaceMeasure, VectorField, MAX_DIM};
use crate::kernels::{gamma_norm, gauss_interval, KernelParams};
use crate::par;
use crate::quadrature::{adaptive_box, adaptive_box_split, GaussLegendre, Tolerance};
use crate::report::{num, Report, Table};
use crate::spectral::{self, DEFAULT_PAD};

/// Width in cells of the margin where differentiated fields use one-sided
/// stencils. Norms and inequality checks skip it.
pub const EDGE_BAND: usize = 2;

/// Tolerance of [`semigroup_check`] on the L2-relative deviation.
pub const SEMIGROUP_TOL: f64 = 0.02;

/// Relative accuracy of each face integral in [`riesz_surface`].
const SURFACE_TOL: f64 = 1e-9;

/// `int |y|^(alpha - d) dy` over the box `prod [-h_a/2, h_a/2]`.
///
/// Uses `div(y |y|^(alpha-d)) = alpha |y|^(alpha-d)`, which turns the
/// singular volume integral into smooth integrals over the faces.
pub fn self_cell_integral(h: &[f64], alpha: f64) -> Result<f64> {
    let d = h.len();
    let p = KernelParams::new(d, alpha)?;
    if h.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidGrid("cell sides must be positive".into()));
    }
    let e = p.exponent();
    let rule = GaussLegendre::new(8);
    let mut total = 0.0;
    for a in 0..d {
        let c = 0.5 * h[a];
        let hi: Vec<f64> = (0..d).filter(|b| *b != a).map(|b| 0.5 * h[b]).collect();
        let lo = vec![0.0; d - 1];
        let mut f = |z: &[f64]| (c * c + z.iter().map(|v| v * v).sum::<f64>()).powf(0.5 * e);
        let quarter = adaptive_box(&rule, &lo, &hi, &mut f, Tolerance { rel: 1e-14, abs: 0.0 });
        // Two opposite faces, each made of 2^(d-1) copies of `quarter`,
        // with y . nu = h_a / 2.
        total += 2.0 * c * (1u32 << (d - 1)) as f64 * quarter;
    }
    Ok(total / alpha)
}

/// Offsets with all `|o_a| <= NEAR` use exact cell integrals of the kernel.
const NEAR: usize = 6;

/// `int |y|^(alpha - d) dy` over `prod [0, a_b]`: by the divergence identity
/// only the faces opposite the origin contribute, and they stay away from
/// the singularity.
fn corner_box_integral(a: &[f64], alpha: f64, rule: &GaussLegendre) -> f64 {
    let d = a.len();
    let e = 0.5 * (alpha - d as f64);
    let mut total = 0.0;
    for k in 0..d {
        let c = a[k];
        let hi: Vec<f64> = (0..d).filter(|b| *b != k).map(|b| a[b]).collect();
        let lo = vec![0.0; d - 1];
        let mut f = |z: &[f64]| (c * c + z.iter().map(|v| v * v).sum::<f64>()).powf(e);
        total += c * adaptive_box(rule, &lo, &hi, &mut f, Tolerance { rel: 1e-14, abs: 0.0 });
    }
    total / alpha
}

/// The discrete Riesz kernel of a grid on integer cell offsets: the
/// integral of `gamma(alpha)^-1 |y|^(alpha-d)` over the cell at offset `o`.
/// Near offsets are integrated exactly; far offsets use the tensor
/// 3-point Gauss rule, accurate to about `1e-7` relative at `NEAR` cells.
struct CellKernel {
    d: usize,
    h: [f64; MAX_DIM],
    exponent: f64,
    scale: f64,
    near: Vec<f64>,
}

/// 3-point Gauss-Legendre nodes on `[-1/2, 1/2]` and weights summing to one.
const GL3: [(f64, f64); 3] = [
    (-0.387_298_334_620_741_7, 5.0 / 18.0),
    (0.0, 8.0 / 18.0),
    (0.387_298_334_620_741_7, 5.0 / 18.0),
];

impl CellKernel {
    fn new(grid: &Grid, alpha: f64) -> Result<Self> {
        let d = grid.dim();
        let p = KernelParams::new(d, alpha)?;
        let g = gamma_norm(p);
        let hs = grid.spacings();
        let mut h = [0.0; MAX_DIM];
        h[..d].copy_from_slice(&hs);
        let rule = GaussLegendre::new(8);
        let m = NEAR + 1;
        let count = m.pow(d as u32);
        let idx = |k: &[usize]| k.iter().fold(0, |acc, v| acc * m + v);
        let unidx = |mut lin: usize| {
            let mut k = [0usize; MAX_DIM];
            for a in (0..d).rev() {
                k[a] = lin % m;
                lin /= m;
            }
            k
        };
        // Corner integrals F(k) over prod [0, (k_b + 1/2) h_b].
        let corner: Vec<f64> = (0..count)
            .map(|lin| {
                let k = unidx(lin);
                let a: Vec<f64> = (0..d).map(|b| (k[b] as f64 + 0.5) * hs[b]).collect();
                corner_box_integral(&a, alpha, &rule)
            })
            .collect();
        // Cell [(o - 1/2) h, (o + 1/2) h] per axis is F(o) - F(o - 1), or
        // twice F(0) when o = 0; expand the product by inclusion-exclusion.
        let near = (0..count)
            .map(|lin| {
                let o = unidx(lin);
                let mut acc = 0.0;
                for mask in 0..(1usize << d) {
                    let mut coef = 1.0;
                    let mut k = [0usize; MAX_DIM];
                    let mut skip = false;
                    for a in 0..d {
                        let lower = (mask >> a) & 1 == 1;
                        if o[a] == 0 {
                            if lower {
                                skip = true;
                                break;
                            }
                            coef *= 2.0;
                            k[a] = 0;
                        } else if lower {
                            coef = -coef;
                            k[a] = o[a] - 1;
                        } else {
                            k[a] = o[a];
                        }
                    }
                    if !skip {
                        acc += coef * corner[idx(&k[..d])];
                    }
                }
                acc / g
            })
            .collect();
        Ok(Self {
            d,
            h,
            exponent: p.exponent(),
            scale: grid.cell_volume() / g,
            near,
        })
    }

    #[inline]
    fn at(&self, o: [isize; MAX_DIM]) -> f64 {
        let m = NEAR + 1;
        if (0..self.d).all(|a| o[a].unsigned_abs() <= NEAR) {
            let lin = (0..self.d).fold(0, |acc, a| acc * m + o[a].unsigned_abs());
            return self.near[lin];
        }
        let e = 0.5 * self.exponent;
        let x: [f64; MAX_DIM] = std::array::from_fn(|a| o[a] as f64 * self.h[a]);
        let mut acc = 0.0;
        let n2 = if self.d == 3 { 3 } else { 1 };
        for (u0, w0) in GL3 {
            let y0 = (x[0] + u0 * self.h[0]).powi(2);
            for (u1, w1) in GL3 {
                let y1 = y0 + (x[1] + u1 * self.h[1]).powi(2);
                for &(u2, w2) in &GL3[..n2] {
                    let (y2, w2) = if self.d == 3 {
                        ((x[2] + u2 * self.h[2]).powi(2), w2)
                    } else {
                        (0.0, 1.0)
                    };
                    acc += w0 * w1 * w2 * (y1 + y2).powf(e);
                }
            }
        }
        acc * self.scale
    }
}

fn offset(a: [usize; MAX_DIM], b: [usize; MAX_DIM]) -> [isize; MAX_DIM] {
    [
        a[0] as isize - b[0] as isize,
        a[1] as isize - b[1] as isize,
        a[2] as isize - b[2] as isize,
    ]
}

/// Reference O(N^2) Riesz potential at every cell center.
pub fn riesz_direct(f: &ScalarField, alpha: f64) -> Result<ScalarField> {
    let grid = f.grid();
    let k = CellKernel::new(grid, alpha)?;
    let src: Vec<(usize, [usize; MAX_DIM])> = f
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(j, _)| (j, grid.unravel(j)))
        .collect();
    let vals = f.values();
    let out = par::map(grid.len(), |i| {
        let ii = grid.unravel(i);
        src.iter().map(|(j, jj)| k.at(offset(ii, *jj)) * vals[*j]).sum()
    });
    Ok(ScalarField::from_raw(grid.clone(), out))
}

/// Reference Riesz potential at the single cell `lin`.
pub fn riesz_direct_at(f: &ScalarField, alpha: f64, lin: usize) -> Result<f64> {
    let grid = f.grid();
    if lin >= grid.len() {
        return Err(Error::InvalidGrid(format!("cell {lin} out of range")));
    }
    let k = CellKernel::new(grid, alpha)?;
    let ii = grid.unravel(lin);
    Ok(f.values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(j, v)| k.at(offset(ii, grid.unravel(j))) * v)
        .sum())
}

/// Riesz potential by transform convolution with the default padding.
pub fn riesz_fft(f: &ScalarField, alpha: f64) -> Result<ScalarField> {
    riesz_fft_padded(f, alpha, DEFAULT_PAD)
}

/// Riesz potential by transform convolution; `pad` is the per-axis padding
/// factor (at least 2).
pub fn riesz_fft_padded(f: &ScalarField, alpha: f64, pad: usize) -> Result<ScalarField> {
    let grid = f.grid();
    let k = CellKernel::new(grid, alpha)?;
    let out = spectral::convolve(grid, f.values(), pad, |o| k.at(o))?;
    Ok(ScalarField::from_raw(grid.clone(), out))
}

/// Log-spaced trapezoid rule for `int_0^inf g(t) dt` over `[t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemigroupQuadrature {
    t_min: f64,
    t_max: f64,
    m: usize,
}

impl SemigroupQuadrature {
    pub fn new(t_min: f64, t_max: f64, m: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_max.is_finite()) {
            return Err(Error::param("t_min", t_min, "time range must be positive and finite"));
        }
        if !(t_min < t_max) {
            return Err(Error::param("t_max", t_max, "t_max must exceed t_min"));
        }
        if m < 8 {
            return Err(Error::param("m", m as f64, "need at least 8 nodes"));
        }
        Ok(Self { t_min, t_max, m })
    }

    /// Range `[h_min^2 / 100, diam^2]` with `m` nodes. Below `h^2 / 100`
    /// the heat kernel keeps all but `1e-6` of its mass in one cell.
    pub fn for_grid(grid: &Grid, m: usize) -> Result<Self> {
        let h = grid.spacings().into_iter().fold(f64::INFINITY, f64::min);
        Self::new(h * h / 100.0, grid.diameter().powi(2), m)
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `(t_k, w_k)` such that `int g(t) dt ~ sum_k w_k t_k g(t_k)`; the
    /// weights are trapezoid weights in `tau = ln t`.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let (a, b) = (self.t_min.ln(), self.t_max.ln());
        let step = (b - a) / (self.m - 1) as f64;
        (0..self.m)
            .map(|k| {
                let w = if k == 0 || k == self.m - 1 { 0.5 * step } else { step };
                ((a + k as f64 * step).exp(), w)
            })
            .collect()
    }

    pub fn covers(&self, grid: &Grid) -> bool {
        let h = grid.spacings().into_iter().fold(f64::INFINITY, f64::min);
        self.t_min <= h * h * (1.0 + 1e-12) && self.t_max >= grid.diameter().powi(2) * (1.0 - 1e-12)
    }
}

/// Riesz potential as the semigroup integral
/// `Gamma(a/2)^-1 int t^(a/2 - 1) p_t * f dt`.
///
/// Node terms use the heat kernel integrated over each cell. The piece
/// below `t_min` is taken as `t_min^(a/2) / (a/2)` times the identity and
/// the piece above `t_max` in closed form through the incomplete gamma
/// function, so the result differs from [`riesz_fft`] by quadrature error
/// only. All terms are summed into one kernel and applied with a single
/// padded convolution.
pub fn riesz_heat(f: &ScalarField, alpha: f64, q: &SemigroupQuadrature) -> Result<ScalarField> {
    let grid = f.grid();
    let d = grid.dim();
    KernelParams::new(d, alpha)?;
    if !q.covers(grid) {
        return Err(Error::Precondition(format!(
            "quadrature range [{:e}, {:e}] does not cover [h^2, diam^2]",
            q.t_min, q.t_max
        )));
    }
    let nodes = q.nodes();
    let shape = grid.shape3();
    let hs = grid.spacings();
    let half_a = 0.5 * alpha;
    let pad = DEFAULT_PAD;
    // tables[k][a][|o|]: mass of p_{t_k} in the cell at offset o along axis a.
    let tables: Vec<Vec<Vec<f64>>> = nodes
        .iter()
        .map(|(t, _)| {
            let sigma = (2.0 * t).sqrt();
            (0..d)
                .map(|a| {
                    (0..=shape[a] * pad)
                        .map(|o| gauss_interval(o as f64 * hs[a], 0.5 * hs[a], sigma))
                        .collect()
                })
                .collect()
        })
        .collect();
    let coef: Vec<f64> = nodes.iter().map(|(t, w)| w * t.powf(half_a)).collect();
    let inv_g = 1.0 / gamma(half_a);
    let head = q.t_min.powf(half_a) / half_a;
    let ta = 0.5 * (d as f64 - alpha);
    let c0 = (4.0 * PI).powf(-0.5 * d as f64) * grid.cell_volume();
    let g_ta = gamma(ta);
    let tail = |r2: f64| {
        if r2 == 0.0 {
            c0 * q.t_max.powf(-ta) / ta
        } else {
            c0 * (0.25 * r2).powf(-ta) * g_ta * gamma_lr(ta, 0.25 * r2 / q.t_max)
        }
    };
    let kernel = |o: [isize; MAX_DIM]| {
        let mut s = 0.0;
        for (k, c) in coef.iter().enumerate() {
            let mut p = *c;
            for a in 0..d {
                p *= tables[k][a][o[a].unsigned_abs()];
            }
            s += p;
        }
        let r2: f64 = (0..d).map(|a| (o[a] as f64 * hs[a]).powi(2)).sum();
        s += tail(r2);
        if o == [0; MAX_DIM] {
            s += head;
        }
        s * inv_g
    };
    let out = spectral::convolve(grid, f.values(), pad, kernel)?;
    Ok(ScalarField::from_raw(grid.clone(), out))
}

fn check_order(d: usize, v: f64) -> Result<()> {
    KernelParams::new(d, v).map(|_| ())
}

/// Zero extension of `f` to a centered grid `factor` times larger per axis,
/// with the cell offset of the original box.
fn extend(f: &ScalarField, factor: usize) -> Result<(ScalarField, [usize; MAX_DIM])> {
    let g = f.grid();
    let d = g.dim();
    let shape = g.shape3();
    let mut off = [0usize; MAX_DIM];
    let mut n = Vec::with_capacity(d);
    let mut origin = Vec::with_capacity(d);
    let mut extent = Vec::with_capacity(d);
    for a in 0..d {
        let h = g.spacing(a);
        off[a] = shape[a] * (factor - 1) / 2;
        n.push(shape[a] * factor);
        origin.push(g.origin()[a] - off[a] as f64 * h);
        extent.push((shape[a] * factor) as f64 * h);
    }
    let big = Grid::new(&origin, &extent, &n)?;
    let mut vals = vec![0.0; big.len()];
    for (lin, v) in f.values().iter().enumerate() {
        let i = g.unravel(lin);
        vals[big.ravel(&[i[0] + off[0], i[1] + off[1], i[2] + off[2]][..d])] = *v;
    }
    Ok((ScalarField::from_raw(big, vals), off))
}

fn restrict(big: &ScalarField, grid: &Grid, off: [usize; MAX_DIM]) -> ScalarField {
    let d = grid.dim();
    let vals = (0..grid.len())
        .map(|lin| {
            let i = grid.unravel(lin);
            big.values()[big.grid().ravel(&[i[0] + off[0], i[1] + off[1], i[2] + off[2]][..d])]
        })
        .collect();
    ScalarField::from_raw(grid.clone(), vals)
}

/// Compares `I_beta I_alpha f` with `I_(alpha+beta) f` and reports the
/// L2-relative deviation on the grid of `f`. Both sides use
/// [`riesz_fft`] on the zero extension of `f` to a box `pad` times larger,
/// so the intermediate potential keeps its tail out to that box.
pub fn semigroup_check(f: &ScalarField, alpha: f64, beta: f64, pad: usize) -> Result<Report> {
    let d = f.grid().dim();
    check_order(d, alpha)?;
    check_order(d, beta)?;
    check_order(d, alpha + beta)?;
    if pad < 1 {
        return Err(Error::param("pad", pad as f64, "extension factor must be at least 1"));
    }
    let (big, off) = extend(f, pad)?;
    let lhs = riesz_fft(&riesz_fft(&big, alpha)?, beta)?;
    let rhs = riesz_fft(&big, alpha + beta)?;
    let lhs = restrict(&lhs, f.grid(), off);
    let rhs = restrict(&rhs, f.grid(), off);
    let dev = l2_relative(lhs.values(), rhs.values(), |_| true);
    let mut r = Report::new("semigroup");
    r.input("alpha", alpha)
        .input("beta", beta)
        .input("pad", pad)
        .input("grid", json!(f.grid().shape()));
    let mut t = Table::new("deviation", &["alpha", "beta", "l2_relative"]);
    t.push(vec![num(alpha), num(beta), num(dev)]);
    r.tables.push(t);
    r.check(
        "semigroup",
        dev < SEMIGROUP_TOL,
        format!("L2-relative deviation {dev:.3e} (tolerance {SEMIGROUP_TOL})"),
    );
    Ok(r)
}

/// Central-difference gradient; the outermost cells use one-sided
/// differences.
pub fn gradient(f: &ScalarField) -> VectorField {
    let grid = f.grid();
    let d = grid.dim();
    let shape = grid.shape3();
    let v = f.values();
    let comps = (0..d)
        .map(|a| {
            let h = grid.spacing(a);
            let stride: usize = shape[a + 1..].iter().product();
            let n = shape[a];
            (0..grid.len())
                .map(|lin| {
                    let i = (lin / stride) % n;
                    if i == 0 {
                        (v[lin + stride] - v[lin]) / h
                    } else if i == n - 1 {
                        (v[lin] - v[lin - stride]) / h
                    } else {
                        (v[lin + stride] - v[lin - stride]) / (2.0 * h)
                    }
                })
                .collect()
        })
        .collect();
    VectorField::new(grid.clone(), comps).expect("gradient has grid shape")
}

/// `D^alpha u = grad I_(1 - alpha) u` for `0 < alpha < 1`. Values within
/// [`EDGE_BAND`] cells of the box edge are less accurate.
pub fn frac_gradient(u: &ScalarField, alpha: f64) -> Result<VectorField> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::order(alpha, "fractional gradient needs order in (0, 1)"));
    }
    Ok(gradient(&riesz_fft(u, 1.0 - alpha)?))
}

/// Vector Riesz transform `grad I_1 u`.
pub fn riesz_transform(u: &ScalarField) -> Result<VectorField> {
    Ok(gradient(&riesz_fft(u, 1.0)?))
}

/// `(-Laplacian)^(s/2) u` as the multiplier `(2 pi |xi|)^s` (frequency `xi`
/// in cycles per unit length) on the padded transform grid.
pub fn frac_laplacian(u: &ScalarField, s: f64) -> Result<ScalarField> {
    frac_laplacian_padded(u, s, DEFAULT_PAD)
}

pub fn frac_laplacian_padded(u: &ScalarField, s: f64, pad: usize) -> Result<ScalarField> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::order(s, "fractional Laplacian needs order in (0, 1)"));
    }
    let out = spectral::apply_multiplier(u.grid(), u.values(), pad, |xi| {
        let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        (2.0 * PI * r).powf(s)
    })?;
    Ok(ScalarField::from_raw(u.grid().clone(), out))
}

/// Convolution with the Gaussian of standard deviation `sigma` per axis,
/// using the exact Gaussian mass of each cell.
pub fn gaussian_smooth(f: &ScalarField, sigma: f64) -> Result<ScalarField> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::param("sigma", sigma, "width must be positive"));
    }
    let grid = f.grid();
    let d = grid.dim();
    let hs = grid.spacings();
    let out = spectral::convolve(grid, f.values(), DEFAULT_PAD, |o| {
        (0..d)
            .map(|a| gauss_interval(o[a] as f64 * hs[a], 0.5 * hs[a], sigma))
            .product()
    })?;
    Ok(ScalarField::from_raw(grid.clone(), out))
}

/// `chi_B * rho_sigma` at `x` for the box `B = [lo, hi]` and the Gaussian
/// `rho_sigma` of standard deviation `sigma` per axis.
pub fn smoothed_box(x: &[f64], lo: &[f64], hi: &[f64], sigma: f64) -> f64 {
    x.iter()
        .zip(lo.iter().zip(hi))
        .map(|(xi, (l, h))| gauss_interval(xi - 0.5 * (l + h), 0.5 * (h - l), sigma))
        .product()
}

fn surface_diameter(s: &SurfaceMeasure) -> f64 {
    let d = s.dim();
    let mut lo = [f64::INFINITY; MAX_DIM];
    let mut hi = [f64::NEG_INFINITY; MAX_DIM];
    for f in s.faces() {
        for a in 0..d {
            lo[a] = lo[a].min(f.center[a] - f.half[a]);
            hi[a] = hi[a].max(f.center[a] + f.half[a]);
        }
    }
    (0..d).map(|a| (hi[a] - lo[a]).powi(2)).sum::<f64>().sqrt()
}

/// `int gamma(alpha)^-1 |x - y|^(alpha - d) nu(y) dH^(d-1)(y)` over the
/// faces of `s`, each face integrated adaptively to relative accuracy
/// `1e-9`.
pub fn riesz_surface(s: &SurfaceMeasure, alpha: f64, x: &[f64]) -> Result<Vec<f64>> {
    let d = s.dim();
    let p = KernelParams::new(d, alpha)?;
    if x.len() != d {
        return Err(Error::InvalidGrid("point dimension mismatch".into()));
    }
    let diam = surface_diameter(s);
    let dist = s.distance(x);
    if dist <= 1e-9 * diam {
        return Err(Error::Singular(format!(
            "point {x:?} lies on the surface (distance {dist:e})"
        )));
    }
    Ok(surface_potential(s, p, x, &GaussLegendre::new(6)))
}

fn surface_potential(s: &SurfaceMeasure, p: KernelParams, x: &[f64], rule: &GaussLegendre) -> Vec<f64> {
    let d = s.dim();
    let e = 0.5 * p.exponent();
    let mut out = vec![0.0; d];
    let tol = Tolerance { rel: SURFACE_TOL, abs: 0.0 };
    for face in s.faces() {
        let tang: Vec<usize> = (0..d).filter(|a| *a != face.axis).collect();
        let lo: Vec<f64> = tang.iter().map(|a| face.center[*a] - face.half[*a]).collect();
        let hi: Vec<f64> = tang.iter().map(|a| face.center[*a] + face.half[*a]).collect();
        let at: Vec<f64> = tang.iter().map(|a| x[*a]).collect();
        let n2 = (x[face.axis] - face.center[face.axis]).powi(2);
        let mut f = |z: &[f64]| {
            let r2 = n2 + z.iter().zip(&at).map(|(u, v)| (u - v).powi(2)).sum::<f64>();
            r2.powf(e)
        };
        out[face.axis] += face.sign * adaptive_box_split(rule, &lo, &hi, &at, &mut f, tol);
    }
    let g = gamma_norm(p);
    out.iter_mut().for_each(|v| *v /= g);
    out
}

/// [`riesz_surface`] at many points, in parallel.
pub fn riesz_surface_many(s: &SurfaceMeasure, alpha: f64, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = s.dim();
    let p = KernelParams::new(d, alpha)?;
    let diam = surface_diameter(s);
    for x in points {
        if x.len() != d {
            return Err(Error::InvalidGrid("point dimension mismatch".into()));
        }
        if s.distance(x) <= 1e-9 * diam {
            return Err(Error::Singular(format!("point {x:?} lies on the surface")));
        }
    }
    let rule = GaussLegendre::new(6);
    Ok(par::map(points.len(), |i| surface_potential(s, p, &points[i], &rule)))
}

/// Near- and far-face integrals `int_{[0,1]^(d-1)} (z^2 + |x' - y'|^2)^(-(d-1)/2) dy'`
/// with `z = s` and `z = 1 + s`.
pub fn cube_face_integrals(d: usize, xp: &[f64], s: f64) -> Result<(f64, f64)> {
    if !(2..=3).contains(&d) {
        return Err(Error::param("d", d as f64, "dimension must be 2 or 3"));
    }
    if xp.len() != d - 1 {
        return Err(Error::InvalidGrid("x' must have d - 1 coordinates".into()));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::param("s", s, "distance below the cube must be positive"));
    }
    let face = |z: f64| match d {
        2 => ((1.0 - xp[0]) / z).asinh() + (xp[0] / z).asinh(),
        _ => {
            let c = |a: f64, b: f64| a.signum() * b.signum() * corner_integral(a.abs(), b.abs(), z);
            let (u0, u1) = (-xp[0], 1.0 - xp[0]);
            let (v0, v1) = (-xp[1], 1.0 - xp[1]);
            c(u1, v1) - c(u0, v1) - c(u1, v0) + c(u0, v0)
        }
    };
    Ok((face(s), face(1.0 + s)))
}

/// `int_0^a int_0^b (z^2 + u^2 + v^2)^(-1) dv du` in polar coordinates about
/// the origin corner; the radial integral is exact.
fn corner_integral(a: f64, b: f64, z: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let rule = GaussLegendre::new(8);
    let tol = Tolerance { rel: 1e-13, abs: 0.0 };
    let wedge = |side: f64, top: f64| {
        let mut f = |t: &[f64]| 0.5 * (side / (z * t[0].cos())).powi(2).ln_1p();
        adaptive_box(&rule, &[0.0], &[top], &mut f, tol)
    };
    let phi = (b / a).atan();
    wedge(a, phi) + wedge(b, std::f64::consts::FRAC_PI_2 - phi)
}

/// Normal component of the unnormalized surface potential of `[0,1]^d` at
/// `(x', -s)`: far-face integral minus near-face integral. It is negative
/// below the cube and grows like `ln(1/s)` in magnitude for `x'` inside
/// the face. Dividing by `gamma(1)` gives the normal component of
/// [`riesz_surface`] with order 1.
pub fn face_integral_cube(d: usize, xp: &[f64], s: f64) -> Result<f64> {
    let (near, far) = cube_face_integrals(d, xp, s)?;
    Ok(far - near)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{indicator_cube, surface_measure, Face};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn self_cell_matches_polar_formula_in_2d() {
        // Square [-c, c]^2 in polar coordinates: (8/alpha) c^alpha int_0^(pi/4) cos^-alpha.
        for alpha in [0.3, 0.5, 0.7, 1.0, 1.5] {
            let c: f64 = 0.05;
            let polar = 8.0 / alpha * c.powf(alpha)
                * simpson(0.0, PI / 4.0, 2000, |t| t.cos().powf(-alpha));
            let w = self_cell_integral(&[2.0 * c, 2.0 * c], alpha).unwrap();
            assert_relative_eq!(w, polar, max_relative = 1e-10);
        }
    }

    #[test]
    fn self_cell_matches_self_similar_split_in_3d() {
        // W = (integral over the 26 outer thirds) + 3^-alpha W.
        for alpha in [0.4, 1.0, 2.2] {
            let rule = GaussLegendre::new(12);
            let h = 1.0 / 3.0;
            let mut outer = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        if (i, j, k) == (1, 1, 1) {
                            continue;
                        }
                        let lo = [-0.5 + i as f64 * h, -0.5 + j as f64 * h, -0.5 + k as f64 * h];
                        let hi = [lo[0] + h, lo[1] + h, lo[2] + h];
                        let mut f = |y: &[f64]| (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).powf(0.5 * (alpha - 3.0));
                        outer += adaptive_box(&rule, &lo, &hi, &mut f, Tolerance { rel: 1e-13, abs: 0.0 });
                    }
                }
            }
            let oracle = outer / (1.0 - 3f64.powf(-alpha));
            let w = self_cell_integral(&[1.0, 1.0, 1.0], alpha).unwrap();
            assert_relative_eq!(w, oracle, max_relative = 1e-9);
        }
    }

    #[test]
    fn cell_kernel_integrates_each_cell() {
        let g = Grid::new(&[0.0; 3], &[1.0, 1.5, 0.8], &[10, 12, 8]).unwrap();
        let alpha = 0.7;
        let k = CellKernel::new(&g, alpha).unwrap();
        let gn = crate::kernels::gamma_norm_checked(3, alpha).unwrap();
        let h = g.spacings();
        assert_relative_eq!(k.at([0; 3]), self_cell_integral(&h, alpha).unwrap() / gn, max_relative = 1e-12);
        let rule = GaussLegendre::new(10);
        for o in [[1isize, 0, 0], [2, -1, 3], [0, 6, -6], [7, 0, 1], [12, -9, 4]] {
            let lo: Vec<f64> = (0..3).map(|a| (o[a] as f64 - 0.5) * h[a]).collect();
            let hi: Vec<f64> = (0..3).map(|a| (o[a] as f64 + 0.5) * h[a]).collect();
            let mut f = |y: &[f64]| (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).powf(0.5 * (alpha - 3.0));
            // Cells touching the origin have an integrable corner singularity:
            // subtract the known corner boxes instead.
            let exact = if o.iter().any(|v| v.abs() <= 1) {
                k.at(o) * gn
            } else {
                adaptive_box(&rule, &lo, &hi, &mut f, Tolerance { rel: 1e-12, abs: 0.0 })
            };
            assert_relative_eq!(k.at(o) * gn, exact, max_relative = 1e-6);
        }
        // The kernel is even in every coordinate.
        assert_eq!(k.at([2, -3, 1]), k.at([-2, 3, -1]));
    }

    #[test]
    fn cell_kernel_touching_cell_in_2d() {
        // Cell [h/2, 3h/2] x [-h/2, h/2] in polar-free form: F(3h/2, h/2) - F(h/2, h/2), doubled.
        let g = Grid::uniform(2, 0.0, 1.0, 10).unwrap();
        let alpha = 0.5;
        let k = CellKernel::new(&g, alpha).unwrap();
        let gn = crate::kernels::gamma_norm_checked(2, alpha).unwrap();
        let h = 0.1;
        // Oracle: int over [h/2, 3h/2] of int_{-h/2}^{h/2} |y|^(alpha-2), inner
        // integral smooth since y0 >= h/2.
        let outer = simpson(0.5 * h, 1.5 * h, 4000, |x| {
            simpson(-0.5 * h, 0.5 * h, 400, |y| (x * x + y * y).powf(0.5 * (alpha - 2.0)))
        });
        assert_relative_eq!(k.at([1, 0, 0]) * gn, outer, max_relative = 1e-9);
    }

    fn random_field(grid: Grid, seed: u64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ScalarField::new(grid, vals).unwrap()
    }

    #[test]
    fn transform_path_matches_direct_sum() {
        let f = random_field(Grid::uniform(2, -1.0, 1.0, 32).unwrap(), 1);
        for alpha in [0.3, 1.0, 1.7] {
            let a = riesz_fft(&f, alpha).unwrap();
            let b = riesz_direct(&f, alpha).unwrap();
            assert!(crate::fields::sup_relative(a.values(), b.values()) < 1e-10);
        }
        let f = random_field(Grid::new(&[0.0; 3], &[1.0, 2.0, 1.0], &[8, 6, 5]).unwrap(), 2);
        let a = riesz_fft(&f, 0.8).unwrap();
        let b = riesz_direct(&f, 0.8).unwrap();
        assert!(crate::fields::sup_relative(a.values(), b.values()) < 1e-10);
    }

    #[test]
    fn ball_center_value() {
        for alpha in [0.3, 0.5, 0.7] {
            let r = 1.0;
            let g = Grid::centered_on(2, &[0.0, 0.0], 130, 1.0 / 128.0).unwrap();
            let ball = crate::fields::indicator_ball(&g, &[0.0, 0.0], r).unwrap().indicator();
            let center = g.ravel(&[130, 130]);
            let v = riesz_direct_at(&ball, alpha, center).unwrap();
            let exact = 2.0 * PI * r.powf(alpha) / alpha / gamma_norm_checked(alpha);
            assert_relative_eq!(v, exact, max_relative = 0.01);
        }
    }

    fn gamma_norm_checked(alpha: f64) -> f64 {
        crate::kernels::gamma_norm_checked(2, alpha).unwrap()
    }

    #[test]
    fn zero_and_positivity() {
        let g = Grid::uniform(2, 0.0, 1.0, 8).unwrap();
        assert!(riesz_fft(&ScalarField::zeros(g.clone()), 0.5).unwrap().is_zero());
        let f = random_field(g, 3).map(f64::abs).unwrap();
        assert!(riesz_direct(&f, 0.5).unwrap().min() >= 0.0);
        assert!(riesz_fft(&f, 0.5).unwrap().min() >= 0.0);
    }

    #[test]
    fn impulse_response_and_translation() {
        let g = Grid::uniform(2, 0.0, 1.0, 16).unwrap();
        let mut v = vec![0.0; g.len()];
        v[g.ravel(&[5, 6])] = 1.0;
        let a = riesz_fft(&ScalarField::new(g.clone(), v).unwrap(), 0.5).unwrap();
        let mut w = vec![0.0; g.len()];
        w[g.ravel(&[7, 9])] = 1.0;
        let b = riesz_fft(&ScalarField::new(g.clone(), w).unwrap(), 0.5).unwrap();
        let k = CellKernel::new(&g, 0.5).unwrap();
        for i in 0..9 {
            for j in 0..7 {
                let ai = a.values()[g.ravel(&[i, j])];
                let bi = b.values()[g.ravel(&[i + 2, j + 3])];
                assert!((ai - bi).abs() <= 1e-12 * ai.abs());
                let ki = k.at([i as isize - 5, j as isize - 6, 0]);
                assert!((ai - ki).abs() <= 1e-12 * ki);
            }
        }
    }

    #[test]
    fn dilation_scaling() {
        let lam: f64 = 2.5;
        let g = Grid::uniform(2, -1.0, 1.0, 16).unwrap();
        let f = ScalarField::from_fn(g.clone(), |x| (-4.0 * (x[0] * x[0] + x[1] * x[1])).exp()).unwrap();
        // f_lam(x) = f(lam x) lives on the grid shrunk by lam, with the same samples.
        let fl = ScalarField::new(g.dilate(lam).unwrap(), f.values().to_vec()).unwrap();
        let alpha = 0.6;
        let a = riesz_fft(&fl, alpha).unwrap();
        let b = riesz_fft(&f, alpha).unwrap().scale(lam.powf(-alpha));
        assert!(crate::fields::sup_relative(a.values(), b.values()) < 1e-12);
    }

    fn bump(grid: Grid, r: f64) -> ScalarField {
        ScalarField::from_fn(grid, |x| {
            let q = x.iter().map(|v| v * v).sum::<f64>() / (r * r);
            if q < 1.0 { (-1.0 / (1.0 - q)).exp() } else { 0.0 }
        })
        .unwrap()
    }

    #[test]
    fn heat_path_matches_transform_path() {
        let g = Grid::uniform(2, -1.0, 1.0, 64).unwrap();
        let f = bump(g.clone(), 0.5);
        let reference = riesz_fft(&f, 0.5).unwrap();
        let mut last = f64::INFINITY;
        for m in [16, 32, 64] {
            let q = SemigroupQuadrature::for_grid(&g, m).unwrap();
            let h = riesz_heat(&f, 0.5, &q).unwrap();
            let err = l2_relative(h.values(), reference.values(), |_| true);
            assert!(err < last, "m = {m}: {err} not below {last}");
            last = err;
        }
        assert!(last < 0.01, "{last}");
    }

    #[test]
    fn heat_path_precondition() {
        let g = Grid::uniform(2, 0.0, 1.0, 8).unwrap();
        let f = ScalarField::zeros(g.clone());
        let q = SemigroupQuadrature::new(1e-6, 0.1, 16).unwrap();
        assert!(matches!(riesz_heat(&f, 0.5, &q), Err(Error::Precondition(_))));
        let q = SemigroupQuadrature::for_grid(&g, 16).unwrap();
        assert!(riesz_heat(&f, 0.5, &q).unwrap().is_zero());
        assert!(SemigroupQuadrature::new(1.0, 0.5, 16).is_err());
        assert!(SemigroupQuadrature::new(0.1, 0.5, 4).is_err());
    }

    #[test]
    fn semigroup_on_padded_bump() {
        let g = Grid::uniform(2, -1.0, 1.0, 128).unwrap();
        let f = bump(g, 0.4);
        let r = semigroup_check(&f, 0.4, 0.4, 4).unwrap();
        let dev = r.table("deviation").unwrap().column("l2_relative").unwrap()[0];
        assert!(dev < SEMIGROUP_TOL, "{dev}");
        assert!(semigroup_check(&f, 1.2, 0.8, 2).is_err());
    }

    #[test]
    fn near_one_fractional_gradient_approaches_gradient() {
        let g = Grid::uniform(2, -1.0, 1.0, 64).unwrap();
        let f = ScalarField::from_fn(g.clone(), |x| (-(x[0] * x[0] + x[1] * x[1]) / 0.08).exp()).unwrap();
        let da = frac_gradient(&f, 0.99).unwrap();
        let gr = gradient(&f);
        let keep = |i: usize| !g.in_edge_band(i, EDGE_BAND);
        for a in 0..2 {
            let e = l2_relative(da.component(a), gr.component(a), keep);
            assert!(e < 0.05, "axis {a}: {e}");
        }
        assert!(frac_gradient(&f, 1.0).is_err());
    }

    #[test]
    fn fractional_gradient_of_constant_vanishes_at_center() {
        let g = Grid::uniform(2, -1.0, 1.0, 33).unwrap();
        let one = ScalarField::from_fn(g.clone(), |_| 1.0).unwrap();
        let d = frac_gradient(&one, 0.5).unwrap();
        let c = g.ravel(&[16, 16]);
        let m = d.magnitude().max_abs();
        assert!(d.component(0)[c].abs() < 1e-10 * m && d.component(1)[c].abs() < 1e-10 * m);
    }

    #[test]
    fn fractional_laplacian_inverts_potential() {
        let g = Grid::uniform(2, -1.0, 1.0, 128).unwrap();
        let u = bump(g.clone(), 0.4);
        let interior = |i: usize| g.center(i)[..2].iter().all(|v| v.abs() < 0.5);
        // The potential has a slowly decaying tail, so compute it on a
        // doubled box before applying the multiplier.
        let (big, off) = extend(&u, 2).unwrap();
        for s in [0.3, 0.5, 0.7] {
            let back = frac_laplacian(&riesz_fft(&big, s).unwrap(), s).unwrap();
            let back = restrict(&back, &g, off);
            let e = l2_relative(back.values(), u.values(), interior);
            assert!(e < 0.02, "s = {s}: {e}");
        }
        // Small order: the padded box must be large enough that losing the
        // zero mode costs little.
        let near = frac_laplacian_padded(&u, 0.01, 4).unwrap();
        assert!(l2_relative(near.values(), u.values(), |_| true) < 0.03);
        assert!(frac_laplacian(&u, 1.0).is_err());
    }

    #[test]
    fn riesz_transform_parity() {
        let g = Grid::uniform(2, -1.0, 1.0, 32).unwrap();
        let u = ScalarField::from_fn(g.clone(), |x| (-(x[0] - 0.2).powi(2) * 9.0 - x[1] * x[1] * 4.0).exp()).unwrap();
        let v = ScalarField::from_fn(g.clone(), |x| (-(-x[0] - 0.2).powi(2) * 9.0 - x[1] * x[1] * 4.0).exp()).unwrap();
        let (ru, rv) = (riesz_transform(&u).unwrap(), riesz_transform(&v).unwrap());
        for i in 0..32 {
            for j in 0..32 {
                let (p, q) = (g.ravel(&[i, j]), g.ravel(&[31 - i, j]));
                assert!((ru.component(0)[p] + rv.component(0)[q]).abs() < 1e-12);
                assert!((ru.component(1)[p] - rv.component(1)[q]).abs() < 1e-12);
            }
        }
    }

    fn unit_cube(d: usize) -> SurfaceMeasure {
        let g = Grid::uniform(d, -1.0, 2.0, 6).unwrap();
        surface_measure(&indicator_cube(&g, &vec![0.0; d], 1.0).unwrap()).unwrap().merged()
    }

    #[test]
    fn surface_potential_far_bound_and_symmetry() {
        for d in [2, 3] {
            let s = unit_cube(d);
            let mut x = vec![0.0; d];
            x[0] = 100.0;
            for alpha in [0.5, 1.0] {
                let v = riesz_surface(&s, alpha, &x).unwrap();
                let m = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                let g = crate::kernels::gamma_norm_checked(d, alpha).unwrap();
                assert!(m <= s.mass() / g * 99f64.powf(alpha - d as f64) * 1.01);
            }
            let mut x = vec![0.5; d];
            x[d - 1] = -1e-3;
            let v = riesz_surface(&s, 1.0, &x).unwrap();
            for a in 0..d - 1 {
                assert!(v[a].abs() < 1e-10, "{v:?}");
            }
            assert!(v[d - 1] < 0.0);
        }
    }

    #[test]
    fn surface_normal_component_matches_face_integrals() {
        for d in [2, 3] {
            let s = unit_cube(d);
            let xp = vec![0.3; d - 1];
            let mut x = xp.clone();
            x.push(-0.01);
            let v = riesz_surface(&s, 1.0, &x).unwrap();
            let g = crate::kernels::gamma_norm_checked(d, 1.0).unwrap();
            let f = face_integral_cube(d, &xp, 0.01).unwrap();
            assert_relative_eq!(v[d - 1], f / g, max_relative = 1e-7);
        }
    }

    #[test]
    fn surface_rejects_points_on_faces() {
        let s = unit_cube(2);
        assert!(matches!(riesz_surface(&s, 0.5, &[0.5, 0.0]), Err(Error::Singular(_))));
        let face = Face { center: [0.0; 3], axis: 0, sign: 1.0, half: [0.0, 1.0, 0.0] };
        let s = SurfaceMeasure::new(2, vec![face]).unwrap();
        assert!(riesz_surface(&s, 0.5, &[1.0, 0.0]).is_ok());
    }

    #[test]
    fn riesz_transform_matches_surface_path_outside_the_cube() {
        let g = Grid::uniform(2, -1.0, 2.0, 192).unwrap();
        let sigma = 1.0 / 64.0;
        let u = ScalarField::from_fn(g.clone(), |x| smoothed_box(x, &[0.0, 0.0], &[1.0, 1.0], sigma)).unwrap();
        let ru = riesz_transform(&u).unwrap();
        let s = unit_cube(2);
        let cells: Vec<usize> = (0..g.len())
            .filter(|i| {
                let c = g.center(*i);
                (c[1] + 0.25).abs() < 0.01 && c[0] > 0.1 && c[0] < 0.9
            })
            .collect();
        assert!(cells.len() > 40);
        let pts: Vec<Vec<f64>> = cells.iter().map(|i| g.center(*i)[..2].to_vec()).collect();
        let surf = riesz_surface_many(&s, 1.0, &pts).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for (k, i) in cells.iter().enumerate() {
            for a in 0..2 {
                // Exterior normals: the surface path is -I_1 D chi_Q.
                num += (ru.component(a)[*i] + surf[k][a]).powi(2);
                den += surf[k][a].powi(2);
            }
        }
        assert!((num / den).sqrt() < 0.02, "{}", (num / den).sqrt());
    }

    #[test]
    fn near_face_integral_matches_arcsinh() {
        for s in [1e-6, 1e-4, 1e-2, 0.3] {
            let (near, far) = cube_face_integrals(2, &[0.5], s).unwrap();
            assert_relative_eq!(near, 2.0 * (0.5 / s).asinh(), max_relative = 1e-8);
            assert!(far <= 1.0);
        }
        for x in [0.0, 0.2, 0.9] {
            let (_, far) = cube_face_integrals(3, &[x, 0.5], 1e-4).unwrap();
            assert!(far <= 1.0);
        }
        assert!(face_integral_cube(2, &[0.5], 0.0).is_err());
    }

    #[test]
    fn square_face_matches_cubature() {
        let rule = GaussLegendre::new(6);
        let tol = Tolerance { rel: 1e-10, abs: 0.0 };
        for xp in [[0.5, 0.5], [0.1, 0.7], [-0.3, 0.4], [1.2, -0.5]] {
            for z in [0.05, 0.3, 1.3] {
                let mut f = |y: &[f64]| 1.0 / (z * z + (y[0] - xp[0]).powi(2) + (y[1] - xp[1]).powi(2));
                let want = adaptive_box(&rule, &[0.0, 0.0], &[1.0, 1.0], &mut f, tol);
                let (near, _) = cube_face_integrals(3, &xp, z).unwrap();
                assert_relative_eq!(near, want, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn face_integral_grows_logarithmically() {
        for d in [2, 3] {
            let xp = vec![0.5; d - 1];
            let a = face_integral_cube(d, &xp, 1e-3).unwrap();
            let b = face_integral_cube(d, &xp, 1e-4).unwrap();
            assert!(a < 0.0 && b < a);
            // Slope of the near-face integral in ln(1/s) is the area of the unit (d-2)-sphere.
            let slope = if d == 2 { 2.0 } else { 2.0 * PI };
            assert_relative_eq!((a - b) / 10f64.ln(), slope, max_relative = 1e-2);
        }
    }

    #[test]
    fn smoothed_box_is_a_probability_product() {
        let v = smoothed_box(&[0.5, 0.5], &[0.0, 0.0], &[1.0, 1.0], 1e-3);
        assert_relative_eq!(v, 1.0, max_relative = 1e-12);
        let edge = smoothed_box(&[0.0, 0.5], &[0.0, 0.0], &[1.0, 1.0], 1e-3);
        assert_relative_eq!(edge, 0.5, max_relative = 1e-12);
        let g = Grid::uniform(2, -1.0, 1.0, 16).unwrap();
        let f = bump(g, 0.5);
        let sm = gaussian_smooth(&f, 0.1).unwrap();
        assert_relative_eq!(sm.integral(), f.integral(), max_relative = 1e-8);
    }
}
