//! Zero-padded transform convolutions and Fourier multipliers on grids.

use rustfft::num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::fields::{Grid, MAX_DIM};

/// Default padding factor per axis for transform-based convolutions.
pub const DEFAULT_PAD: usize = 2;

/// In-place multidimensional transform over a row-major `shape`.
fn fft_nd(buf: &mut [Complex64], shape: [usize; MAX_DIM], direction: FftDirection) {
    let mut planner = FftPlanner::<f64>::new();
    for axis in 0..MAX_DIM {
        let len = shape[axis];
        if len <= 1 {
            continue;
        }
        let fft = planner.plan_fft(len, direction);
        let stride: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        let mut line = vec![Complex64::new(0.0, 0.0); len];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for o in 0..outer {
            for s in 0..stride {
                let base = o * len * stride + s;
                for (k, v) in line.iter_mut().enumerate() {
                    *v = buf[base + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, v) in line.iter().enumerate() {
                    buf[base + k * stride] = *v;
                }
            }
        }
    }
}

/// Layout of a grid embedded in a zero-padded transform box.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Padding {
    inner: [usize; MAX_DIM],
    shape: [usize; MAX_DIM],
}

impl Padding {
    pub(crate) fn new(grid: &Grid, factor: usize) -> Result<Self> {
        if factor < 2 {
            return Err(Error::param(
                "pad",
                factor as f64,
                "padding factor must be at least 2",
            ));
        }
        let inner = grid.shape3();
        let mut shape = [1; MAX_DIM];
        for a in 0..grid.dim() {
            if inner[a] < 4 {
                return Err(Error::InvalidGrid(format!(
                    "axis {a} has {} cells; transform paths need at least 4",
                    inner[a]
                )));
            }
            shape[a] = inner[a] * factor;
        }
        Ok(Self { inner, shape })
    }

    fn len(&self) -> usize {
        self.shape.iter().product()
    }

    /// Signed offset represented by padded index `m` along `axis`.
    fn offset(&self, axis: usize, m: usize) -> isize {
        let p = self.shape[axis];
        if m <= p / 2 {
            m as isize
        } else {
            m as isize - p as isize
        }
    }

    fn embed(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len()];
        let [_, n1, n2] = self.inner;
        let [_, p1, p2] = self.shape;
        for (lin, v) in values.iter().enumerate() {
            let i2 = lin % n2;
            let i1 = (lin / n2) % n1;
            let i0 = lin / (n1 * n2);
            buf[(i0 * p1 + i1) * p2 + i2] = Complex64::new(*v, 0.0);
        }
        buf
    }

    fn crop(&self, buf: &[Complex64]) -> Vec<f64> {
        let [n0, n1, n2] = self.inner;
        let [_, p1, p2] = self.shape;
        let scale = 1.0 / self.len() as f64;
        let mut out = Vec::with_capacity(n0 * n1 * n2);
        for i0 in 0..n0 {
            for i1 in 0..n1 {
                for i2 in 0..n2 {
                    out.push(buf[(i0 * p1 + i1) * p2 + i2].re * scale);
                }
            }
        }
        out
    }
}

/// Linear convolution `out_i = sum_j kernel(i - j) f_j` of grid values with
/// a kernel given on integer cell offsets, by zero padding.
pub(crate) fn convolve(
    grid: &Grid,
    values: &[f64],
    pad: usize,
    kernel: impl Fn([isize; MAX_DIM]) -> f64,
) -> Result<Vec<f64>> {
    let layout = Padding::new(grid, pad)?;
    let mut fbuf = layout.embed(values);
    let mut kbuf = vec![Complex64::new(0.0, 0.0); layout.len()];
    let [_, p1, p2] = layout.shape;
    for m0 in 0..layout.shape[0] {
        for m1 in 0..p1 {
            for m2 in 0..p2 {
                let off = [
                    layout.offset(0, m0),
                    layout.offset(1, m1),
                    layout.offset(2, m2),
                ];
                kbuf[(m0 * p1 + m1) * p2 + m2] = Complex64::new(kernel(off), 0.0);
            }
        }
    }
    fft_nd(&mut fbuf, layout.shape, FftDirection::Forward);
    fft_nd(&mut kbuf, layout.shape, FftDirection::Forward);
    for (a, b) in fbuf.iter_mut().zip(&kbuf) {
        *a *= b;
    }
    fft_nd(&mut fbuf, layout.shape, FftDirection::Inverse);
    Ok(layout.crop(&fbuf))
}

/// Applies the Fourier multiplier `symbol(xi)` (frequencies in cycles per
/// unit length) on the zero-padded transform grid and crops the result.
pub(crate) fn apply_multiplier(
    grid: &Grid,
    values: &[f64],
    pad: usize,
    symbol: impl Fn([f64; MAX_DIM]) -> f64,
) -> Result<Vec<f64>> {
    let layout = Padding::new(grid, pad)?;
    let mut buf = layout.embed(values);
    fft_nd(&mut buf, layout.shape, FftDirection::Forward);
    let d = grid.dim();
    let [_, p1, p2] = layout.shape;
    for m0 in 0..layout.shape[0] {
        for m1 in 0..p1 {
            for m2 in 0..p2 {
                let ms = [m0, m1, m2];
                let mut xi = [0.0; MAX_DIM];
                for a in 0..d {
                    let len = layout.shape[a] as f64 * grid.spacing(a);
                    xi[a] = layout.offset(a, ms[a]) as f64 / len;
                }
                buf[(m0 * p1 + m1) * p2 + m2] *= symbol(xi);
            }
        }
    }
    fft_nd(&mut buf, layout.shape, FftDirection::Inverse);
    Ok(layout.crop(&buf))
}
