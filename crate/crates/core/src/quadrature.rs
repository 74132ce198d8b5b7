//! Gauss-Legendre rules and adaptive tensor-product integration over
//! axis-aligned boxes of dimension 1 to 3.

use std::f64::consts::PI;

/// Relative/absolute stopping tolerance for adaptive rules.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub const fn rel(rel: f64) -> Self {
        Self { rel, abs: 1e-300 }
    }
}

const MAX_DEPTH: usize = 60;
const MAX_DIM: usize = 3;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Composite rule on the panels delimited by `breaks` (sorted).
    pub fn integrate_panels(&self, breaks: &[f64], mut f: impl FnMut(f64) -> f64) -> f64 {
        breaks
            .windows(2)
            .map(|w| self.integrate(w[0], w[1], &mut f))
            .sum()
    }

    /// Tensor-product integral over the box `[lo, hi]` (dimension 1 to 3).
    pub fn integrate_box(&self, lo: &[f64], hi: &[f64], f: &mut impl FnMut(&[f64]) -> f64) -> f64 {
        let k = lo.len();
        debug_assert!(k >= 1 && k <= MAX_DIM && hi.len() == k);
        let mut half = [0.0; MAX_DIM];
        let mut mid = [0.0; MAX_DIM];
        let mut jac = 1.0;
        for a in 0..k {
            half[a] = 0.5 * (hi[a] - lo[a]);
            mid[a] = 0.5 * (hi[a] + lo[a]);
            jac *= half[a];
        }
        let n = self.nodes.len();
        let mut pt = [0.0; MAX_DIM];
        let mut acc = 0.0;
        match k {
            1 => {
                for i in 0..n {
                    pt[0] = mid[0] + half[0] * self.nodes[i];
                    acc += self.weights[i] * f(&pt[..1]);
                }
            }
            2 => {
                for i in 0..n {
                    pt[0] = mid[0] + half[0] * self.nodes[i];
                    for j in 0..n {
                        pt[1] = mid[1] + half[1] * self.nodes[j];
                        acc += self.weights[i] * self.weights[j] * f(&pt[..2]);
                    }
                }
            }
            _ => {
                for i in 0..n {
                    pt[0] = mid[0] + half[0] * self.nodes[i];
                    for j in 0..n {
                        pt[1] = mid[1] + half[1] * self.nodes[j];
                        let wij = self.weights[i] * self.weights[j];
                        for l in 0..n {
                            pt[2] = mid[2] + half[2] * self.nodes[l];
                            acc += wij * self.weights[l] * f(&pt[..3]);
                        }
                    }
                }
            }
        }
        acc * jac
    }
}

/// Legendre polynomial `P_n(z)` and its derivative.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (1.0 - z * z).abs() < 1e-300 {
        0.0
    } else {
        nf * (z * p1 - p0) / (z * z - 1.0)
    };
    (p1, dp)
}

/// Adaptive bisection of `[lo, hi]`: a cell is accepted once the coarse
/// rule and the sum over its `2^k` children agree to `tol`. For nonnegative
/// integrands the per-cell relative test bounds the global relative error.
pub fn adaptive_box(
    rule: &GaussLegendre,
    lo: &[f64],
    hi: &[f64],
    f: &mut impl FnMut(&[f64]) -> f64,
    tol: Tolerance,
) -> f64 {
    let coarse = rule.integrate_box(lo, hi, f);
    refine(rule, lo, hi, coarse, f, tol, 0)
}

fn refine(
    rule: &GaussLegendre,
    lo: &[f64],
    hi: &[f64],
    coarse: f64,
    f: &mut impl FnMut(&[f64]) -> f64,
    tol: Tolerance,
    depth: usize,
) -> f64 {
    let k = lo.len();
    let nchild = 1usize << k;
    let mut boxes = [([0.0; MAX_DIM], [0.0; MAX_DIM]); 1 << MAX_DIM];
    let mut parts = [0.0; 1 << MAX_DIM];
    let mut fine = 0.0;
    for c in 0..nchild {
        let (clo, chi) = &mut boxes[c];
        for a in 0..k {
            let mid = 0.5 * (lo[a] + hi[a]);
            if (c >> a) & 1 == 0 {
                clo[a] = lo[a];
                chi[a] = mid;
            } else {
                clo[a] = mid;
                chi[a] = hi[a];
            }
        }
        parts[c] = rule.integrate_box(&clo[..k], &chi[..k], f);
        fine += parts[c];
    }
    if depth >= MAX_DEPTH || (fine - coarse).abs() <= tol.rel * fine.abs() + tol.abs {
        return fine;
    }
    let mut acc = 0.0;
    for c in 0..nchild {
        let (clo, chi) = boxes[c];
        acc += refine(rule, &clo[..k], &chi[..k], parts[c], f, tol, depth + 1);
    }
    acc
}

/// Like [`adaptive_box`], but first splits every axis at `at[a]` when that
/// coordinate lies strictly inside the box, so a near-singular point of the
/// integrand sits on sub-box corners.
pub fn adaptive_box_split(
    rule: &GaussLegendre,
    lo: &[f64],
    hi: &[f64],
    at: &[f64],
    f: &mut impl FnMut(&[f64]) -> f64,
    tol: Tolerance,
) -> f64 {
    let k = lo.len();
    let mut cuts: [[f64; 3]; MAX_DIM] = [[0.0; 3]; MAX_DIM];
    let mut ncut = [0usize; MAX_DIM];
    for a in 0..k {
        cuts[a][0] = lo[a];
        if at[a] > lo[a] && at[a] < hi[a] {
            cuts[a][1] = at[a];
            cuts[a][2] = hi[a];
            ncut[a] = 2;
        } else {
            cuts[a][1] = hi[a];
            ncut[a] = 1;
        }
    }
    let total: usize = ncut[..k].iter().product();
    let mut acc = 0.0;
    let mut sl = [0.0; MAX_DIM];
    let mut sh = [0.0; MAX_DIM];
    for idx in 0..total {
        let mut r = idx;
        for a in 0..k {
            let i = r % ncut[a];
            r /= ncut[a];
            sl[a] = cuts[a][i];
            sh[a] = cuts[a][i + 1];
        }
        acc += adaptive_box(rule, &sl[..k], &sh[..k], f, tol);
    }
    acc
}
