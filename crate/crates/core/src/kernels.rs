//! Scalar kernels and normalization constants.
//!
//! The Riesz kernel of order `alpha` in dimension `d` is
//! `|x|^(alpha - d) / gamma_norm(d, alpha)`, and the heat kernel is the
//! Gaussian `(4 pi t)^(-d/2) exp(-|x|^2 / 4t)`. Everything here is a pure
//! function of its arguments.

use std::f64::consts::PI;

use statrs::function::erf::{erf, erfc};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};

/// Exponents below this underflow a double; the heat kernel returns an exact zero.
pub const EXP_UNDERFLOW: f64 = -745.0;

/// Dimension and order of a Riesz potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    d: usize,
    alpha: f64,
}

impl KernelParams {
    pub fn new(d: usize, alpha: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("d", 0.0, "dimension must be at least 1"));
        }
        if !(alpha > 0.0 && alpha < d as f64) {
            return Err(Error::order(
                alpha,
                format!("order must lie in (0, {d}) in dimension {d}"),
            ));
        }
        Ok(Self { d, alpha })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Exponent `alpha - d` of the power-law kernel.
    pub fn exponent(&self) -> f64 {
        self.alpha - self.d as f64
    }

    /// Kernel value `|x|^(alpha-d) / gamma_norm` at distance `r > 0`.
    pub fn kernel(&self, r: f64) -> f64 {
        r.powf(self.exponent()) / gamma_norm(*self)
    }
}

/// `pi^(d/2) 2^alpha Gamma(alpha/2) / Gamma(d/2 - alpha/2)`.
pub fn gamma_norm(p: KernelParams) -> f64 {
    let d = p.d as f64;
    let a = p.alpha;
    PI.powf(d / 2.0) * 2f64.powf(a) * gamma(a / 2.0) / gamma(d / 2.0 - a / 2.0)
}

/// Checked variant of [`gamma_norm`] for raw `(d, alpha)` input.
pub fn gamma_norm_checked(d: usize, alpha: f64) -> Result<f64> {
    KernelParams::new(d, alpha).map(gamma_norm)
}

/// Normalizer `pi^(s/2) / Gamma(s/2 + 1)` of the `s`-dimensional content gauge.
pub fn omega(s: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::param("s", s, "content dimension must be positive"));
    }
    Ok((s / 2.0 * PI.ln() - ln_gamma(s / 2.0 + 1.0)).exp())
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::param("t", t, "heat time must be positive"));
    }
    Ok(())
}

/// Gaussian heat kernel at `x` (dimension `x.len()`), time `t`.
pub fn heat_kernel(x: &[f64], t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(heat_kernel_unchecked(x, t))
}

#[inline]
pub(crate) fn heat_kernel_unchecked(x: &[f64], t: f64) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let e = -r2 / (4.0 * t);
    if e < EXP_UNDERFLOW {
        return 0.0;
    }
    (4.0 * PI * t).powf(-(x.len() as f64) / 2.0) * e.exp()
}

/// Spatial gradient `-x/(2t) p_t(x)` of the heat kernel.
pub fn heat_kernel_gradient(x: &[f64], t: f64) -> Result<Vec<f64>> {
    check_time(t)?;
    let p = heat_kernel_unchecked(x, t);
    Ok(x.iter().map(|xi| -xi / (2.0 * t) * p).collect())
}

/// Mass of the centered normal law with standard deviation `sigma` on
/// `[x - w, x + w]`. Uses `erfc` in the tails so small masses keep their
/// relative accuracy.
pub(crate) fn gauss_interval(x: f64, w: f64, sigma: f64) -> f64 {
    let s = sigma * std::f64::consts::SQRT_2;
    let a = (x - w) / s;
    let b = (x + w) / s;
    if a >= 0.0 {
        0.5 * (erfc(a) - erfc(b))
    } else if b <= 0.0 {
        0.5 * (erfc(-b) - erfc(-a))
    } else {
        0.5 * (erf(b) - erf(a))
    }
}

/// `|| t^(1/2) grad p_t ||_{L^1}`, which does not depend on `t`:
/// `Gamma((d+1)/2) / Gamma(d/2)`.
pub fn heat_gradient_l1(d: usize) -> f64 {
    let d = d as f64;
    (ln_gamma((d + 1.0) / 2.0) - ln_gamma(d / 2.0)).exp()
}

/// Explicit constant of the pointwise interpolation inequality
/// `|I_a D chi_E| <= C (sup_t |p_t * D chi_E|)^(1-a) (sup_t |t^(1/2) D p_t * chi_E|)^a`
/// obtained by balancing the small-time and large-time halves of the
/// semigroup integral.
pub fn interpolation_constant(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::order(alpha, "interpolation needs order in (0, 1)"));
    }
    let small = 1.0 / gamma(alpha / 2.0 + 1.0);
    let large = 1.0 / (gamma(alpha / 2.0) * (0.5 - alpha / 2.0));
    Ok(2.0 * small.powf(1.0 - alpha) * large.powf(alpha))
}
