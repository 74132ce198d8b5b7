//! Distribution functions and the layer-cake norms built from them.

use crate::error::{Error, Result};
use crate::fields::{ScalarField, VectorField, VoxelSet};

/// Default number of layer-cake thresholds.
pub const DEFAULT_THRESHOLDS: usize = 256;

/// Sorted magnitudes of a field together with the cell volume, so the
/// measure of any superlevel set is a binary search.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    sorted: Vec<f64>,
    cell: f64,
}

impl Distribution {
    pub fn from_values(values: impl IntoIterator<Item = f64>, cell: f64) -> Self {
        let mut sorted: Vec<f64> = values.into_iter().map(f64::abs).collect();
        sorted.sort_by(f64::total_cmp);
        Self { sorted, cell }
    }

    pub fn from_field(g: &ScalarField) -> Self {
        Self::from_values(g.values().iter().copied(), g.grid().cell_volume())
    }

    /// Magnitudes of a vector field on the cells selected by `keep`.
    pub fn from_vector(g: &VectorField, keep: impl Fn(usize) -> bool) -> Self {
        let m = g.magnitude();
        Self::from_values(
            m.values().iter().enumerate().filter(|(i, _)| keep(*i)).map(|(_, v)| *v),
            g.grid().cell_volume(),
        )
    }

    /// `|{|g| > t}|`.
    pub fn measure(&self, t: f64) -> f64 {
        let below = self.sorted.partition_point(|v| *v <= t);
        (self.sorted.len() - below) as f64 * self.cell
    }

    pub fn max(&self) -> f64 {
        self.sorted.last().copied().unwrap_or(0.0)
    }

    /// Smallest positive magnitude, if any.
    pub fn min_positive(&self) -> Option<f64> {
        let i = self.sorted.partition_point(|v| *v <= 0.0);
        self.sorted.get(i).copied()
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.sorted
    }
}

/// `|{|g| > t}|` for a scalar field.
pub fn distribution(g: &ScalarField, t: f64) -> f64 {
    let cell = g.grid().cell_volume();
    g.values().iter().filter(|v| v.abs() > t).count() as f64 * cell
}

/// Layer-cake thresholds from the smallest positive magnitude to the
/// largest: `count` log-spaced nodes merged with `count` evenly spaced
/// ones. The log nodes resolve small values of fields spanning many
/// decades; the even nodes keep the top of the range resolved when the
/// smallest value is tiny.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSchedule {
    t: Vec<f64>,
}

impl ThresholdSchedule {
    pub fn new(t_min: f64, t_max: f64, count: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_max.is_finite()) {
            return Err(Error::param("t_min", t_min, "thresholds must be positive"));
        }
        if count < 2 {
            return Err(Error::param("count", count as f64, "need at least 2 thresholds"));
        }
        // A two-valued field has min == max; keep the schedule strictly increasing.
        let t_max = if t_max > t_min { t_max } else { t_min * (1.0 + 1e-9) };
        let (a, b) = (t_min.ln(), t_max.ln());
        let mut t: Vec<f64> = (0..count)
            .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
            .chain((1..count).map(|k| t_max * k as f64 / (count - 1) as f64))
            .filter(|v| *v > t_min && *v < t_max)
            .collect();
        t.push(t_min);
        t.push(t_max);
        t.sort_by(f64::total_cmp);
        t.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * *y);
        Ok(Self { t })
    }

    pub fn for_distribution(d: &Distribution, count: usize) -> Result<Self> {
        let lo = d
            .min_positive()
            .ok_or_else(|| Error::Degenerate("field has no positive magnitude".into()))?;
        Self::new(lo, d.max(), count)
    }

    pub fn for_field(g: &ScalarField, count: usize) -> Result<Self> {
        Self::for_distribution(&Distribution::from_field(g), count)
    }

    /// Adds the log-midpoint between neighbours.
    pub fn refined(&self) -> Self {
        let mut t = Vec::with_capacity(2 * self.t.len() - 1);
        for w in self.t.windows(2) {
            t.push(w[0]);
            t.push((w[0] * w[1]).sqrt());
        }
        t.push(*self.t.last().unwrap());
        Self { t }
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.t
    }
}

/// `int_0^inf F(t) dt` for a nonincreasing `F` known at the thresholds:
/// exact head `t_0 F(0+)`, trapezoid in between, nothing past the last
/// threshold.
fn layer_cake(sched: &ThresholdSchedule, head: f64, values: &[f64]) -> f64 {
    let t = sched.thresholds();
    let mut s = t[0] * head;
    for k in 0..t.len() - 1 {
        s += 0.5 * (values[k] + values[k + 1]) * (t[k + 1] - t[k]);
    }
    s
}

/// `int_0^inf |{|g| > t}|^(1/p) dt`.
pub fn lorentz_p1(g: &Distribution, p: f64, sched: &ThresholdSchedule) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::param("p", p, "Lorentz exponent must exceed 1"));
    }
    let q = 1.0 / p;
    let support = g.measure(0.0);
    let vals: Vec<f64> = sched
        .thresholds()
        .iter()
        .map(|t| g.measure(*t).powf(q))
        .collect();
    Ok(layer_cake(sched, support.powf(q), &vals))
}

/// `int_0^inf |{|g| > t}|^(1/p) dt` summed exactly: the distribution of a
/// sampled field is a step function with jumps at the sampled magnitudes.
/// Zero for a zero field.
pub fn lorentz_p1_auto(g: &Distribution, p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::param("p", p, "Lorentz exponent must exceed 1"));
    }
    let q = 1.0 / p;
    let v = g.magnitudes();
    let n = v.len();
    let mut prev = 0.0;
    let mut s = 0.0;
    for (i, &x) in v.iter().enumerate() {
        if x > prev {
            s += (x - prev) * ((n - i) as f64 * g.cell_volume()).powf(q);
            prev = x;
        }
    }
    Ok(s)
}

/// `(sum |g|^p h^d)^(1/p)`.
pub fn lp_norm(g: &Distribution, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::param("p", p, "Lebesgue exponent must be at least 1"));
    }
    let m = g.max();
    if m == 0.0 {
        return Ok(0.0);
    }
    // Scale by the maximum to avoid overflow for large p.
    let s: f64 = g.magnitudes().iter().map(|v| (v / m).powf(p)).sum();
    Ok(m * (s * g.cell_volume()).powf(1.0 / p))
}

/// `int_0^inf content({|u| > t}) dt` with a caller-supplied content
/// estimate. Superlevel sets are passed from the largest (the support) to
/// the smallest, which lets seeded estimators reuse earlier covers.
pub fn content_integral(
    u: &ScalarField,
    sched: &ThresholdSchedule,
    estimator: &mut dyn FnMut(&VoxelSet) -> Result<f64>,
) -> Result<f64> {
    let grid = u.grid();
    let level = |t: f64| VoxelSet::from_fn_index(grid.clone(), |i| u.values()[i].abs() > t);
    let support = level(0.0);
    if support.is_empty() {
        return Ok(0.0);
    }
    let head = estimator(&support)?;
    let mut vals = Vec::with_capacity(sched.thresholds().len());
    for t in sched.thresholds() {
        let set = level(*t);
        vals.push(if set.is_empty() { 0.0 } else { estimator(&set)? });
    }
    Ok(layer_cake(sched, head, &vals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{indicator_ball, Grid};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use statrs::function::gamma::gamma;

    fn disk() -> VoxelSet {
        let g = Grid::uniform(2, -1.0, 1.0, 64).unwrap();
        indicator_ball(&g, &[0.0, 0.0], 0.6).unwrap()
    }

    #[test]
    fn distribution_of_indicator() {
        let e = disk();
        let f = e.indicator();
        assert_relative_eq!(distribution(&f, 0.5), e.volume(), max_relative = 1e-14);
        assert_eq!(distribution(&f, 1.0), 0.0);
        let d = Distribution::from_field(&f);
        assert_eq!(d.measure(0.5), distribution(&f, 0.5));
        let mut last = f64::INFINITY;
        for t in [0.0, 0.2, 0.7, 1.0, 3.0] {
            assert!(d.measure(t) <= last);
            last = d.measure(t);
        }
    }

    #[test]
    fn lorentz_of_indicator_is_exact() {
        let e = disk();
        let d = Distribution::from_field(&e.indicator());
        for p in [2.0, 4.0 / 3.0, 1.5] {
            let v = lorentz_p1_auto(&d, p).unwrap();
            assert_relative_eq!(v, e.volume().powf(1.0 / p), max_relative = 1e-6);
            let d2 = Distribution::from_field(&e.indicator().scale(2.0));
            assert_relative_eq!(lorentz_p1_auto(&d2, p).unwrap(), 2.0 * v, max_relative = 1e-6);
        }
        assert!(lorentz_p1_auto(&d, 1.0).is_err());
    }

    #[test]
    fn lorentz_of_gaussian_matches_radial_oracle() {
        // |{e^(-r^2/c) > t}| = pi c ln(1/t), so the norm is (pi c)^(1/p) Gamma(1 + 1/p).
        let c = 0.1;
        let g = Grid::uniform(2, -1.0, 1.0, 256).unwrap();
        let f = ScalarField::from_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1]) / c).exp()).unwrap();
        let d = Distribution::from_field(&f);
        for p in [2.0, 4.0 / 3.0] {
            let exact = (std::f64::consts::PI * c).powf(1.0 / p) * gamma(1.0 + 1.0 / p);
            let s = ThresholdSchedule::for_distribution(&d, DEFAULT_THRESHOLDS).unwrap();
            let v = lorentz_p1(&d, p, &s).unwrap();
            assert_relative_eq!(v, exact, max_relative = 0.01);
            let r = lorentz_p1(&d, p, &s.refined()).unwrap();
            assert!((r - v).abs() < 0.005 * v);
            assert!(lp_norm(&d, p).unwrap() <= v);
            assert_relative_eq!(lorentz_p1_auto(&d, p).unwrap(), exact, max_relative = 0.01);
        }
    }

    #[test]
    fn step_sum_handles_widely_separated_values() {
        // The trapezoid layer cake undershoots here; the step sum is exact.
        let d = Distribution::from_values([8.23948643967076, 0.0032571071977499193], 0.25);
        let p = 1.05;
        let exact = 0.0032571071977499193 * 0.5f64.powf(1.0 / p)
            + (8.23948643967076 - 0.0032571071977499193) * 0.25f64.powf(1.0 / p);
        assert_relative_eq!(lorentz_p1_auto(&d, p).unwrap(), exact, max_relative = 1e-14);
        assert!(lp_norm(&d, p).unwrap() <= exact);
    }

    #[test]
    fn lp_of_indicator_and_refinement() {
        let e = disk();
        let d = Distribution::from_field(&e.indicator());
        assert_relative_eq!(lp_norm(&d, 3.0).unwrap(), e.volume().powf(1.0 / 3.0), max_relative = 1e-14);
        let f = |n| {
            let g = Grid::uniform(2, -1.0, 1.0, n).unwrap();
            let u = ScalarField::from_fn(g, |x| (x[0] * 2.0).sin() * (-x[1] * x[1]).exp()).unwrap();
            lp_norm(&Distribution::from_field(&u), 2.0).unwrap()
        };
        assert_relative_eq!(f(64), f(128), max_relative = 0.01);
        assert!(lp_norm(&d, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn lp_triangle_inequality(a in proptest::collection::vec(-5.0f64..5.0, 16), b in proptest::collection::vec(-5.0f64..5.0, 16), p in 1.0f64..6.0) {
            let n = |v: &[f64]| lp_norm(&Distribution::from_values(v.iter().copied(), 0.1), p).unwrap();
            let s: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            prop_assert!(n(&s) <= (n(&a) + n(&b)) * (1.0 + 1e-12));
        }

        #[test]
        fn lorentz_dominates_lebesgue(v in proptest::collection::vec(0.0f64..10.0, 1..40), p in 1.05f64..4.0) {
            let d = Distribution::from_values(v, 0.25);
            let l = lorentz_p1_auto(&d, p).unwrap();
            prop_assert!(lp_norm(&d, p).unwrap() <= l * (1.0 + 1e-9));
        }
    }

    #[test]
    fn content_integral_of_smoothed_ball() {
        let g = Grid::uniform(2, -1.0, 1.0, 32).unwrap();
        let u = ScalarField::from_fn(g.clone(), |x| {
            crate::potentials::smoothed_box(x, &[-0.3, -0.3], &[0.3, 0.3], 0.02)
        })
        .unwrap();
        let s = ThresholdSchedule::for_field(&u, 64).unwrap();
        // Volume as the "content": the layer cake must reproduce the integral.
        let mut vol = |e: &VoxelSet| Ok(e.volume());
        let v = content_integral(&u, &s, &mut vol).unwrap();
        assert_relative_eq!(v, u.integral(), max_relative = 0.01);
        let zero = ScalarField::zeros(g);
        assert_eq!(content_integral(&zero, &s, &mut vol).unwrap(), 0.0);
    }
}
