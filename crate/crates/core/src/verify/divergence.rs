use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::content::{slab_lower_bound, SlabMeasure};
use crate::error::{Error, Result};
use crate::fields::{l2_relative, Face, Grid, ScalarField, SurfaceMeasure, VoxelSet, MAX_DIM};
use crate::kernels::omega;
use crate::par;
use crate::potentials::{face_integral_cube, frac_gradient, frac_laplacian, riesz_surface_many, smoothed_box};
use crate::quadrature::GaussLegendre;
use crate::report::{linear_fit, num, Report, Status, Table};

use super::{Outcome, Plot, TracefailConfig};

/// Relative RMS residual of the log fit.
pub const FIT_RESIDUAL: f64 = 0.02;
/// Fitted slope against the closed-form slope.
pub const SLOPE_TOL: f64 = 0.01;
/// Largest offset in the asymptotic regime.
pub const ASYMPTOTIC_MAX: f64 = 0.1;
/// Offsets and span required of the fit range.
pub const MIN_FIT_POINTS: usize = 3;
pub const MIN_FIT_SPAN: f64 = 100.0;
/// Ratio of the weak-type lower bounds against `t_max / t_min`.
pub const GROWTH_TOL: f64 = 0.10;
/// Safety factor on the offset `s(t)`.
pub const SAFETY: f64 = 0.5;
/// Plane samples per axis of `Q'` in the weak-type run.
pub const PLANE_SAMPLES_2D: usize = 100;
pub const PLANE_SAMPLES_3D: usize = 10;
/// Trace denominator against the cube perimeter.
pub const PERIMETER_TOL: f64 = 0.02;
/// Required growth of the trace ratio across the offsets.
pub const TRACE_GROWTH: f64 = 4.0;
/// Allowed non-monotone noise of the trace ratio.
pub const MONOTONE_NOISE: f64 = 0.02;
/// `D^alpha u` against `D (chi_Q * rho)` in the interior.
pub const CONSISTENCY_TOL: f64 = 0.02;

/// Slope of `|face integral|` in `ln(1/s)` for `x'` inside the face: the
/// area of the unit sphere `S^(d-2)`.
pub fn closed_form_slope(d: usize) -> f64 {
    (d as f64 - 1.0) * omega(d as f64 - 1.0).expect("d >= 2")
}

fn check_dim(d: usize) -> Result<()> {
    if !(2..=3).contains(&d) {
        return Err(Error::param("d", d as f64, "dimension must be 2 or 3"));
    }
    Ok(())
}

/// Values of `|face_integral_cube|`, which is `gamma(1) |(I_1 D chi_Q)_d|`
/// at `(x', -s)`, tabulated against `ln(1/s)` and fitted linearly on the
/// offsets `s <= 0.1`.
pub fn counterexample_profile(d: usize, s_list: &[f64], seed: u64) -> Result<Outcome> {
    check_dim(d)?;
    for s in s_list {
        if !(*s > 0.0 && *s < 1.0) {
            return Err(Error::param("s", *s, "offsets must lie in (0, 1)"));
        }
    }
    if s_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::param("s", s_list[0], "offsets must be strictly decreasing"));
    }
    let fit_s: Vec<f64> = s_list.iter().copied().filter(|s| *s <= ASYMPTOTIC_MAX).collect();
    let span = fit_s.first().zip(fit_s.last()).map(|(a, b)| a / b).unwrap_or(1.0);
    if fit_s.len() < MIN_FIT_POINTS || span < MIN_FIT_SPAN * (1.0 - 1e-9) {
        return Err(Error::param(
            "s",
            span,
            "need at least 3 offsets in (0, 0.1] spanning at least 2 decades",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = vec![0.5; d - 1];
    let randoms: Vec<Vec<f64>> = (0..5).map(|_| (0..d - 1).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
    let mut outside = vec![0.5; d - 1];
    outside[0] = 2.0;

    let mut r = Report::new("counterexample");
    r.input("d", d).input("s", json!(s_list)).input("seed", seed).input("random_points", json!(randoms));
    r.note("values are |far-face minus near-face integral| = gamma(1) |(I_1 D chi_Q)_d(x', -s)|");
    let mut cols = vec!["s".to_string(), "regime".into(), "center".into()];
    cols.extend((0..5).map(|k| format!("random_{k}")));
    cols.push("outside".into());
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new("profile", &col_refs);
    let mut profiles = vec![Vec::new(); 7];
    for &s in s_list {
        let mut row = vec![num(s), if s <= ASYMPTOTIC_MAX { "fit" } else { "observe" }.into()];
        let pts = std::iter::once(&center).chain(randoms.iter()).chain(std::iter::once(&outside));
        for (k, xp) in pts.enumerate() {
            let v = face_integral_cube(d, xp, s)?.abs();
            profiles[k].push(v);
            row.push(num(v));
        }
        t.push(row);
    }
    r.tables.push(t);

    let x: Vec<f64> = fit_s.iter().map(|s| (1.0 / s).ln()).collect();
    let idx: Vec<usize> = (0..s_list.len()).filter(|i| s_list[*i] <= ASYMPTOTIC_MAX).collect();
    let pick = |k: usize| idx.iter().map(|i| profiles[k][*i]).collect::<Vec<f64>>();
    let (a, b, res) = linear_fit(&x, &pick(0));
    r.fits.push(crate::report::Fit { name: "center".into(), slope: a, intercept: b, residual: res });
    for k in 1..6 {
        let (a, b, res) = linear_fit(&x, &pick(k));
        r.fits.push(crate::report::Fit { name: format!("random_{}", k - 1), slope: a, intercept: b, residual: res });
    }
    r.check(
        "log_fit",
        res < FIT_RESIDUAL && a > 0.0,
        format!("center: slope {a:.5}, intercept {b:.4}, relative RMS residual {:.3}%", 100.0 * res),
    );
    let exact = closed_form_slope(d);
    let e = (a - exact).abs() / exact;
    r.check(
        "closed_form_slope",
        e < SLOPE_TOL,
        format!("slope {a:.5} vs {exact:.5}, error {:.3}%", 100.0 * e),
    );
    let out = pick(6);
    let var = out.iter().fold(0.0f64, |m, v| m.max((v - out[0]).abs())) / out[0];
    r.check(
        "outside_bounded",
        var < 0.05,
        format!("x' = {outside:?}: relative variation {var:.2e} over the fitted offsets"),
    );
    let mut o = Outcome::from(r);
    o.plots.push(Plot::new(
        "counterexample_profile",
        "s",
        "abs_I1_D_chi_Q_center",
        s_list.iter().copied().zip(profiles[0].iter().copied()).collect(),
    ));
    Ok(o)
}

fn plane_points(d: usize) -> Vec<Vec<f64>> {
    if d == 2 {
        (0..PLANE_SAMPLES_2D).map(|k| vec![(k as f64 + 0.5) / PLANE_SAMPLES_2D as f64]).collect()
    } else {
        let n = PLANE_SAMPLES_3D;
        (0..n * n)
            .map(|k| vec![((k / n) as f64 + 0.5) / n as f64, ((k % n) as f64 + 0.5) / n as f64])
            .collect()
    }
}

/// Thin three-layer grid whose middle-layer cell centers are the plane
/// samples at height `-s`.
fn plane_grid(d: usize, s: f64) -> Result<Grid> {
    let th = 0.5 * s;
    if d == 2 {
        Grid::new(&[0.0, -s - 1.5 * th], &[1.0, 3.0 * th], &[PLANE_SAMPLES_2D, 3])
    } else {
        let n = PLANE_SAMPLES_3D;
        Grid::new(&[0.0, 0.0, -s - 1.5 * th], &[1.0, 1.0, 3.0 * th], &[n, n, 3])
    }
}

/// `t * mu_s(A_t) / C'` raised per content order, where `A_t` is the
/// sampled superlevel set `{|face integral| > t}` on the plane at offset
/// `s(t) = 0.5 exp(-(t - b) / a)`, with `(a, b)` the log fit of the
/// smallest sampled profile. With `exploratory`, orders in `(0, 1)` are
/// admitted and only observed.
pub fn weak_type_growth(
    d: usize,
    betas: &[f64],
    t_list: &[f64],
    fit_s: &[f64],
    exploratory: bool,
) -> Result<Outcome> {
    check_dim(d)?;
    let floor = if exploratory { 0.0 } else { 1.0 };
    for &b in betas {
        if !(b >= floor && b > 0.0 && b < d as f64) {
            let why = if exploratory { "need 0 < beta < d" } else { "weak-type run needs 1 <= beta < d; set exploratory for beta < 1" };
            return Err(Error::param("beta", b, why));
        }
    }
    if t_list.len() < 2 || t_list.windows(2).any(|w| !(w[1] > w[0])) || t_list[0] <= 0.0 {
        return Err(Error::param("t", t_list.first().copied().unwrap_or(f64::NAN), "thresholds must be positive and increasing"));
    }
    if fit_s.len() < 2 || fit_s.iter().any(|s| !(*s > 0.0 && *s <= ASYMPTOTIC_MAX)) {
        return Err(Error::Config("weaktype.fit_s needs at least two offsets in (0, 0.1]".into()));
    }
    let pts = plane_points(d);
    let profile = |s: f64| -> Result<Vec<f64>> {
        let v = par::map(pts.len(), |k| face_integral_cube(d, &pts[k], s).map(f64::abs));
        v.into_iter().collect()
    };
    let mut mins = Vec::new();
    for &s in fit_s {
        mins.push(profile(s)?.into_iter().fold(f64::INFINITY, f64::min));
    }
    let x: Vec<f64> = fit_s.iter().map(|s| (1.0 / s).ln()).collect();
    let (a, b, res) = linear_fit(&x, &mins);
    if !(a > 0.0) {
        return Err(Error::Degenerate(format!("profile fit has non-positive slope {a}")));
    }
    let mut r = Report::new("weaktype");
    r.input("d", d)
        .input("betas", json!(betas))
        .input("t", json!(t_list))
        .input("fit_s", json!(fit_s))
        .input("exploratory", exploratory);
    r.input("plane_samples", pts.len()).input("safety", SAFETY);
    r.fits.push(crate::report::Fit { name: "min_profile".into(), slope: a, intercept: b, residual: res });
    r.note("thresholds apply to |far-face minus near-face integral| = gamma(1) |(I_1 D chi_Q)_d|, a lower bound for gamma(1) |D I_1 chi_Q|");
    let mut cols = vec!["t".to_string(), "s".into(), "halvings".into(), "samples_above".into(), "plane_lower".into()];
    cols.extend(betas.iter().map(|b| format!("lower_beta_{b}")));
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new("growth", &col_refs);
    let mut lowers: Vec<Vec<f64>> = vec![Vec::new(); betas.len()];
    let mut all_certified = true;
    for &tt in t_list {
        let mut s = (SAFETY * (-(tt - b) / a).exp()).min(ASYMPTOTIC_MAX);
        let mut halvings = 0;
        let mut vals = profile(s)?;
        while vals.iter().any(|v| !(*v > tt)) && halvings < 200 {
            s *= 0.5;
            halvings += 1;
            vals = profile(s)?;
        }
        let grid = plane_grid(d, s)?;
        let above = VoxelSet::from_fn_index(grid.clone(), |i| {
            let ii = grid.unravel(i);
            ii[d - 1] == 1 && vals[(0..d - 1).fold(0, |acc, a| acc * grid.shape()[a] + ii[a])] > tt
        });
        all_certified &= above.count() == pts.len();
        let mu = slab_lower_bound(&above, &SlabMeasure::new(d, s)?)?;
        let mut row = vec![num(tt), num(s), halvings.into(), above.count().into(), num(mu)];
        for (k, &beta) in betas.iter().enumerate() {
            let lb = tt * mu.powf((d as f64 - beta) / (d as f64 - 1.0));
            lowers[k].push(lb);
            row.push(num(lb));
        }
        t.push(row);
    }
    r.tables.push(t);
    r.check(
        "plane_certified",
        all_certified,
        format!("every plane sample exceeds t at s(t) for all {} thresholds", t_list.len()),
    );
    let expect = t_list[t_list.len() - 1] / t_list[0];
    for (k, &beta) in betas.iter().enumerate() {
        let l = &lowers[k];
        let got = l[l.len() - 1] / l[0];
        let e = (got - expect).abs() / expect;
        if beta < 1.0 {
            r.verdict(
                &format!("growth_beta_{beta}"),
                Status::Observe,
                format!("exploratory order: lower bound grows {got:.4}x vs t ratio {expect:.4}"),
            );
            continue;
        }
        r.check(
            &format!("growth_beta_{beta}"),
            e <= GROWTH_TOL && l.windows(2).all(|w| w[1] > w[0]),
            format!("lower bound grows {got:.4}x vs t ratio {expect:.4} ({:.2}% off), monotone", 100.0 * e),
        );
    }
    let mut o = Outcome::from(r);
    o.plots.push(Plot::new(
        "weaktype_lower_bound",
        "t",
        &format!("lower_bound_beta_{}", betas[0]),
        t_list.iter().copied().zip(lowers[0].iter().copied()).collect(),
    ));
    Ok(o)
}

/// The unit cube's boundary with exterior normals.
pub fn unit_cube_surface(d: usize) -> Result<SurfaceMeasure> {
    let mut faces = Vec::with_capacity(2 * d);
    for axis in 0..d {
        for sign in [-1.0, 1.0] {
            let mut center = [0.0; MAX_DIM];
            let mut half = [0.0; MAX_DIM];
            for a in 0..d {
                if a == axis {
                    center[a] = if sign > 0.0 { 1.0 } else { 0.0 };
                } else {
                    center[a] = 0.5;
                    half[a] = 0.5;
                }
            }
            faces.push(Face { center, axis, sign, half });
        }
    }
    SurfaceMeasure::new(d, faces)
}

/// Breakpoints in units of `sigma` for the Gaussian-weighted rules; the
/// extra break at `-s / sigma` puts the crossing of the near face on a
/// panel boundary.
fn offset_breaks(s_over_sigma: f64) -> Vec<f64> {
    let mut b = vec![-6.0, -4.0, -2.0, 0.0, 2.0, 4.0, 6.0];
    if s_over_sigma < 6.0 {
        b.push(-s_over_sigma);
    }
    b.sort_by(f64::total_cmp);
    b.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    b
}

fn nodes_on(breaks: &[f64], rule: &GaussLegendre) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, wt) in rule.nodes().iter().zip(rule.weights()) {
            out.push((m + h * x, h * wt));
        }
    }
    out
}

fn gauss_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// `int_{Q'} |(I_1 D chi_Q) * rho_sigma (x', -s)| dx'` with `rho_sigma`
/// the Gaussian of standard deviation `sigma` per axis.
fn trace_numerator(d: usize, s: f64, sigma: f64) -> Result<f64> {
    let surf = unit_cube_surface(d)?;
    let rule = GaussLegendre::new(6);
    // Normal offsets carry the near-face crossing; tangential ones do not.
    let normal = nodes_on(&offset_breaks(s / sigma), &rule);
    let tangent = nodes_on(&offset_breaks(f64::INFINITY), &rule);
    // Outer rule on [0, 1], graded towards both edges.
    let mut breaks = vec![0.0, 0.5, 1.0];
    let mut w = s;
    while w < 0.5 {
        breaks.push(w);
        breaks.push(1.0 - w);
        w *= 2.0;
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
    let outer = nodes_on(&breaks, &GaussLegendre::new(4));
    let outer_pts: Vec<(Vec<f64>, f64)> = if d == 2 {
        outer.iter().map(|(x, w)| (vec![*x], *w)).collect()
    } else {
        outer
            .iter()
            .flat_map(|(x, wx)| outer.iter().map(move |(y, wy)| (vec![*x, *y], wx * wy)))
            .collect()
    };
    // Tensor offsets z (in units of sigma) with Gaussian weights.
    let mut offsets: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
    for axis in 0..d {
        let nodes = if axis == d - 1 { &normal } else { &tangent };
        offsets = offsets
            .into_iter()
            .flat_map(|(z, w)| {
                nodes.iter().map(move |(x, wx)| {
                    let mut z = z.clone();
                    z.push(*x);
                    (z, w * wx * gauss_pdf(*x))
                })
            })
            .collect();
    }
    let mut total = 0.0;
    for (xp, wx) in &outer_pts {
        let pts: Vec<Vec<f64>> = offsets
            .iter()
            .map(|(z, _)| {
                let mut p: Vec<f64> = xp.iter().zip(z).map(|(x, zz)| x - sigma * zz).collect();
                p.push(-s - sigma * z[d - 1]);
                p
            })
            .collect();
        let vals = riesz_surface_many(&surf, 1.0, &pts)?;
        let mut v = vec![0.0; d];
        for ((_, w), f) in offsets.iter().zip(&vals) {
            for a in 0..d {
                v[a] += w * f[a];
            }
        }
        total += wx * v.iter().map(|c| c * c).sum::<f64>().sqrt();
    }
    Ok(total)
}

/// `int |grad (chi_Q * rho_sigma)|` over `R^d`.
fn trace_denominator(d: usize, sigma: f64) -> f64 {
    let rule = GaussLegendre::new(8);
    let mut b = vec![-0.5, 1.5];
    for c in [0.0, 1.0] {
        b.push(c);
        for k in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
            for sgn in [-1.0, 1.0] {
                let v: f64 = c + sgn * k * sigma;
                if v > -0.5 && v < 1.5 {
                    b.push(v);
                }
            }
        }
    }
    b.sort_by(f64::total_cmp);
    b.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
    let nodes = nodes_on(&b, &rule);
    let g = |x: f64| smoothed_box(&[x], &[0.0], &[1.0], sigma);
    let dg = |x: f64| (gauss_pdf(x / sigma) - gauss_pdf((x - 1.0) / sigma)) / sigma;
    let vals: Vec<(f64, f64, f64)> = nodes.iter().map(|(x, w)| (g(*x), dg(*x), *w)).collect();
    let mut total = 0.0;
    if d == 2 {
        for (gx, dx, wx) in &vals {
            for (gy, dy, wy) in &vals {
                total += wx * wy * ((dx * gy).powi(2) + (gx * dy).powi(2)).sqrt();
            }
        }
    } else {
        for (gx, dx, wx) in &vals {
            for (gy, dy, wy) in &vals {
                for (gz, dz, wz) in &vals {
                    let a = dx * gy * gz;
                    let b = gx * dy * gz;
                    let c = gx * gy * dz;
                    total += wx * wy * wz * (a * a + b * b + c * c).sqrt();
                }
            }
        }
    }
    total
}

/// `D^alpha u = D(chi_Q * rho)` for `u = (-Delta)^((1-alpha)/2)(chi_Q * rho)`
/// on the interior `[-0.5, 1.5]^d`.
fn consistency(cfg: &TracefailConfig) -> Result<f64> {
    let d = cfg.d;
    let grid = cfg.consistency_grid.build(d)?;
    let sigma = cfg.consistency_width;
    let h = grid.spacings().into_iter().fold(0.0, f64::max);
    if sigma < 2.0 * h {
        return Err(Error::Precondition(format!(
            "mollifier width {sigma} is below 2h = {}; the grid does not resolve it",
            2.0 * h
        )));
    }
    let lo = vec![0.0; d];
    let hi = vec![1.0; d];
    let v = ScalarField::from_fn(grid.clone(), |x| smoothed_box(x, &lo, &hi, sigma))?;
    let u = frac_laplacian(&v, 1.0 - cfg.alpha)?;
    let du = frac_gradient(&u, cfg.alpha)?;
    let keep = |i: usize| {
        let x = grid.center(i);
        (0..d).all(|a| x[a] >= -0.5 && x[a] <= 1.5)
    };
    let mut num_sq = 0.0;
    let mut den_sq = 0.0;
    for k in 0..d {
        let exact: Vec<f64> = (0..grid.len())
            .map(|i| {
                let x = grid.center(i);
                (0..d)
                    .map(|a| {
                        if a == k {
                            (gauss_pdf(x[a] / sigma) - gauss_pdf((x[a] - 1.0) / sigma)) / sigma
                        } else {
                            smoothed_box(&[x[a]], &[0.0], &[1.0], sigma)
                        }
                    })
                    .product()
            })
            .collect();
        let e = l2_relative(du.component(k), &exact, keep);
        let norm: f64 = (0..grid.len()).filter(|i| keep(*i)).map(|i| exact[i] * exact[i]).sum();
        num_sq += e * e * norm;
        den_sq += norm;
    }
    Ok((num_sq / den_sq).sqrt())
}

/// Trace ratio `int |D I_1 (chi_Q * rho)| d mu_s / int |D (chi_Q * rho)|`
/// with mollifier width `width_factor * s`, across the offsets.
pub fn verify_trace_failure(cfg: &TracefailConfig) -> Result<Outcome> {
    let d = cfg.d;
    check_dim(d)?;
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(Error::order(cfg.alpha, "trace experiment needs order in (0, 1)"));
    }
    if cfg.s.len() < 2 || cfg.s.windows(2).any(|w| !(w[1] < w[0])) || cfg.s.iter().any(|s| !(*s > 0.0 && *s < 1.0)) {
        return Err(Error::Config("tracefail.s must be strictly decreasing offsets in (0, 1)".into()));
    }
    if !(cfg.width_factor > 0.0 && cfg.width_factor < 1.0) {
        return Err(Error::param("width_factor", cfg.width_factor, "mollifier width must be a fraction of s"));
    }
    let per = 2.0 * d as f64;
    let mut r = Report::new("tracefail");
    r.input("d", d)
        .input("alpha", cfg.alpha)
        .input("s", json!(cfg.s))
        .input("width_factor", cfg.width_factor)
        .input("consistency_grid", json!(cfg.consistency_grid))
        .input("consistency_width", cfg.consistency_width);
    r.schedule("mollifier", json!({"width": "width_factor * s"}));
    let mut t = Table::new("trace", &["s", "sigma", "numerator", "denominator", "ratio"]);
    let mut ratios = Vec::new();
    let mut den_ok = true;
    for &s in &cfg.s {
        let sigma = cfg.width_factor * s;
        let n = trace_numerator(d, s, sigma)?;
        let dn = trace_denominator(d, sigma);
        den_ok &= (dn - per).abs() <= PERIMETER_TOL * per;
        let ratio = n / dn;
        ratios.push(ratio);
        t.push(vec![num(s), num(sigma), num(n), num(dn), num(ratio)]);
    }
    r.tables.push(t);
    let growth = ratios[ratios.len() - 1] / ratios[0];
    r.check(
        "growth",
        growth >= TRACE_GROWTH,
        format!("ratio grows {growth:.3}x from s = {} to s = {}", cfg.s[0], cfg.s[cfg.s.len() - 1]),
    );
    r.check(
        "denominator",
        den_ok,
        format!("int |D(chi_Q * rho)| within {PERIMETER_TOL} of Per(Q) = {per}"),
    );
    r.check(
        "monotone",
        ratios.windows(2).all(|w| w[1] >= w[0] * (1.0 - MONOTONE_NOISE)),
        "ratio nondecreasing as s decreases, up to 2% noise",
    );
    let c = consistency(cfg)?;
    r.check(
        "consistency",
        c <= CONSISTENCY_TOL,
        format!("D^alpha u vs D(chi_Q * rho): L2-relative {c:.2e} on [-0.5, 1.5]^{d}"),
    );
    if d == 3 {
        r.verdict("dimension", Status::Observe, "three-dimensional run");
    }
    let mut o = Outcome::from(r);
    o.plots.push(Plot::new(
        "trace_ratio",
        "s",
        "trace_ratio",
        cfg.s.iter().copied().zip(ratios.iter().copied()).collect(),
    ));
    Ok(o)
}
