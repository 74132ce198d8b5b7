use serde_json::json;

use crate::error::{Error, Result};
use crate::fields::{bump, Grid, ScalarField};
use crate::kernels::omega;
use crate::norms::{lorentz_p1_auto, lp_norm, Distribution};
use crate::potentials::{frac_gradient, gradient};
use crate::report::{num, Report, Status, Table};

use super::{ClassicalConfig, LorentzConfig, Outcome, SobolevConfig};

/// Indicator exactness and the `L^p <= L^{p,1}` chain.
pub const NORM_TOL: f64 = 0.005;
/// Sobolev ratio under one grid refinement.
pub const REFINE_TOL: f64 = 0.10;
/// Sobolev ratio when the bump and the box are dilated together.
pub const SCALE_TOL: f64 = 1e-9;
/// Discretization slack on the sharp classical constants.
pub const CLASSICAL_SLACK: f64 = 0.02;

fn lorentz(u: &ScalarField, p: f64) -> Result<f64> {
    lorentz_p1_auto(&Distribution::from_field(u), p)
}

fn lebesgue(u: &ScalarField, p: f64) -> Result<f64> {
    lp_norm(&Distribution::from_field(u), p)
}

fn dual(d: usize) -> f64 {
    d as f64 / (d as f64 - 1.0)
}

/// `||chi_E||_{L^{p,1}} = |E|^(1/p)` on the family, and
/// `||u||_{L^p} <= ||u||_{L^{p,1}}` with `p = d/(d-1)` on the family and a bump.
pub fn verify_lorentz(cfg: &LorentzConfig) -> Result<Outcome> {
    let d = cfg.d;
    let grid = cfg.grid.build(d)?;
    let p = dual(d);
    let mut r = Report::new("lorentz");
    r.input("d", d)
        .input("grid", json!(cfg.grid))
        .input("exponents", json!(cfg.exponents))
        .input("bump_radius", cfg.bump_radius);
    let mut it = Table::new("indicator", &["set", "p", "lorentz", "volume_power", "relative_error"]);
    let mut worst = 0.0f64;
    let mut fields: Vec<(String, ScalarField)> = Vec::new();
    for spec in &cfg.sets {
        let set = spec.shape.build(&grid)?;
        let chi = set.indicator();
        for &q in &cfg.exponents {
            let l = lorentz(&chi, q)?;
            let exact = set.volume().powf(1.0 / q);
            let e = (l - exact).abs() / exact;
            worst = worst.max(e);
            it.push(vec![spec.name.clone().into(), num(q), num(l), num(exact), num(e)]);
        }
        fields.push((spec.name.clone(), chi));
    }
    r.tables.push(it);
    r.check(
        "indicator_exact",
        worst <= NORM_TOL,
        format!("max relative error {worst:.2e} (tolerance {NORM_TOL})"),
    );

    let center: Vec<f64> = (0..d).map(|a| grid.origin()[a] + 0.5 * grid.extent()[a]).collect();
    fields.push(("bump".into(), bump(&grid, &center, cfg.bump_radius)?));
    let mut ct = Table::new("chain", &["field", "lebesgue", "lorentz"]);
    let mut chain_ok = true;
    for (name, u) in &fields {
        let a = lebesgue(u, p)?;
        let b = lorentz(u, p)?;
        chain_ok &= a <= b * (1.0 + NORM_TOL);
        ct.push(vec![name.clone().into(), num(a), num(b)]);
    }
    r.tables.push(ct);
    r.check(
        "chain",
        chain_ok,
        format!("||u||_(L^{p}) <= ||u||_(L^({p},1)) within {NORM_TOL} on every field"),
    );
    Ok(r.into())
}

fn centered_grid(d: usize, half: f64, n: usize) -> Result<Grid> {
    Grid::uniform(d, -half, half, n)
}

fn inner_bump(d: usize, half: f64, n: usize, radius: f64) -> Result<ScalarField> {
    if !(radius > 0.0 && radius <= 0.5 * half) {
        return Err(Error::Precondition(format!(
            "bump radius {radius} must lie in (0, {}] so the support stays in the inner half-box",
            0.5 * half
        )));
    }
    bump(&centered_grid(d, half, n)?, &vec![0.0; d], radius)
}

/// `||u||_{L^{d/(d-alpha),1}} / ||D^alpha u||_{L^1}`, or `None` for `u = 0`.
pub fn sobolev_ratio(u: &ScalarField, alpha: f64) -> Result<Option<f64>> {
    let d = u.grid().dim() as f64;
    let top = lorentz(u, d / (d - alpha))?;
    let g = frac_gradient(u, alpha)?;
    let bottom = lp_norm(&Distribution::from_vector(&g, |_| true), 1.0)?;
    if top == 0.0 && bottom == 0.0 {
        return Ok(None);
    }
    Ok(Some(top / bottom))
}

/// Observed Sobolev-Lorentz ratio of a bump with its refinement and
/// dilation stability.
pub fn verify_sobolev(cfg: &SobolevConfig) -> Result<Report> {
    let (d, a) = (cfg.d, cfg.alpha);
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::order(a, "fractional gradient needs order in (0, 1)"));
    }
    let mut r = Report::new("sobolev");
    r.input("d", d)
        .input("alpha", a)
        .input("n", cfg.n)
        .input("half", cfg.half)
        .input("bump_radius", cfg.bump_radius)
        .input("scale", cfg.scale);
    let mut t = Table::new("ratios", &["case", "n", "half_width", "bump_radius", "ratio"]);
    let mut ratio = |n: usize, half: f64, rad: f64, case: &str| -> Result<f64> {
        let v = sobolev_ratio(&inner_bump(d, half, n, rad)?, a)?
            .ok_or_else(|| Error::Degenerate("bump vanished on the grid".into()))?;
        t.push(vec![case.into(), n.into(), num(half), num(rad), num(v)]);
        Ok(v)
    };
    // The dilated case shrinks the box with the bump, so the truncated
    // tail of D^a u is the same fraction of the total.
    let base = ratio(cfg.n, cfg.half, cfg.bump_radius, "base")?;
    let fine = ratio(2 * cfg.n, cfg.half, cfg.bump_radius, "refined")?;
    let scaled = ratio(cfg.n, cfg.half / cfg.scale, cfg.bump_radius / cfg.scale, "dilated")?;
    r.tables.push(t);
    r.verdict("ratio", Status::Observe, format!("||u||_(L^(p,1)) / ||D^a u||_1 = {base:.5}"));
    let dr = (base - fine).abs() / fine;
    r.check("refinement", dr <= REFINE_TOL, format!("n -> 2n changes the ratio by {:.2}%", 100.0 * dr));
    let ds = (scaled - base).abs() / base;
    r.check("dilation", ds <= SCALE_TOL, format!("u(lambda x) changes the ratio by {:.2}%", 100.0 * ds));
    let zero = ScalarField::zeros(centered_grid(d, cfg.half, cfg.n)?);
    let vacuous = sobolev_ratio(&zero, a)?.is_none();
    r.verdict(
        "zero_field",
        if vacuous { Status::Observe } else { Status::Fail },
        "u = 0 gives 0/0, reported as vacuous",
    );
    Ok(r)
}

/// `int |u| / |x|` over the cell centers.
fn hardy_integral(u: &ScalarField) -> Result<f64> {
    let g = u.grid();
    let d = g.dim();
    let mut s = 0.0;
    for i in 0..g.len() {
        let x = g.center(i);
        let r = x[..d].iter().map(|v| v * v).sum::<f64>().sqrt();
        if r == 0.0 {
            return Err(Error::Singular("a cell center sits at the origin".into()));
        }
        s += u.values()[i].abs() / r;
    }
    Ok(s * g.cell_volume())
}

/// Gagliardo-Nirenberg, Alvino and Hardy ratios of a bump against their
/// sharp constants, plus the Lebesgue/Lorentz chain.
pub fn classical_checks(cfg: &ClassicalConfig) -> Result<Report> {
    let d = cfg.d;
    let u = inner_bump(d, cfg.half, cfg.n, cfg.bump_radius)?;
    let grad = lp_norm(&Distribution::from_vector(&gradient(&u), |_| true), 1.0)?;
    let p = dual(d);
    let leb = lebesgue(&u, p)?;
    let lor = lorentz(&u, p)?;
    let hardy = hardy_integral(&u)?;
    let iso = 1.0 / (d as f64 * omega(d as f64)?.powf(1.0 / d as f64));
    let hardy_c = 1.0 / (d as f64 - 1.0);
    let mut r = Report::new("classical");
    r.input("d", d).input("n", cfg.n).input("half", cfg.half).input("bump_radius", cfg.bump_radius).input("shift", cfg.shift);
    let mut t = Table::new("ratios", &["inequality", "ratio", "sharp_constant"]);
    t.push(vec!["gagliardo_nirenberg".into(), num(leb / grad), num(iso)]);
    t.push(vec!["alvino".into(), num(lor / grad), num(iso)]);
    t.push(vec!["hardy".into(), num(hardy / grad), num(hardy_c)]);
    r.tables.push(t);
    let ok = |v: f64, c: f64| v <= c * (1.0 + CLASSICAL_SLACK);
    r.check("gagliardo_nirenberg", ok(leb / grad, iso), format!("{:.5} <= {iso:.5}", leb / grad));
    r.check("alvino", ok(lor / grad, iso), format!("{:.5} <= {iso:.5}", lor / grad));
    r.check("hardy", ok(hardy / grad, hardy_c), format!("{:.5} <= {hardy_c:.5}", hardy / grad));
    r.check(
        "chain",
        leb <= lor * (1.0 + NORM_TOL),
        format!("||u||_(L^{p}) = {leb:.6e} <= ||u||_(L^({p},1)) = {lor:.6e}"),
    );
    let mut c = vec![0.0; d];
    c[0] = cfg.shift;
    let moved = bump(u.grid(), &c, cfg.bump_radius)?;
    let hm = hardy_integral(&moved)?;
    r.check(
        "hardy_translation",
        hm < hardy,
        format!("shifting by {} lowers int |u|/|x| from {hardy:.5} to {hm:.5}", cfg.shift),
    );
    Ok(r)
}
