use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::content::{
    content_upper, potential_of_slab, projection_lower_bound, slab_lower_bound, subordination_check,
    SlabMeasure,
};
use crate::error::{Error, Result};
use crate::fields::{bump, indicator_ball, l2_relative, sup_relative, Grid, ScalarField};
use crate::kernels::gamma_norm_checked;
use crate::potentials::{riesz_direct, riesz_direct_at, riesz_fft, riesz_heat, semigroup_check, SemigroupQuadrature};
use crate::report::{num, Report, Table};

use super::{ContentConfig, Outcome, PotentialConfig};

/// FFT and direct summation agree to this sup-relative error.
pub const ORACLE_TOL: f64 = 1e-6;
/// Ball-center potential against its closed form.
pub const BALL_TOL: f64 = 0.01;
/// Heat-semigroup path against direct summation, L2-relative.
pub const HEAT_TOL: f64 = 0.02;
/// Growth ratio of the slab potential under one grid refinement.
pub const GROWTH_TOL: f64 = 0.10;

fn random_field(grid: Grid, rng: &mut ChaCha8Rng) -> Result<ScalarField> {
    let vals = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ScalarField::new(grid, vals)
}

/// FFT-vs-direct oracle on random fields, ball-center closed form,
/// semigroup identity, and the three evaluation paths on a bump.
pub fn verify_potential(cfg: &PotentialConfig, seed: u64) -> Result<Outcome> {
    let mut r = Report::new("potential");
    r.input("seed", seed)
        .input("alphas", json!(cfg.alphas))
        .input("oracle_alpha", cfg.oracle_alpha)
        .input("ball_radius", cfg.ball_radius)
        .input("ball_cells", cfg.ball_cells)
        .input("bump_radius", cfg.bump_radius);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut oracle = Table::new("oracle", &["dim", "n", "alpha", "sup_relative"]);
    for (d, n) in [(2, cfg.oracle_n2), (3, cfg.oracle_n3)] {
        let f = random_field(Grid::uniform(d, 0.0, 1.0, n)?, &mut rng)?;
        let err = sup_relative(riesz_fft(&f, cfg.oracle_alpha)?.values(), riesz_direct(&f, cfg.oracle_alpha)?.values());
        oracle.push(vec![d.into(), n.into(), num(cfg.oracle_alpha), num(err)]);
        r.check(
            &format!("fft_vs_direct_{d}d"),
            err < ORACLE_TOL,
            format!("{n}^{d} random field: sup-relative {err:.2e} (tolerance {ORACLE_TOL:e})"),
        );
    }
    r.tables.push(oracle);

    if cfg.ball_cells < 8 || cfg.ball_cells % 2 != 0 {
        return Err(Error::Config(format!("potential.ball_cells = {}: need an even count of at least 8", cfg.ball_cells)));
    }
    let rad = cfg.ball_radius;
    let half = cfg.ball_cells / 2;
    let g = Grid::centered_on(2, &[0.0, 0.0], half + 2, rad / half as f64)?;
    let ball = indicator_ball(&g, &[0.0, 0.0], rad)?.indicator();
    let center = g.ravel(&[half + 2, half + 2]);
    let mut bt = Table::new("ball_center", &["alpha", "computed", "exact", "relative_error"]);
    for &a in &cfg.alphas {
        let v = riesz_direct_at(&ball, a, center)?;
        let exact = 2.0 * PI * rad.powf(a) / a / gamma_norm_checked(2, a)?;
        let e = (v - exact).abs() / exact;
        bt.push(vec![num(a), num(v), num(exact), num(e)]);
        r.check(
            &format!("ball_center_alpha_{a}"),
            e < BALL_TOL,
            format!("I_a chi_B(0) = {v:.6} vs {exact:.6}, error {:.3}%", 100.0 * e),
        );
    }
    r.tables.push(bt);

    let sg = Grid::uniform(2, -1.0, 1.0, cfg.semigroup_n)?;
    let f = bump(&sg, &[0.0, 0.0], cfg.bump_radius)?;
    let s = semigroup_check(&f, cfg.semigroup_alpha, cfg.semigroup_beta, cfg.semigroup_pad)?;
    r.input("semigroup_pad", cfg.semigroup_pad);
    r.tables.extend(s.tables);
    r.verdicts.extend(s.verdicts);

    let pg = Grid::uniform(2, -1.0, 1.0, cfg.paths_n)?;
    let f = bump(&pg, &[0.0, 0.0], cfg.bump_radius)?;
    let a = cfg.paths_alpha;
    let q = SemigroupQuadrature::for_grid(&pg, cfg.heat_nodes)?;
    r.schedule("semigroup_quadrature", json!({"t_min": q.t_min(), "t_max": q.t_max(), "nodes": q.len()}));
    let direct = riesz_direct(&f, a)?;
    let fft = riesz_fft(&f, a)?;
    let heat = riesz_heat(&f, a, &q)?;
    let mut pt = Table::new("paths", &["path", "sup_relative", "l2_relative"]);
    for (name, v) in [("fft", &fft), ("heat", &heat)] {
        pt.push(vec![
            name.into(),
            num(sup_relative(v.values(), direct.values())),
            num(l2_relative(v.values(), direct.values(), |_| true)),
        ]);
    }
    let heat_err = l2_relative(heat.values(), direct.values(), |_| true);
    r.tables.push(pt);
    r.check(
        "heat_path",
        heat_err < HEAT_TOL,
        format!("heat-semigroup path vs direct: L2-relative {heat_err:.2e} with {} nodes", q.len()),
    );
    let mut out = Outcome::from(r);
    out.fields = vec![
        ("potential_direct".into(), direct),
        ("potential_fft".into(), fft),
        ("potential_heat".into(), heat),
    ];
    Ok(out)
}

/// Cover certificates on the configured sets, the slab sandwich, the
/// subordination comparison and the growth of the slab potential.
pub fn verify_content(cfg: &ContentConfig) -> Result<Outcome> {
    let d = cfg.d;
    let grid = cfg.grid.build(d)?;
    let slab = SlabMeasure::new(d, cfg.slab_s)?;
    let mut r = Report::new("content");
    r.input("d", d)
        .input("betas", json!(cfg.betas))
        .input("grid", json!(cfg.grid))
        .input("slab_s", cfg.slab_s)
        .input("slab_alpha", cfg.slab_alpha)
        .input("radii", json!(cfg.radii));
    r.note(format!("slab growth constant C' = omega_(d-1) = {}", slab.growth_constant()));

    let mut ct = Table::new(
        "covers",
        &["set", "beta", "balls", "upper", "certified", "projection_lower", "slab_lower"],
    );
    let mut sub = Table::new("subordination", &["set", "beta", "lower_side", "upper"]);
    let mut sandwich_ok = true;
    let mut certified = true;
    let mut crossing = false;
    for spec in &cfg.sets {
        let set = spec.shape.build(&grid)?;
        let proj = projection_lower_bound(&set)?;
        let slab_lb = slab_lower_bound(&set, &slab)?;
        for &beta in &cfg.betas {
            let c = content_upper(&set, beta)?;
            certified &= c.certified && c.covers(&set);
            ct.push(vec![
                spec.name.clone().into(),
                num(beta),
                c.balls.len().into(),
                num(c.value),
                c.certified.into(),
                num(proj),
                num(slab_lb),
            ]);
            if beta == 1.0 {
                sandwich_ok &= slab_lb <= c.value && proj <= c.value;
            }
            if beta >= 1.0 {
                let s = subordination_check(&set, beta)?;
                let row = &s.table("bounds").expect("subordination table").rows[0];
                sub.push(vec![spec.name.clone().into(), num(beta), row[1].clone(), row[2].clone()]);
                crossing |= s.verdict_of("no_crossing") != Some(crate::report::Status::Pass);
            }
        }
    }
    r.tables.push(ct);
    r.tables.push(sub);
    r.check("certified", certified, "every cover contains every cell of its set");
    r.check("sandwich", sandwich_ok, "slab and projection lower bounds never exceed the beta = 1 cover value");
    r.check("subordination", !crossing, "lower side never exceeds the cover value");

    let coarse = cfg.slab_grid.build(d)?;
    let fine = Grid::new(coarse.origin(), coarse.extent(), &vec![2 * cfg.slab_grid.n; d])?;
    let pc = potential_of_slab(&slab, cfg.slab_alpha, &coarse, &cfg.radii)?;
    let pf = potential_of_slab(&slab, cfg.slab_alpha, &fine, &cfg.radii)?;
    let mut gt = Table::new("slab_growth", &["n", "radii_used", "growth_ratio"]);
    gt.push(vec![cfg.slab_grid.n.into(), pc.radii.len().into(), num(pc.growth_ratio)]);
    gt.push(vec![(2 * cfg.slab_grid.n).into(), pf.radii.len().into(), num(pf.growth_ratio)]);
    r.tables.push(gt);
    let rel = (pc.growth_ratio - pf.growth_ratio).abs() / pf.growth_ratio;
    r.check(
        "slab_growth",
        pc.growth_ratio.is_finite() && !pc.radii.is_empty() && pc.radii.len() == pf.radii.len() && rel <= GROWTH_TOL,
        format!(
            "growth ratio {:.4} (n={}) vs {:.4} (n={}), change {:.1}%",
            pc.growth_ratio,
            cfg.slab_grid.n,
            pf.growth_ratio,
            2 * cfg.slab_grid.n,
            100.0 * rel
        ),
    );
    let mut out = Outcome::from(r);
    out.fields.push(("slab_potential".into(), pf.field));
    Ok(out)
}
