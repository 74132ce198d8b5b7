//! Acceptance suite: one PASS/FAIL line per criterion. Tolerances are
//! pinned here, independent of the constants the library judges itself by.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use fracgrad_core::fields::{bump, indicator_ball, indicator_cube, sup_relative, Grid, ScalarField};
use fracgrad_core::norms::{lorentz_p1_auto, lp_norm, Distribution};
use fracgrad_core::potentials::{riesz_direct, riesz_direct_at, riesz_fft, semigroup_check};
use fracgrad_core::report::Report;
use fracgrad_core::verify::{
    counterexample_profile, verify_lemma1, verify_lemma2, verify_trace_failure, weak_type_growth, Lemma1Config,
    Lemma2Config, TracefailConfig, WeaktypeConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

const ORACLE_SUP: f64 = 1e-6;
const ORACLE_TIME: Duration = Duration::from_secs(30);
const BALL_REL: f64 = 0.01;
const SEMIGROUP_L2: f64 = 0.02;
const DILATION_SPREAD: f64 = 0.05;
const SLOPE_REL: f64 = 0.01;
const FIT_RESIDUAL: f64 = 0.02;
const PROFILE_TIME: Duration = Duration::from_secs(60);
const WEAK_RATIO: f64 = 0.10;
const TRACE_GROWTH: f64 = 4.0;
const PERIMETER_REL: f64 = 0.02;
const MONOTONE_NOISE: f64 = 0.02;
const NORM_REL: f64 = 0.005;
const END_TO_END: Duration = Duration::from_secs(600);

type Outcome = Result<String, String>;

fn gamma_norm(d: f64, a: f64) -> f64 {
    PI.powf(d / 2.0) * 2f64.powf(a) * gamma(a / 2.0) / gamma(d / 2.0 - a / 2.0)
}

fn column(r: &Report, table: &str, col: &str) -> Vec<f64> {
    r.table(table).and_then(|t| t.column(col)).unwrap_or_default()
}

fn random_field(d: usize, n: usize, rng: &mut ChaCha8Rng) -> ScalarField {
    let g = Grid::uniform(d, 0.0, 1.0, n).unwrap();
    let v = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ScalarField::new(g, v).unwrap()
}

fn c1_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for (d, n) in [(2, 32), (3, 16)] {
        let f = random_field(d, n, &mut rng);
        for a in [0.5, 1.0] {
            let e = sup_relative(
                riesz_fft(&f, a).map_err(|e| e.to_string())?.values(),
                riesz_direct(&f, a).map_err(|e| e.to_string())?.values(),
            );
            worst = worst.max(e);
        }
    }
    let t = start.elapsed();
    let msg = format!("max sup-relative {worst:.2e}, {:.1}s", t.as_secs_f64());
    if worst < ORACLE_SUP && t < ORACLE_TIME {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c2_ball_center() -> Outcome {
    let (rad, half) = (1.0, 128);
    let g = Grid::centered_on(2, &[0.0, 0.0], half + 2, rad / half as f64).unwrap();
    let chi = indicator_ball(&g, &[0.0, 0.0], rad).unwrap().indicator();
    let center = g.ravel(&[half + 2, half + 2]);
    let mut worst = 0.0f64;
    for a in [0.3, 0.5, 0.7] {
        let v = riesz_direct_at(&chi, a, center).map_err(|e| e.to_string())?;
        let exact = 2.0 * PI * rad.powf(a) / a / gamma_norm(2.0, a);
        worst = worst.max((v - exact).abs() / exact);
    }
    let msg = format!("256 cells across the diameter: max relative error {:.3}%", 100.0 * worst);
    if worst < BALL_REL {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c3_semigroup() -> Outcome {
    let g = Grid::uniform(2, -1.0, 1.0, 128).unwrap();
    let f = bump(&g, &[0.0, 0.0], 0.4).unwrap();
    let r = semigroup_check(&f, 0.3, 0.4, 4).map_err(|e| e.to_string())?;
    let dev = column(&r, "deviation", "l2_relative")[0];
    let msg = format!("128^2 bump, pad 4: L2-relative {dev:.3e}");
    if dev < SEMIGROUP_L2 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c4_lemma1() -> Outcome {
    let cfg = Lemma1Config::default();
    if cfg.d != 2 || cfg.alphas != [0.3, 0.5, 0.7] {
        return Err("default lemma1 config drifted from the criterion".into());
    }
    let sets = cfg.build_sets().map_err(|e| e.to_string())?;
    let names: Vec<&str> = sets.iter().map(|(n, _)| n.as_str()).collect();
    if !(names.contains(&"cube") && names.contains(&"ball")) {
        return Err(format!("sets {names:?} lack cube or ball"));
    }
    let r = verify_lemma1(&sets, &cfg.alphas, cfg.per_decade).map_err(|e| e.to_string())?;
    let samples: f64 = column(&r, "lemma1", "samples").iter().sum();
    let violations: f64 = column(&r, "lemma1", "violations").iter().sum();
    let worst = column(&r, "lemma1", "max_ratio").into_iter().fold(0.0, f64::max);
    let msg = format!("{violations} violations in {samples} samples, max LHS/RHS {worst:.4} (2% slack)");
    if violations == 0.0 && samples > 0.0 && worst <= 1.02 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c5_lemma2() -> Outcome {
    let cfg = Lemma2Config::default();
    let sets = cfg.build_sets().map_err(|e| e.to_string())?;
    if sets.len() != 6 || cfg.dilations != [0.5, 1.0, 2.0, 4.0] {
        return Err("default lemma2 config drifted from the criterion".into());
    }
    let r = verify_lemma2(&sets, cfg.alpha, &cfg.dilations).map_err(|e| e.to_string())?;
    let t = r.table("dilations").ok_or("no dilations table")?;
    let set_col = t.columns.iter().position(|c| c == "set").ok_or("no set column")?;
    let ratio_col = t.columns.iter().position(|c| c == "ratio").ok_or("no ratio column")?;
    let mut by_set: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for row in &t.rows {
        let name = row[set_col].as_str().unwrap_or_default().to_string();
        by_set.entry(name).or_default().push(row[ratio_col].as_f64().unwrap_or(f64::NAN));
    }
    let mut spread = 0.0f64;
    let mut max_ratio = 0.0f64;
    for v in by_set.values() {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(0.0, f64::max);
        spread = spread.max((hi - lo) / lo);
        max_ratio = max_ratio.max(hi);
    }
    let msg = format!("max dilation spread {:.2e} over {} sets, max ratio {max_ratio:.4}", spread, by_set.len());
    if by_set.len() == 6 && spread <= DILATION_SPREAD && max_ratio.is_finite() && max_ratio > 0.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c6_counterexample() -> Outcome {
    let start = Instant::now();
    let s = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
    let o = counterexample_profile(2, &s, 7).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    let v = column(&o.report, "profile", "center");
    // Own least-squares fit against ln(1/s).
    let x: Vec<f64> = s.iter().map(|s| (1.0 / s).ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, v.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&v).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let b = my - slope * mx;
    let rms = (x.iter().zip(&v).map(|(a, y)| (y - slope * a - b).powi(2)).sum::<f64>() / n).sqrt();
    let scale = (v.iter().map(|y| y * y).sum::<f64>() / n).sqrt();
    let res = rms / scale;
    let e = (slope - 2.0).abs() / 2.0;
    let msg = format!(
        "slope {slope:.5} ({:.3}% from 2), residual {:.3}%, {:.2}s",
        100.0 * e,
        100.0 * res,
        t.as_secs_f64()
    );
    if e < SLOPE_REL && res < FIT_RESIDUAL && t < PROFILE_TIME {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c7_weak_type() -> Outcome {
    let cfg = WeaktypeConfig::default();
    let t_list = [5.0, 10.0, 20.0, 40.0];
    let o = weak_type_growth(2, &[1.0], &t_list, &cfg.fit_s, false).map_err(|e| e.to_string())?;
    let lb = column(&o.report, "growth", "lower_beta_1");
    if lb.len() != 4 {
        return Err(format!("expected 4 lower bounds, got {}", lb.len()));
    }
    let ratios: Vec<f64> = lb.iter().map(|v| v / lb[0]).collect();
    let ok = ratios.iter().zip([1.0, 2.0, 4.0, 8.0]).all(|(r, e)| (r - e).abs() <= WEAK_RATIO * e);
    let msg = format!(
        "ratios {} (target 1:2:4:8 within 10%)",
        ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(":")
    );
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c8_trace() -> Outcome {
    let cfg = TracefailConfig { s: vec![1e-1, 1e-2, 1e-3, 1e-4], ..TracefailConfig::default() };
    let o = verify_trace_failure(&cfg).map_err(|e| e.to_string())?;
    let ratio = column(&o.report, "trace", "ratio");
    let den = column(&o.report, "trace", "denominator");
    let growth = ratio[ratio.len() - 1] / ratio[0];
    let den_err = den.iter().map(|v| (v - 4.0).abs() / 4.0).fold(0.0, f64::max);
    let monotone = ratio.windows(2).all(|w| w[1] >= w[0] * (1.0 - MONOTONE_NOISE));
    let msg = format!(
        "growth {growth:.3}x, denominator max deviation {:.2}% from Per(Q) = 4, monotone {monotone}",
        100.0 * den_err
    );
    if growth >= TRACE_GROWTH && den_err <= PERIMETER_REL && monotone {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c9_norms() -> Outcome {
    let g = Grid::uniform(2, -1.0, 2.0, 96).unwrap();
    let sets = [
        indicator_cube(&g, &[0.0, 0.0], 1.0).unwrap(),
        indicator_ball(&g, &[0.5, 0.5], 0.6).unwrap(),
    ];
    let mut worst = 0.0f64;
    let mut chain = true;
    let mut fields: Vec<ScalarField> = Vec::new();
    for set in &sets {
        let chi = set.indicator();
        for p in [1.5, 2.0, 4.0] {
            let l = lorentz_p1_auto(&Distribution::from_field(&chi), p).map_err(|e| e.to_string())?;
            let exact = set.volume().powf(1.0 / p);
            worst = worst.max((l - exact).abs() / exact);
        }
        fields.push(chi);
    }
    fields.push(bump(&g, &[0.5, 0.5], 0.8).unwrap());
    for u in &fields {
        let dist = Distribution::from_field(u);
        let a = lp_norm(&dist, 2.0).map_err(|e| e.to_string())?;
        let b = lorentz_p1_auto(&dist, 2.0).map_err(|e| e.to_string())?;
        chain &= a <= b * (1.0 + NORM_REL);
    }
    let msg = format!("indicator max relative error {worst:.2e}, chain holds {chain}");
    if worst <= NORM_REL && chain {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn collect(dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            collect(&p, out);
        } else {
            out.insert(p.display().to_string(), fs::read(&p).unwrap());
        }
    }
}

fn c10_end_to_end() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_fracgrad");
    let mut runs = Vec::new();
    let mut worst = Duration::ZERO;
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let start = Instant::now();
        let status = Command::new(bin)
            .args(["all", "--quiet", "--out"])
            .arg(dir.path())
            .status()
            .map_err(|e| e.to_string())?;
        let t = start.elapsed();
        worst = worst.max(t);
        if status.code() != Some(0) {
            return Err(format!("`all` exited with {status} after {:.1}s", t.as_secs_f64()));
        }
        let mut files = BTreeMap::new();
        collect(dir.path(), &mut files);
        let files: BTreeMap<String, Vec<u8>> = files
            .into_iter()
            .map(|(k, v)| (k.trim_start_matches(&*dir.path().display().to_string()).to_string(), v))
            .collect();
        runs.push(files);
    }
    let same = runs[0] == runs[1];
    let msg = format!(
        "exit 0, slowest run {:.1}s, {} artifacts identical across runs: {same}",
        worst.as_secs_f64(),
        runs[0].len()
    );
    if same && worst < END_TO_END && !runs[0].is_empty() {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 oracle equivalence", c1_oracle),
        ("2 ball center closed form", c2_ball_center),
        ("3 semigroup", c3_semigroup),
        ("4 pointwise interpolation bound", c4_lemma1),
        ("5 dilation invariance", c5_lemma2),
        ("6 logarithmic blow-up", c6_counterexample),
        ("7 weak-type growth", c7_weak_type),
        ("8 trace ratio", c8_trace),
        ("9 norm chain", c9_norms),
        ("10 end to end", c10_end_to_end),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(m) => println!("PASS criterion {name}: {m}"),
            Err(m) => {
                failed += 1;
                println!("FAIL criterion {name}: {m}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
