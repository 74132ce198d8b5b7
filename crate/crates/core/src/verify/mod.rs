//! Experiments: each builds its inputs from an [`ExperimentConfig`]
//! section, runs the numerical modules and returns an [`Outcome`] whose
//! [`Report`] carries every table and verdict.

mod config;
mod divergence;
mod lemmas;
mod potential;
mod sobolev;

pub use config::*;
pub use divergence::{counterexample_profile, verify_trace_failure, weak_type_growth};
pub use lemmas::{verify_lemma1, verify_lemma2, verify_splitting, MAX_LEMMA1_ORDER};
pub use potential::{verify_content, verify_potential};
pub use sobolev::{classical_checks, verify_lorentz, verify_sobolev};

use crate::error::Result;
use crate::fields::{ScalarField, VoxelSet};
use crate::report::Report;

/// Cells of the boundary band excluded from every pointwise check.
pub const BAND: usize = 2;

/// Two-column plot data with a gnuplot-style header comment.
#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

impl Plot {
    pub fn new(name: &str, x_label: &str, y_label: &str, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            points,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("# {} {}\n", self.x_label, self.y_label);
        for (x, y) in &self.points {
            s.push_str(&format!("{x:e} {y:e}\n"));
        }
        s
    }
}

/// A report plus the artifacts it refers to.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub plots: Vec<Plot>,
    pub fields: Vec<(String, ScalarField)>,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Self {
            report,
            plots: Vec::new(),
            fields: Vec::new(),
        }
    }
}

/// Every experiment name accepted by [`run`], in the order `all` runs them.
pub const EXPERIMENTS: [&str; 11] = [
    "potential",
    "lorentz",
    "content",
    "lemma1",
    "splitting",
    "lemma2",
    "sobolev",
    "classical",
    "counterexample",
    "weaktype",
    "tracefail",
];

/// Runs one named experiment.
pub fn run(name: &str, cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    match name {
        "potential" => verify_potential(&cfg.potential, cfg.seed),
        "lorentz" => verify_lorentz(&cfg.lorentz),
        "content" => verify_content(&cfg.content),
        "lemma1" => {
            let c = &cfg.lemma1;
            let sets = c.build_sets()?;
            verify_lemma1(&sets, &c.alphas, c.per_decade).map(Outcome::from)
        }
        "splitting" => {
            let c = &cfg.splitting;
            let sets = c.build_sets()?;
            verify_splitting(&sets, c.alpha, c.per_decade).map(Outcome::from)
        }
        "lemma2" => {
            let c = &cfg.lemma2;
            let sets = c.build_sets()?;
            verify_lemma2(&sets, c.alpha, &c.dilations).map(Outcome::from)
        }
        "sobolev" => verify_sobolev(&cfg.sobolev).map(Outcome::from),
        "classical" => classical_checks(&cfg.classical).map(Outcome::from),
        "counterexample" => {
            let c = &cfg.counterexample;
            counterexample_profile(c.d, &c.s, cfg.seed)
        }
        "weaktype" => {
            let c = &cfg.weaktype;
            weak_type_growth(c.d, &c.betas, &c.t, &c.fit_s, c.exploratory)
        }
        "tracefail" => {
            let c = &cfg.tracefail;
            verify_trace_failure(c)
        }
        other => Err(crate::Error::Config(format!(
            "unknown experiment `{other}`; expected one of {}",
            EXPERIMENTS.join(", ")
        ))),
    }
}

/// Named test sets on their grids.
pub type NamedSets = Vec<(String, VoxelSet)>;
