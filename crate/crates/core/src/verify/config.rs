use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{indicator_cube, Grid, VoxelSet};

use super::NamedSets;

/// Test-set geometry. Non-cube shapes are voxelized by cell centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Shape {
    /// Grid-aligned cube `corner + [0, side]^d`.
    Cube { corner: Vec<f64>, side: f64 },
    Ball { center: Vec<f64>, radius: f64 },
    Rect { lo: Vec<f64>, hi: Vec<f64> },
    Annulus { center: Vec<f64>, inner: f64, outer: f64 },
    Union { parts: Vec<Shape> },
}

fn dist(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

impl Shape {
    pub fn build(&self, grid: &Grid) -> Result<VoxelSet> {
        let d = grid.dim();
        let check = |v: &[f64], what: &str| {
            if v.len() == d {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} has {} coordinates, grid has dimension {d}", v.len())))
            }
        };
        let set = match self {
            Shape::Cube { corner, side } => {
                check(corner, "cube corner")?;
                indicator_cube(grid, corner, *side)?
            }
            Shape::Ball { center, radius } => {
                check(center, "ball center")?;
                let r = *radius;
                VoxelSet::from_fn(grid.clone(), |x| dist(x, center) <= r)
            }
            Shape::Rect { lo, hi } => {
                check(lo, "rect lo")?;
                check(hi, "rect hi")?;
                VoxelSet::from_fn(grid.clone(), |x| (0..d).all(|a| x[a] >= lo[a] && x[a] <= hi[a]))
            }
            Shape::Annulus { center, inner, outer } => {
                check(center, "annulus center")?;
                let (a, b) = (*inner, *outer);
                VoxelSet::from_fn(grid.clone(), |x| {
                    let r = dist(x, center);
                    r > a && r <= b
                })
            }
            Shape::Union { parts } => {
                let mut acc = VoxelSet::empty(grid.clone());
                for p in parts {
                    acc = acc.union(&p.build(grid)?)?;
                }
                acc
            }
        };
        if set.is_empty() {
            return Err(Error::Degenerate(format!("test set {self:?} contains no cell")));
        }
        Ok(set)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSpec {
    pub name: String,
    pub shape: Shape,
}

/// The cube `[lo, hi]^d` with `n` cells per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn build(&self, d: usize) -> Result<Grid> {
        if self.n < 4 {
            return Err(Error::Config(format!("grid needs at least 4 cells per axis, got {}", self.n)));
        }
        Grid::uniform(d, self.lo, self.hi, self.n)
    }
}

fn build_named(d: usize, grid: &GridSpec, sets: &[SetSpec]) -> Result<NamedSets> {
    if sets.is_empty() {
        return Err(Error::Config("test-set family is empty".into()));
    }
    let g = grid.build(d)?;
    sets.iter()
        .map(|s| Ok((s.name.clone(), s.shape.build(&g)?)))
        .collect()
}

fn cube(name: &str, corner: [f64; 2], side: f64) -> SetSpec {
    SetSpec { name: name.into(), shape: Shape::Cube { corner: corner.to_vec(), side } }
}

fn ball(name: &str, center: [f64; 2], radius: f64) -> SetSpec {
    SetSpec { name: name.into(), shape: Shape::Ball { center: center.to_vec(), radius } }
}

fn rect(lo: [f64; 2], hi: [f64; 2]) -> Shape {
    Shape::Rect { lo: lo.to_vec(), hi: hi.to_vec() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialConfig {
    /// Orders for the ball-center check.
    pub alphas: Vec<f64>,
    pub ball_radius: f64,
    /// Cells across the ball diameter.
    pub ball_cells: usize,
    pub oracle_alpha: f64,
    pub oracle_n2: usize,
    pub oracle_n3: usize,
    pub semigroup_n: usize,
    pub semigroup_alpha: f64,
    pub semigroup_beta: f64,
    pub semigroup_pad: usize,
    /// Radius of the bump used for the semigroup and path comparisons.
    pub bump_radius: f64,
    pub paths_n: usize,
    pub paths_alpha: f64,
    pub heat_nodes: usize,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self {
            alphas: vec![0.3, 0.5, 0.7],
            ball_radius: 1.0,
            ball_cells: 256,
            oracle_alpha: 0.5,
            oracle_n2: 32,
            oracle_n3: 16,
            semigroup_n: 128,
            semigroup_alpha: 0.3,
            semigroup_beta: 0.4,
            semigroup_pad: 4,
            bump_radius: 0.4,
            paths_n: 64,
            paths_alpha: 0.5,
            heat_nodes: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LorentzConfig {
    pub d: usize,
    pub grid: GridSpec,
    pub sets: Vec<SetSpec>,
    /// Exponents for the indicator check (each must exceed 1).
    pub exponents: Vec<f64>,
    pub bump_radius: f64,
}

impl Default for LorentzConfig {
    fn default() -> Self {
        Self {
            d: 2,
            grid: GridSpec { lo: -1.0, hi: 2.0, n: 96 },
            sets: vec![
                cube("cube", [0.0, 0.0], 1.0),
                ball("ball", [0.5, 0.5], 0.6),
                SetSpec {
                    name: "union".into(),
                    shape: Shape::Union {
                        parts: vec![rect([-0.8, -0.8], [-0.2, 1.5]), rect([0.5, 0.0], [1.8, 0.4])],
                    },
                },
            ],
            exponents: vec![1.5, 2.0, 4.0],
            bump_radius: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContentConfig {
    pub d: usize,
    pub grid: GridSpec,
    pub sets: Vec<SetSpec>,
    pub betas: Vec<f64>,
    pub slab_s: f64,
    pub slab_alpha: f64,
    pub slab_grid: GridSpec,
    /// Physical radii for the slab-potential growth ratio.
    pub radii: Vec<f64>,
}

impl Default for ContentConfig {
    fn default() -> Self {
        Self {
            d: 2,
            grid: GridSpec { lo: -1.0, hi: 2.0, n: 96 },
            sets: vec![
                cube("cube", [0.0, 0.0], 1.0),
                ball("ball", [0.5, 0.5], 0.6),
                SetSpec {
                    name: "strip".into(),
                    shape: rect([-0.5, 0.4], [1.5, 0.45]),
                },
                SetSpec {
                    name: "plane_patch".into(),
                    shape: rect([0.0, -0.35], [1.0, -0.25]),
                },
                SetSpec {
                    name: "two_balls".into(),
                    shape: Shape::Union {
                        parts: vec![
                            Shape::Ball { center: vec![-0.5, -0.5], radius: 0.3 },
                            Shape::Ball { center: vec![1.5, 1.5], radius: 0.3 },
                        ],
                    },
                },
            ],
            betas: vec![1.0, 1.5],
            slab_s: 0.3,
            slab_alpha: 0.5,
            slab_grid: GridSpec { lo: -1.0, hi: 2.0, n: 48 },
            radii: vec![0.5, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Lemma1Config {
    pub d: usize,
    pub grid: GridSpec,
    pub alphas: Vec<f64>,
    pub sets: Vec<SetSpec>,
    /// Heat times per decade of the maximal-function time grid.
    pub per_decade: usize,
}

impl Default for Lemma1Config {
    fn default() -> Self {
        Self {
            d: 2,
            grid: GridSpec { lo: -0.5, hi: 1.5, n: 128 },
            alphas: vec![0.3, 0.5, 0.7],
            sets: vec![cube("cube", [0.0, 0.0], 1.0), ball("ball", [0.5, 0.5], 0.5)],
            per_decade: 8,
        }
    }
}

impl Lemma1Config {
    pub fn build_sets(&self) -> Result<NamedSets> {
        build_named(self.d, &self.grid, &self.sets)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplittingConfig {
    pub d: usize,
    pub grid: GridSpec,
    pub alpha: f64,
    pub sets: Vec<SetSpec>,
    pub per_decade: usize,
}

impl Default for SplittingConfig {
    fn default() -> Self {
        Self {
            d: 2,
            grid: GridSpec { lo: -0.5, hi: 1.5, n: 128 },
            alpha: 0.5,
            sets: vec![cube("cube", [0.0, 0.0], 1.0)],
            per_decade: 8,
        }
    }
}

impl SplittingConfig {
    pub fn build_sets(&self) -> Result<NamedSets> {
        build_named(self.d, &self.grid, &self.sets)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Lemma2Config {
    pub d: usize,
    pub grid: GridSpec,
    pub alpha: f64,
    pub sets: Vec<SetSpec>,
    pub dilations: Vec<f64>,
}

impl Default for Lemma2Config {
    fn default() -> Self {
        Self {
            d: 2,
            grid: GridSpec { lo: -1.5, hi: 2.5, n: 128 },
            alpha: 0.5,
            sets: vec![
                cube("cube", [0.0, 0.0], 1.0),
                ball("ball", [0.5, 0.5], 0.5),
                SetSpec { name: "rect".into(), shape: rect([0.0, 0.25], [1.0, 0.75]) },
                SetSpec {
                    name: "two_cubes".into(),
                    shape: Shape::Union {
                        parts: vec![
                            Shape::Cube { corner: vec![0.0, 0.0], side: 0.5 },
                            Shape::Cube { corner: vec![0.75, 0.5], side: 0.25 },
                        ],
                    },
                },
                SetSpec {
                    name: "annulus".into(),
                    shape: Shape::Annulus { center: vec![0.5, 0.5], inner: 0.25, outer: 0.5 },
                },
                SetSpec {
                    name: "l_shape".into(),
                    shape: Shape::Union {
                        parts: vec![rect([0.0, 0.0], [1.0, 0.5]), rect([0.0, 0.5], [0.5, 1.0])],
                    },
                },
            ],
            dilations: vec![0.5, 1.0, 2.0, 4.0],
        }
    }
}

impl Lemma2Config {
    pub fn build_sets(&self) -> Result<NamedSets> {
        build_named(self.d, &self.grid, &self.sets)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SobolevConfig {
    pub d: usize,
    pub alpha: f64,
    pub n: usize,
    /// The grid is `[-half, half]^d`.
    pub half: f64,
    pub bump_radius: f64,
    /// Spatial scale factor for the dilation check.
    pub scale: f64,
}

impl Default for SobolevConfig {
    fn default() -> Self {
        Self { d: 2, alpha: 0.5, n: 64, half: 2.0, bump_radius: 0.8, scale: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassicalConfig {
    pub d: usize,
    pub n: usize,
    pub half: f64,
    pub bump_radius: f64,
    /// Translation for the Hardy comparison.
    pub shift: f64,
}

impl Default for ClassicalConfig {
    fn default() -> Self {
        Self { d: 2, n: 128, half: 2.0, bump_radius: 0.8, shift: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CounterexampleConfig {
    pub d: usize,
    pub s: Vec<f64>,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        Self { d: 2, s: vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeaktypeConfig {
    pub d: usize,
    pub betas: Vec<f64>,
    pub t: Vec<f64>,
    /// Offsets of the profile fit that sets `s(t)`.
    pub fit_s: Vec<f64>,
    /// Admit `beta` in `(0, 1)`; those columns are reported, never judged.
    pub exploratory: bool,
}

impl Default for WeaktypeConfig {
    fn default() -> Self {
        Self {
            d: 2,
            betas: vec![1.0, 1.5],
            t: vec![5.0, 10.0, 20.0, 40.0],
            fit_s: vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            exploratory: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TracefailConfig {
    pub d: usize,
    pub alpha: f64,
    pub s: Vec<f64>,
    /// Mollifier width as a multiple of `s`.
    pub width_factor: f64,
    /// Grid for the `D^alpha u = D(chi_Q * rho)` consistency check.
    pub consistency_grid: GridSpec,
    pub consistency_width: f64,
}

impl Default for TracefailConfig {
    fn default() -> Self {
        Self {
            d: 2,
            alpha: 0.5,
            s: vec![1e-1, 1e-2, 1e-3, 1e-4],
            width_factor: 0.2,
            consistency_grid: GridSpec { lo: -1.0, hi: 2.0, n: 256 },
            consistency_width: 0.06,
        }
    }
}

/// Top-level configuration: one section per experiment plus a seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub potential: PotentialConfig,
    pub lorentz: LorentzConfig,
    pub content: ContentConfig,
    pub lemma1: Lemma1Config,
    pub splitting: SplittingConfig,
    pub lemma2: Lemma2Config,
    pub sobolev: SobolevConfig,
    pub classical: ClassicalConfig,
    pub counterexample: CounterexampleConfig,
    pub weaktype: WeaktypeConfig,
    pub tracefail: TracefailConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            potential: Default::default(),
            lorentz: Default::default(),
            content: Default::default(),
            lemma1: Default::default(),
            splitting: Default::default(),
            lemma2: Default::default(),
            sobolev: Default::default(),
            classical: Default::default(),
            counterexample: Default::default(),
            weaktype: Default::default(),
            tracefail: Default::default(),
        }
    }
}

impl ExperimentConfig {
    /// Checks the dimensions; ranges of orders and offsets are checked by
    /// the experiments themselves.
    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("lorentz.d", self.lorentz.d),
            ("content.d", self.content.d),
            ("lemma1.d", self.lemma1.d),
            ("splitting.d", self.splitting.d),
            ("lemma2.d", self.lemma2.d),
            ("sobolev.d", self.sobolev.d),
            ("classical.d", self.classical.d),
            ("counterexample.d", self.counterexample.d),
            ("weaktype.d", self.weaktype.d),
            ("tracefail.d", self.tracefail.d),
        ];
        for (key, d) in dims {
            if !(2..=3).contains(&d) {
                return Err(Error::Config(format!("{key} = {d}: dimension must be 2 or 3")));
            }
        }
        Ok(())
    }
}
