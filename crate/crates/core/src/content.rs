//! Hausdorff-content certificates.
//!
//! Upper bounds come from explicit ball covers that are checked to contain
//! every cell of the target set ([`content_upper`]). Lower bounds come from
//! measures with known growth: the unit plane patch below the cube
//! ([`SlabMeasure`], [`slab_lower_bound`]) and coordinate projections
//! ([`projection_lower_bound`]).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField, VoxelSet, MAX_DIM};
use crate::kernels::{gamma_norm_checked, omega};
use crate::par;
use crate::quadrature::{adaptive_box_split, GaussLegendre, Tolerance};
use crate::report::{num, Report, Table};

/// Seed of the point shuffle in the enclosing-ball search. The search is
/// exact, so the seed only affects speed.
const MEB_SEED: u64 = 0x5eed;

/// Above this many clusters the pairwise merge pass is skipped.
const MAX_MERGE_CLUSTERS: usize = 1500;

type Point = [f64; MAX_DIM];

fn dist2(a: &Point, b: &Point) -> f64 {
    (0..MAX_DIM).map(|k| (a[k] - b[k]).powi(2)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    fn contains(&self, p: &Point) -> bool {
        dist2(&self.center, p) <= self.radius * self.radius * (1.0 + 1e-10) + 1e-300
    }
}

/// A finite ball cover with its content value `sum omega_s r^s`,
/// `s = d - beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallCover {
    pub dim: usize,
    pub beta: f64,
    pub balls: Vec<Ball>,
    pub value: f64,
    /// Every cell of the target set lies inside one of the balls.
    pub certified: bool,
}

impl BallCover {
    pub fn exponent(&self) -> f64 {
        self.dim as f64 - self.beta
    }

    /// Recomputes `sum omega_s r^s` from the balls.
    pub fn recompute_value(&self) -> f64 {
        let s = self.exponent();
        let w = omega(s).expect("exponent checked on construction");
        self.balls.iter().map(|b| w * b.radius.powf(s)).sum()
    }

    /// True if every cell (as a closed box) of `set` lies in some ball.
    pub fn covers(&self, set: &VoxelSet) -> bool {
        let half = 0.5 * set.grid().cell_diagonal();
        set.cells().into_iter().all(|i| {
            let c = set.grid().center(i);
            self.balls.iter().any(|b| cell_in_ball(b, &c, half))
        })
    }

    /// One row `c0,...,radius` per ball.
    pub fn to_csv(&self) -> String {
        let mut s: String = (0..self.dim).map(|k| format!("c{k},")).collect();
        s.push_str("radius\n");
        for b in &self.balls {
            for k in 0..self.dim {
                s.push_str(&format!("{},", b.center[k]));
            }
            s.push_str(&format!("{}\n", b.radius));
        }
        s
    }

    pub fn summary_json(&self) -> serde_json::Value {
        json!({
            "beta": self.beta,
            "value": num(self.value),
            "balls": self.balls.len(),
            "certified": self.certified,
        })
    }
}

fn cell_in_ball(b: &Ball, c: &Point, half_diag: f64) -> bool {
    dist2(&b.center, c).sqrt() + half_diag <= b.radius * (1.0 + 1e-12)
}

/// Smallest ball with all of `support` on its boundary, or `None` if the
/// points are affinely dependent.
fn circumball(support: &[Point]) -> Option<Ball> {
    let p0 = support[0];
    let k = support.len() - 1;
    let v: Vec<Point> = support[1..]
        .iter()
        .map(|p| std::array::from_fn(|a| p[a] - p0[a]))
        .collect();
    let dot = |x: &Point, y: &Point| (0..MAX_DIM).map(|a| x[a] * y[a]).sum::<f64>();
    let mut m = [[0.0; MAX_DIM + 1]; MAX_DIM];
    let mut scale = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            m[i][j] = dot(&v[i], &v[j]);
        }
        m[i][k] = 0.5 * dot(&v[i], &v[i]);
        scale = scale.max(m[i][i]);
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..k {
        let piv = (col..k).max_by(|a, b| m[*a][col].abs().total_cmp(&m[*b][col].abs()))?;
        if m[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        m.swap(col, piv);
        for r in 0..k {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..=k {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    let mut c = p0;
    for i in 0..k {
        let l = m[i][k] / m[i][i];
        for a in 0..MAX_DIM {
            c[a] += l * v[i][a];
        }
    }
    let r = support.iter().map(|p| dist2(&c, p)).fold(0.0, f64::max).sqrt();
    Some(Ball { center: c, radius: r })
}

fn ball_of_support(support: &[Point]) -> Ball {
    match support.len() {
        0 => Ball { center: [0.0; MAX_DIM], radius: -1.0 },
        1 => Ball { center: support[0], radius: 0.0 },
        _ => circumball(support).unwrap_or_else(|| {
            // Degenerate support: use the farthest pair.
            let mut best = (0, 0, -1.0);
            for i in 0..support.len() {
                for j in i + 1..support.len() {
                    let d = dist2(&support[i], &support[j]);
                    if d > best.2 {
                        best = (i, j, d);
                    }
                }
            }
            let (p, q) = (support[best.0], support[best.1]);
            let c = std::array::from_fn(|a| 0.5 * (p[a] + q[a]));
            Ball { center: c, radius: 0.5 * best.2.sqrt() }
        }),
    }
}

/// Move-to-front enclosing-ball recursion over the first `n` points.
fn mtf(pts: &mut [Point], n: usize, support: &mut Vec<Point>, dim: usize) -> Ball {
    let mut ball = ball_of_support(support);
    if support.len() == dim + 1 {
        return ball;
    }
    for i in 0..n {
        if ball.radius < 0.0 || !ball.contains(&pts[i]) {
            support.push(pts[i]);
            ball = mtf(pts, i, support, dim);
            support.pop();
            pts[..=i].rotate_right(1);
        }
    }
    ball
}

/// Minimum enclosing ball of `points`; the returned radius is the exact
/// maximum distance from the returned center, so containment holds.
pub fn min_enclosing_ball(points: &[Point], dim: usize) -> Ball {
    assert!(!points.is_empty());
    let mut pts = points.to_vec();
    pts.shuffle(&mut ChaCha8Rng::seed_from_u64(MEB_SEED));
    let n = pts.len();
    let mut b = mtf(&mut pts, n, &mut Vec::with_capacity(dim + 1), dim);
    b.radius = points.iter().map(|p| dist2(&b.center, p)).fold(0.0, f64::max).sqrt();
    b
}

struct Cluster {
    members: Vec<u32>,
    ball: Ball,
}

struct Search<'a> {
    centers: &'a [Point],
    dim: usize,
    s: f64,
    w: f64,
    half: f64,
}

impl Search<'_> {
    fn cost(&self, meb_radius: f64) -> f64 {
        self.w * (meb_radius + self.half).powf(self.s)
    }

    fn cluster(&self, members: Vec<u32>) -> Cluster {
        let pts: Vec<Point> = members.iter().map(|i| self.centers[*i as usize]).collect();
        let ball = min_enclosing_ball(&pts, self.dim);
        Cluster { members, ball }
    }

    /// Dyadic-block recursion: each block keeps either one ball or the best
    /// covers of its children, whichever is cheaper.
    fn blocks(&self, members: Vec<u32>, idx: &[[usize; MAX_DIM]], lo: [usize; MAX_DIM], size: usize) -> (Vec<Cluster>, f64) {
        if members.len() == 1 || size == 1 {
            let c = self.cluster(members);
            let cost = self.cost(c.ball.radius);
            return (vec![c], cost);
        }
        let whole = self.cluster(members.clone());
        let whole_cost = self.cost(whole.ball.radius);
        let half = size / 2;
        let mut parts: Vec<Vec<u32>> = vec![Vec::new(); 1 << self.dim];
        for m in members {
            let ix = idx[m as usize];
            let mut key = 0;
            for a in 0..self.dim {
                if ix[a] >= lo[a] + half {
                    key |= 1 << a;
                }
            }
            parts[key].push(m);
        }
        let mut out = Vec::new();
        let mut cost = 0.0;
        for (key, p) in parts.into_iter().enumerate() {
            if p.is_empty() {
                continue;
            }
            let mut clo = lo;
            for a in 0..self.dim {
                if (key >> a) & 1 == 1 {
                    clo[a] += half;
                }
            }
            let (c, k) = self.blocks(p, idx, clo, half);
            out.extend(c);
            cost += k;
            if cost >= whole_cost {
                return (vec![whole], whole_cost);
            }
        }
        (out, cost)
    }

    /// Greedy pairwise merging while some merge lowers the total.
    fn merge(&self, clusters: Vec<Cluster>) -> Vec<Cluster> {
        if clusters.len() < 2 || clusters.len() > MAX_MERGE_CLUSTERS {
            return clusters;
        }
        let mut slots: Vec<Option<Cluster>> = clusters.into_iter().map(Some).collect();
        let mut heap = BinaryHeap::new();
        let gain_est = |a: &Ball, b: &Ball| {
            let d = dist2(&a.center, &b.center).sqrt();
            let r = if d + b.radius <= a.radius {
                a.radius
            } else if d + a.radius <= b.radius {
                b.radius
            } else {
                0.5 * (d + a.radius + b.radius)
            };
            self.cost(a.radius) + self.cost(b.radius) - self.cost(r)
        };
        for i in 0..slots.len() {
            for j in i + 1..slots.len() {
                let g = gain_est(&slots[i].as_ref().unwrap().ball, &slots[j].as_ref().unwrap().ball);
                if g > 0.0 {
                    heap.push(Gain(g, i, j));
                }
            }
        }
        while let Some(Gain(_, i, j)) = heap.pop() {
            if slots[i].is_none() || slots[j].is_none() {
                continue;
            }
            let (a, b) = (slots[i].as_ref().unwrap(), slots[j].as_ref().unwrap());
            let mut members = a.members.clone();
            members.extend_from_slice(&b.members);
            let merged = self.cluster(members);
            if self.cost(merged.ball.radius) >= self.cost(a.ball.radius) + self.cost(b.ball.radius) {
                continue;
            }
            slots[i] = None;
            slots[j] = None;
            let id = slots.len();
            for (k, other) in slots.iter().enumerate() {
                if let Some(o) = other {
                    let g = gain_est(&merged.ball, &o.ball);
                    if g > 0.0 {
                        heap.push(Gain(g, k, id));
                    }
                }
            }
            slots.push(Some(merged));
        }
        slots.into_iter().flatten().collect()
    }

    fn total(&self, clusters: &[Cluster]) -> f64 {
        clusters.iter().map(|c| self.cost(c.ball.radius)).sum()
    }

    fn finish(&self, set: &VoxelSet, beta: f64, clusters: Vec<Cluster>) -> BallCover {
        let balls: Vec<Ball> = clusters
            .iter()
            .map(|c| Ball { center: c.ball.center, radius: c.ball.radius + self.half })
            .collect();
        let mut cover = BallCover { dim: self.dim, beta, balls, value: 0.0, certified: false };
        cover.value = cover.recompute_value();
        // Check every cell against its own ball, then against all balls.
        let mut owner = vec![usize::MAX; self.centers.len()];
        for (k, c) in clusters.iter().enumerate() {
            for m in &c.members {
                owner[*m as usize] = k;
            }
        }
        cover.certified = (0..self.centers.len()).all(|i| {
            let c = &self.centers[i];
            (owner[i] != usize::MAX && cell_in_ball(&cover.balls[owner[i]], c, self.half))
                || cover.balls.iter().any(|b| cell_in_ball(b, c, self.half))
        });
        debug_assert_eq!(self.centers.len(), set.count());
        cover
    }
}

struct Gain(f64, usize, usize);

impl PartialEq for Gain {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Gain {}
impl PartialOrd for Gain {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Gain {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0
            .total_cmp(&o.0)
            .then(o.1.cmp(&self.1))
            .then(o.2.cmp(&self.2))
    }
}

fn check_beta(d: usize, beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < d as f64) {
        return Err(Error::param("beta", beta, format!("content order must lie in (0, {d})")));
    }
    Ok(())
}

/// Connected components of the cells under face, edge and corner
/// adjacency.
fn components(grid: &Grid, idx: &[[usize; MAX_DIM]]) -> Vec<Vec<u32>> {
    let d = grid.dim();
    let shape = grid.shape3();
    let mut slot = vec![u32::MAX; grid.len()];
    for (k, ix) in idx.iter().enumerate() {
        slot[grid.ravel(&ix[..d])] = k as u32;
    }
    let mut seen = vec![false; idx.len()];
    let mut out = Vec::new();
    for start in 0..idx.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start as u32];
        let mut head = 0;
        while head < comp.len() {
            let ix = idx[comp[head] as usize];
            head += 1;
            for code in 0..3usize.pow(d as u32) {
                let mut nb = [0usize; MAX_DIM];
                let mut ok = true;
                let mut c = code;
                for a in 0..d {
                    let v = ix[a] as isize + (c % 3) as isize - 1;
                    c /= 3;
                    if v < 0 || v >= shape[a] as isize {
                        ok = false;
                        break;
                    }
                    nb[a] = v as usize;
                }
                if !ok {
                    continue;
                }
                let j = slot[grid.ravel(&nb[..d])];
                if j != u32::MAX && !seen[j as usize] {
                    seen[j as usize] = true;
                    comp.push(j);
                }
            }
        }
        out.push(comp);
    }
    out
}

fn cell_data(set: &VoxelSet) -> (Vec<u32>, Vec<Point>, Vec<[usize; MAX_DIM]>) {
    let g = set.grid();
    let cells = set.cells();
    let centers = cells.iter().map(|i| g.center(*i)).collect();
    let idx = cells.iter().map(|i| g.unravel(*i)).collect();
    ((0..cells.len() as u32).collect(), centers, idx)
}

/// Certified upper bound on the `(d - beta)`-dimensional Hausdorff content
/// of the union of the cells of `set`.
///
/// Search: dyadic blocks over the cell index space (each block keeps one
/// enclosing ball or its children's covers, whichever costs less), then
/// greedy pairwise merging. Ball radii are enclosing radii of cell centers
/// plus half the cell diagonal, so whole cells are covered.
pub fn content_upper(set: &VoxelSet, beta: f64) -> Result<BallCover> {
    let d = set.grid().dim();
    check_beta(d, beta)?;
    if set.is_empty() {
        return Err(Error::Degenerate("cannot cover an empty set".into()));
    }
    let (members, centers, idx) = cell_data(set);
    let s = d as f64 - beta;
    let search = Search { centers: &centers, dim: d, s, w: omega(s)?, half: 0.5 * set.grid().cell_diagonal() };
    // Dyadic blocks per connected component, so that block boundaries do
    // not cut separated pieces.
    let mut clusters = Vec::new();
    for comp in components(set.grid(), &idx) {
        let mut lo = [usize::MAX; MAX_DIM];
        let mut hi = [0; MAX_DIM];
        for m in &comp {
            for a in 0..d {
                lo[a] = lo[a].min(idx[*m as usize][a]);
                hi[a] = hi[a].max(idx[*m as usize][a]);
            }
        }
        for a in d..MAX_DIM {
            lo[a] = 0;
        }
        let size = (0..d).map(|a| hi[a] - lo[a] + 1).max().unwrap().next_power_of_two();
        clusters.extend(search.blocks(comp, &idx, lo, size).0);
    }
    let clusters = search.merge(clusters);
    let global = vec![search.cluster(members)];
    let best = if search.total(&global) <= search.total(&clusters) { global } else { clusters };
    Ok(search.finish(set, beta, best))
}

/// Content estimator for a nested sequence of sets (largest first). Each
/// set's cover is the better of a fresh search and the previous cover
/// restricted to the new set with its balls shrunk, so estimates never
/// increase along the sequence.
#[derive(Debug, Clone)]
pub struct SeededUpper {
    beta: f64,
    previous: Option<(VoxelSet, BallCover)>,
}

impl SeededUpper {
    pub fn new(beta: f64) -> Self {
        Self { beta, previous: None }
    }

    pub fn estimate(&mut self, set: &VoxelSet) -> Result<BallCover> {
        let fresh = content_upper(set, self.beta)?;
        let mut best = fresh;
        if let Some((prev_set, prev)) = &self.previous {
            if set.is_subset_of(prev_set) {
                if let Some(seeded) = restrict_cover(set, prev) {
                    if seeded.value < best.value {
                        best = seeded;
                    }
                }
            }
        }
        self.previous = Some((set.clone(), best.clone()));
        Ok(best)
    }
}

fn restrict_cover(set: &VoxelSet, prev: &BallCover) -> Option<BallCover> {
    let d = set.grid().dim();
    let (_, centers, _) = cell_data(set);
    let half = 0.5 * set.grid().cell_diagonal();
    let mut groups: Vec<Vec<u32>> = vec![Vec::new(); prev.balls.len()];
    for (i, c) in centers.iter().enumerate() {
        let k = prev.balls.iter().position(|b| cell_in_ball(b, c, half))?;
        groups[k].push(i as u32);
    }
    let s = d as f64 - prev.beta;
    let search = Search { centers: &centers, dim: d, s, w: omega(s).ok()?, half };
    let clusters: Vec<Cluster> = groups
        .into_iter()
        .filter(|g| !g.is_empty())
        .map(|g| search.cluster(g))
        .collect();
    Some(search.finish(set, prev.beta, clusters))
}

/// `H^(d-1)` restricted to `[0,1]^(d-1) x {x_d = -s}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabMeasure {
    d: usize,
    s: f64,
}

impl SlabMeasure {
    pub fn new(d: usize, s: f64) -> Result<Self> {
        if !(2..=3).contains(&d) {
            return Err(Error::param("d", d as f64, "dimension must be 2 or 3"));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::param("s", s, "plane offset must lie in (0, 1)"));
        }
        Ok(Self { d, s })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn offset(&self) -> f64 {
        self.s
    }

    pub fn mass(&self) -> f64 {
        1.0
    }

    /// `C'` with `mu(B(x, r)) <= C' r^(d-1)`: the flat bound `omega_(d-1)`.
    pub fn growth_constant(&self) -> f64 {
        omega(self.d as f64 - 1.0).expect("d >= 2")
    }
}

/// Plane measure of the cells of `set` in the layer containing the plane
/// `x_d = -s`, restricted to `[0,1]^(d-1)`.
fn plane_mass(set: &VoxelSet, d: usize, s: f64) -> Result<f64> {
    let g = set.grid();
    if g.dim() != d {
        return Err(Error::GridMismatch("slab and grid dimensions differ".into()));
    }
    let z = -s;
    let ax = d - 1;
    let h = g.spacing(ax);
    let u = (z - g.origin()[ax]) / h;
    if u <= 0.0 || u >= g.shape()[ax] as f64 {
        return Err(Error::Precondition(format!("plane x_{ax} = {z} lies outside the grid")));
    }
    if (u - u.round()).abs() < 1e-9 {
        return Err(Error::Precondition("plane lies on a cell boundary".into()));
    }
    let layer = u.floor() as usize;
    let mut mass = 0.0;
    for i in set.cells() {
        let ix = g.unravel(i);
        if ix[ax] != layer {
            continue;
        }
        let c = g.center(i);
        let mut area = 1.0;
        for a in 0..ax {
            let ha = 0.5 * g.spacing(a);
            let lo = (c[a] - ha).max(0.0);
            let hi = (c[a] + ha).min(1.0);
            area *= (hi - lo).max(0.0);
        }
        mass += area;
    }
    Ok(mass)
}

/// `mu_s(A) / C'`, a lower bound on `H^(d-1)_infinity(A)`.
pub fn slab_lower_bound(set: &VoxelSet, m: &SlabMeasure) -> Result<f64> {
    Ok(plane_mass(set, m.d, m.s)? / m.growth_constant())
}

/// `max_k L^(d-1)(pi_k A) / omega_(d-1)`, a lower bound on
/// `H^(d-1)_infinity(A)` from the coordinate projections of the cells.
pub fn projection_lower_bound(set: &VoxelSet) -> Result<f64> {
    let g = set.grid();
    let d = g.dim();
    if set.is_empty() {
        return Ok(0.0);
    }
    let shape = g.shape3();
    let mut best = 0.0f64;
    for k in 0..d {
        let mut seen = std::collections::HashSet::new();
        for i in set.cells() {
            let mut ix = g.unravel(i);
            ix[k] = 0;
            seen.insert(ix);
        }
        let face: f64 = (0..d).filter(|a| *a != k).map(|a| g.spacing(a)).product();
        best = best.max(seen.len() as f64 * face);
        let _ = shape;
    }
    Ok(best / omega(d as f64 - 1.0)?)
}

/// Compares `(lower bound on H^(d-1))^((d-beta)/(d-1))` with the certified
/// upper bound on `H^(d-beta)`; a crossing would falsify a certificate.
pub fn subordination_check(set: &VoxelSet, beta: f64) -> Result<Report> {
    let d = set.grid().dim();
    if !(1.0..d as f64).contains(&beta) {
        return Err(Error::param(
            "beta",
            beta,
            "subordination needs 1 <= beta < d; below 1 the concavity step fails",
        ));
    }
    let lower = projection_lower_bound(set)?;
    let lhs = lower.powf((d as f64 - beta) / (d as f64 - 1.0));
    let cover = content_upper(set, beta)?;
    let mut r = Report::new("subordination");
    r.input("beta", beta).input("cells", set.count());
    let mut t = Table::new("bounds", &["lower_h_d_minus_1", "lhs", "upper", "certified"]);
    t.push(vec![num(lower), num(lhs), num(cover.value), cover.certified.into()]);
    r.tables.push(t);
    r.check(
        "certified",
        cover.certified,
        format!("{} balls", cover.balls.len()),
    );
    r.check(
        "no_crossing",
        lhs <= cover.value * (1.0 + 1e-12),
        format!("lower side {lhs:.6e} vs upper {:.6e}", cover.value),
    );
    Ok(r)
}

/// `I_(1 - alpha) mu_s` on a grid and its empirical growth ratio.
#[derive(Debug, Clone)]
pub struct SlabPotential {
    pub field: ScalarField,
    pub radii: Vec<f64>,
    /// `max mu(B(x, r)) / r^(d - alpha)` over sampled centers and `radii`,
    /// with `mu` the density-weighted cell measure.
    pub growth_ratio: f64,
}

/// Samples `I_(1 - alpha) mu_s` at the cell centers by adaptive quadrature
/// over the plane patch, and measures the growth of the resulting density
/// on balls with the given physical `radii` (those below `8 h` are
/// dropped). Cells within [`NEAR_LAYERS`] spacings of the plane hold the
/// cell average instead, since the density blows up like
/// `dist^(-alpha)` there and a center sample misweights the cell.
pub fn potential_of_slab(m: &SlabMeasure, alpha: f64, grid: &Grid, radii: &[f64]) -> Result<SlabPotential> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::order(alpha, "slab potential needs order in (0, 1)"));
    }
    let d = m.d;
    if grid.dim() != d {
        return Err(Error::GridMismatch("slab and grid dimensions differ".into()));
    }
    let order = 1.0 - alpha;
    let g = gamma_norm_checked(d, order)?;
    let e = 0.5 * (order - d as f64);
    let z0 = -m.s;
    let hs = grid.spacings();
    let h = hs.iter().copied().fold(0.0, f64::max);
    for i in 0..grid.len() {
        if (grid.center(i)[d - 1] - z0).abs() < 1e-9 * h {
            return Err(Error::Singular("a cell center lies on the slab plane".into()));
        }
    }
    let rule = GaussLegendre::new(6);
    let lo = vec![0.0; d - 1];
    let hi = vec![1.0; d - 1];
    let density = |x: &[f64]| {
        let n2 = (x[d - 1] - z0).powi(2);
        let mut f = |y: &[f64]| {
            (n2 + y.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>()).powf(e)
        };
        adaptive_box_split(&rule, &lo, &hi, &x[..d - 1], &mut f, Tolerance { rel: 1e-9, abs: 0.0 }) / g
    };
    let hz = hs[d - 1];
    let vals = par::map(grid.len(), |i| {
        let x = grid.center(i);
        if (x[d - 1] - z0).abs() > NEAR_LAYERS * hz {
            return density(&x[..d]);
        }
        // Tangential GL tensor; normal direction split at the plane with
        // z = w^2 on each side to absorb the power singularity.
        let (a, b) = (x[d - 1] - 0.5 * hz, x[d - 1] + 0.5 * hz);
        let pieces = if z0 > a && z0 < b { vec![(z0, a), (z0, b)] } else { vec![(a, b)] };
        let mut normal: Vec<(f64, f64)> = Vec::new();
        for (p, q) in pieces {
            let sgn = (p + q - 2.0 * z0).signum();
            let (w0, w1) = ((p - z0).abs().sqrt(), (q - z0).abs().sqrt());
            let (w0, w1) = (w0.min(w1), w0.max(w1));
            for (t, w) in rule.nodes().iter().zip(rule.weights()) {
                let wm = 0.5 * (w0 + w1) + 0.5 * (w1 - w0) * t;
                normal.push((z0 + sgn * wm * wm, 0.5 * (w1 - w0) * w * 2.0 * wm));
            }
        }
        let mut tangential: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
        for a in 0..d - 1 {
            let (c, ha) = (x[a], hs[a]);
            tangential = tangential
                .into_iter()
                .flat_map(|(p, w)| {
                    rule.nodes().iter().zip(rule.weights()).map(move |(t, wt)| {
                        let mut p = p.clone();
                        p.push(c + 0.5 * ha * t);
                        (p, w * 0.5 * wt)
                    })
                })
                .collect();
        }
        let mut acc = 0.0;
        for (p, wp) in &tangential {
            for (z, wz) in &normal {
                let mut y = p.clone();
                y.push(*z);
                acc += wp * wz * density(&y);
            }
        }
        acc / hz
    });
    let field = ScalarField::new(grid.clone(), vals)?;
    let radii: Vec<f64> = radii.iter().copied().filter(|r| *r >= 8.0 * h).collect();
    let growth_ratio = growth_ratio(&field, d as f64 - alpha, &radii);
    Ok(SlabPotential { field, radii, growth_ratio })
}

/// Layers on each side of the slab plane whose cells are averaged.
pub const NEAR_LAYERS: f64 = 2.0;

/// `max mu(B(x, r)) / r^s` for `mu = |f| dx`, over a fixed lattice of 16
/// points per axis inside the grid box and the given radii. The sample
/// points depend only on the box, so values on refined grids compare.
pub fn growth_ratio(f: &ScalarField, s: f64, radii: &[f64]) -> f64 {
    let g = f.grid();
    let d = g.dim();
    const PER_AXIS: usize = 16;
    let samples = PER_AXIS.pow(d as u32);
    let cell = g.cell_volume();
    let per = par::map(samples, |k| {
        let mut x = [0.0; MAX_DIM];
        let mut c = k;
        for a in 0..d {
            x[a] = g.origin()[a] + ((c % PER_AXIS) as f64 + 0.5) / PER_AXIS as f64 * g.extent()[a];
            c /= PER_AXIS;
        }
        let mut best = 0.0f64;
        for r in radii {
            let r2 = r * r;
            let mass: f64 = (0..g.len())
                .filter(|j| dist2(&g.center(*j), &x) <= r2)
                .map(|j| f.values()[j].abs() * cell)
                .sum();
            best = best.max(mass / r.powf(s));
        }
        best
    });
    per.into_iter().fold(0.0, f64::max)
}
