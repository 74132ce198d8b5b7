use crate::error::{Error, Result};

use super::{Grid, ScalarField, MAX_DIM};

/// A union of grid cells, stored as a mask over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelSet {
    grid: Grid,
    mask: Vec<bool>,
}

impl VoxelSet {
    pub fn new(grid: Grid, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "mask has {} cells, grid has {}",
                mask.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, mask })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> bool) -> Self {
        let d = grid.dim();
        let mask = (0..grid.len()).map(|i| f(&grid.center(i)[..d])).collect();
        Self { grid, mask }
    }

    /// Set of the linear cell indices where `f` holds.
    pub fn from_fn_index(grid: Grid, f: impl Fn(usize) -> bool) -> Self {
        let mask = (0..grid.len()).map(f).collect();
        Self { grid, mask }
    }

    pub fn empty(grid: Grid) -> Self {
        let n = grid.len();
        Self {
            grid,
            mask: vec![false; n],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, lin: usize) -> bool {
        self.mask[lin]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|m| *m)
    }

    /// Linear indices of member cells.
    pub fn cells(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|i| self.mask[*i]).collect()
    }

    pub fn volume(&self) -> f64 {
        self.count() as f64 * self.grid.cell_volume()
    }

    /// Total area of exposed cell faces (the face-counting perimeter).
    pub fn perimeter(&self) -> f64 {
        let mut total = 0.0;
        self.for_each_face(|_, axis, _| total += self.grid.cell_volume() / self.grid.spacing(axis));
        total
    }

    /// Calls `f(cell, axis, sign)` for every exposed face; `sign` is the
    /// direction of the exterior normal along `axis`.
    fn for_each_face(&self, mut f: impl FnMut(usize, usize, f64)) {
        let d = self.grid.dim();
        let shape = self.grid.shape3();
        for lin in 0..self.mask.len() {
            if !self.mask[lin] {
                continue;
            }
            let idx = self.grid.unravel(lin);
            for a in 0..d {
                let stride: usize = shape[a + 1..].iter().product();
                let lower_open = idx[a] == 0 || !self.mask[lin - stride];
                let upper_open = idx[a] + 1 == shape[a] || !self.mask[lin + stride];
                if lower_open {
                    f(lin, a, -1.0);
                }
                if upper_open {
                    f(lin, a, 1.0);
                }
            }
        }
    }

    pub fn indicator(&self) -> ScalarField {
        ScalarField::from_raw(
            self.grid.clone(),
            self.mask.iter().map(|m| if *m { 1.0 } else { 0.0 }).collect(),
        )
    }

    pub fn union(&self, other: &VoxelSet) -> Result<VoxelSet> {
        self.grid.ensure_same(&other.grid)?;
        Ok(VoxelSet {
            grid: self.grid.clone(),
            mask: self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect(),
        })
    }

    pub fn is_subset_of(&self, other: &VoxelSet) -> bool {
        self.grid == other.grid && self.mask.iter().zip(&other.mask).all(|(a, b)| !*a || *b)
    }

    /// Cells within `k` cells (Chebyshev) of a cell of the opposite phase;
    /// cells beyond the grid count as outside the set.
    pub fn boundary_band(&self, k: usize) -> Vec<bool> {
        let d = self.grid.dim();
        let shape = self.grid.shape3();
        let k = k as isize;
        let mut out = vec![false; self.mask.len()];
        for lin in 0..self.mask.len() {
            let me = self.mask[lin];
            let idx = self.grid.unravel(lin);
            let span = |a: usize| if a < d { -k..=k } else { 0..=0 };
            'search: for o0 in span(0) {
                for o1 in span(1) {
                    for o2 in span(2) {
                        let off = [o0, o1, o2];
                        let mut nb = [0usize; MAX_DIM];
                        let mut outside = false;
                        for a in 0..MAX_DIM {
                            let v = idx[a] as isize + off[a];
                            if v < 0 || v >= shape[a] as isize {
                                outside = true;
                                break;
                            }
                            nb[a] = v as usize;
                        }
                        let other = if outside {
                            false
                        } else {
                            self.mask[self.grid.ravel(&nb)]
                        };
                        if other != me {
                            out[lin] = true;
                            break 'search;
                        }
                    }
                }
            }
        }
        out
    }
}

/// An axis-aligned face with exterior normal `sign * e_axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub center: [f64; MAX_DIM],
    pub axis: usize,
    pub sign: f64,
    /// Half side lengths; zero along `axis`.
    pub half: [f64; MAX_DIM],
}

impl Face {
    pub fn normal(&self) -> [f64; MAX_DIM] {
        let mut n = [0.0; MAX_DIM];
        n[self.axis] = self.sign;
        n
    }

    pub fn area(&self, dim: usize) -> f64 {
        (0..dim)
            .filter(|a| *a != self.axis)
            .map(|a| 2.0 * self.half[a])
            .product()
    }
}

/// Oriented-face representation of the derivative of an indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMeasure {
    dim: usize,
    faces: Vec<Face>,
}

impl SurfaceMeasure {
    pub fn new(dim: usize, faces: Vec<Face>) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not supported")));
        }
        if faces.is_empty() {
            return Err(Error::Degenerate("surface measure has no faces".into()));
        }
        Ok(Self { dim, faces })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// Total variation: the summed face area.
    pub fn mass(&self) -> f64 {
        self.faces.iter().map(|f| f.area(self.dim)).sum()
    }

    /// `sum area * normal`, which vanishes for closed surfaces.
    pub fn net_normal(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.dim];
        for f in &self.faces {
            s[f.axis] += f.sign * f.area(self.dim);
        }
        s
    }

    /// Smallest distance from `x` to any face.
    pub fn distance(&self, x: &[f64]) -> f64 {
        self.faces
            .iter()
            .map(|f| face_distance(f, x, self.dim))
            .fold(f64::INFINITY, f64::min)
    }

    /// Merges runs of coplanar faces that share an edge along the first
    /// tangent axis into longer rectangles; the measure is unchanged.
    pub fn merged(&self) -> SurfaceMeasure {
        let mut faces = self.faces.clone();
        let key = |f: &Face| {
            let t = (0..self.dim).find(|a| *a != f.axis).unwrap();
            let rest: Vec<i64> = (0..self.dim)
                .filter(|a| *a != t)
                .map(|a| (f.center[a] * 1e9).round() as i64)
                .collect();
            (f.axis, f.sign > 0.0, rest, t)
        };
        faces.sort_by(|p, q| {
            let (kp, kq) = (key(p), key(q));
            (kp.0, kp.1, &kp.2)
                .cmp(&(kq.0, kq.1, &kq.2))
                .then(p.center[kp.3].total_cmp(&q.center[kq.3]))
        });
        let mut out: Vec<Face> = Vec::with_capacity(faces.len());
        for f in faces {
            if let Some(last) = out.last_mut() {
                let (kl, kf) = (key(last), key(&f));
                let t = kf.3;
                let same_line = kl.0 == kf.0 && kl.1 == kf.1 && kl.2 == kf.2;
                let other_half_equal = (0..self.dim)
                    .filter(|a| *a != t && *a != f.axis)
                    .all(|a| (last.half[a] - f.half[a]).abs() <= 1e-12 * f.half[a].max(1e-300));
                let touching = ((last.center[t] + last.half[t]) - (f.center[t] - f.half[t])).abs()
                    <= 1e-9 * f.half[t];
                if same_line && other_half_equal && touching {
                    let lo = last.center[t] - last.half[t];
                    let hi = f.center[t] + f.half[t];
                    last.center[t] = 0.5 * (lo + hi);
                    last.half[t] = 0.5 * (hi - lo);
                    continue;
                }
            }
            out.push(f);
        }
        SurfaceMeasure {
            dim: self.dim,
            faces: out,
        }
    }
}

pub(crate) fn face_distance(f: &Face, x: &[f64], dim: usize) -> f64 {
    let mut s = 0.0;
    for a in 0..dim {
        let dx = (x[a] - f.center[a]).abs() - f.half[a];
        if dx > 0.0 {
            s += dx * dx;
        }
    }
    s.sqrt()
}

/// Cells whose centers lie in the closed ball `B(center, radius)`.
pub fn indicator_ball(grid: &Grid, center: &[f64], radius: f64) -> Result<VoxelSet> {
    if !(radius > 0.0) {
        return Err(Error::param("radius", radius, "radius must be positive"));
    }
    let r2 = radius * radius;
    let set = VoxelSet::from_fn(grid.clone(), |x| {
        x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum::<f64>() <= r2
    });
    if set.is_empty() {
        return Err(Error::Degenerate(
            "ball contains no cell center of the grid".into(),
        ));
    }
    Ok(set)
}

/// Exact voxelization of the cube `corner + [0, side]^d`, which must be
/// aligned with grid cells and lie inside the grid.
pub fn indicator_cube(grid: &Grid, corner: &[f64], side: f64) -> Result<VoxelSet> {
    let d = grid.dim();
    if corner.len() != d {
        return Err(Error::InvalidGrid("corner dimension mismatch".into()));
    }
    if !(side > 0.0) {
        return Err(Error::param("side", side, "side must be positive"));
    }
    let mut lo = [0usize; MAX_DIM];
    let mut hi = [1usize; MAX_DIM];
    for a in 0..d {
        let h = grid.spacing(a);
        let u = (corner[a] - grid.origin()[a]) / h;
        let m = side / h;
        let (ur, mr) = (u.round(), m.round());
        if (u - ur).abs() > 1e-9 || (m - mr).abs() > 1e-9 {
            return Err(Error::Precondition(format!(
                "cube is not aligned with grid cells along axis {a}"
            )));
        }
        if ur < 0.0 || ur + mr > grid.shape()[a] as f64 || mr < 1.0 {
            return Err(Error::Precondition(format!(
                "cube leaves the grid along axis {a}"
            )));
        }
        lo[a] = ur as usize;
        hi[a] = (ur + mr) as usize;
    }
    let mask = (0..grid.len())
        .map(|lin| {
            let idx = grid.unravel(lin);
            (0..d).all(|a| idx[a] >= lo[a] && idx[a] < hi[a])
        })
        .collect();
    VoxelSet::new(grid.clone(), mask)
}

/// One face record per exposed voxel face.
pub fn surface_measure(set: &VoxelSet) -> Result<SurfaceMeasure> {
    if set.is_empty() {
        return Err(Error::Degenerate("surface of an empty set".into()));
    }
    let g = set.grid();
    let d = g.dim();
    let mut faces = Vec::new();
    set.for_each_face(|lin, axis, sign| {
        let mut center = g.center(lin);
        center[axis] += sign * 0.5 * g.spacing(axis);
        let mut half = [0.0; MAX_DIM];
        for a in 0..d {
            if a != axis {
                half[a] = 0.5 * g.spacing(a);
            }
        }
        faces.push(Face {
            center,
            axis,
            sign,
            half,
        });
    });
    SurfaceMeasure::new(d, faces)
}

/// Voxelization of `{x : t x in E}` on the correspondingly dilated grid.
pub fn dilate_set(set: &VoxelSet, t: f64) -> Result<VoxelSet> {
    let grid = set.grid.dilate(t)?;
    VoxelSet::new(grid, set.mask.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_grid(d: usize, n: usize) -> Grid {
        // [-1, 3]^d with h = 4/n
        Grid::uniform(d, -1.0, 3.0, n).unwrap()
    }

    #[test]
    fn unit_cube_volume_and_perimeter() {
        let g = unit_grid(2, 16);
        let q = indicator_cube(&g, &[0.0, 0.0], 1.0).unwrap();
        assert_eq!(q.volume(), 1.0);
        assert_eq!(q.perimeter(), 4.0);
        let g3 = unit_grid(3, 8);
        let q3 = indicator_cube(&g3, &[0.0, 0.0, 0.0], 1.0).unwrap();
        assert_eq!(q3.volume(), 1.0);
        assert_eq!(q3.perimeter(), 6.0);
        let q2 = indicator_cube(&g, &[0.0, 0.0], 2.0).unwrap();
        assert_eq!(q2.perimeter(), 8.0);
    }

    #[test]
    fn misaligned_cube_is_rejected() {
        let g = unit_grid(2, 16);
        assert!(indicator_cube(&g, &[0.1, 0.0], 1.0).is_err());
        assert!(indicator_cube(&g, &[0.0, 0.0], 1.1).is_err());
        assert!(indicator_cube(&g, &[2.0, 0.0], 2.0).is_err());
    }

    #[test]
    fn cube_face_count() {
        // unit cube at 4 cells per side
        let g = Grid::uniform(2, -1.0, 2.0, 12).unwrap();
        let q = indicator_cube(&g, &[0.0, 0.0], 1.0).unwrap();
        let s = surface_measure(&q).unwrap();
        assert_eq!(s.faces().len(), 16);
        assert!(s.faces().iter().all(|f| (f.area(2) - 0.25).abs() < 1e-15));
        assert_relative_eq!(s.mass(), 4.0, max_relative = 1e-15);
        assert!(s.net_normal().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn merged_faces_preserve_measure() {
        let g = Grid::uniform(2, -1.0, 2.0, 24).unwrap();
        let q = indicator_cube(&g, &[0.0, 0.0], 1.0).unwrap();
        let s = surface_measure(&q).unwrap();
        let m = s.merged();
        assert_eq!(m.faces().len(), 4);
        assert_relative_eq!(m.mass(), 4.0, max_relative = 1e-14);
        let g3 = Grid::uniform(3, -1.0, 2.0, 6).unwrap();
        let b = indicator_ball(&g3, &[0.5, 0.5, 0.5], 0.9).unwrap();
        let s3 = surface_measure(&b).unwrap();
        assert_relative_eq!(s3.merged().mass(), s3.mass(), max_relative = 1e-13);
    }

    #[test]
    fn disjoint_cubes_add_perimeters() {
        let g = unit_grid(2, 16);
        let a = indicator_cube(&g, &[-1.0, -1.0], 1.0).unwrap();
        let b = indicator_cube(&g, &[1.0, 1.0], 1.0).unwrap();
        let u = a.union(&b).unwrap();
        assert_relative_eq!(surface_measure(&u).unwrap().mass(), 8.0);
    }

    #[test]
    fn dilation_scaling_is_exact() {
        let g = unit_grid(2, 16);
        let q = indicator_cube(&g, &[0.0, 0.0], 1.0).unwrap();
        assert_eq!(dilate_set(&q, 1.0).unwrap(), q);
        let q2 = dilate_set(&q, 2.0).unwrap();
        assert_eq!(q2.volume(), 0.25);
        assert_eq!(q2.perimeter(), 2.0);
        let g3 = unit_grid(3, 8);
        let c = indicator_cube(&g3, &[0.0, 0.0, 0.0], 1.0).unwrap();
        let ch = dilate_set(&c, 0.5).unwrap();
        assert_eq!(ch.volume(), 8.0);
        assert_eq!(ch.perimeter(), 24.0);
        assert!(dilate_set(&q, 0.0).is_err());
    }

    #[test]
    fn tiny_ball_is_handled() {
        let g = Grid::uniform(2, -1.0, 1.0, 20).unwrap();
        let h = g.spacing(0);
        // centered on a cell center: exactly one cell
        let c = g.center_of(&[10, 10]);
        let b = indicator_ball(&g, &c[..2], 0.5 * h).unwrap();
        assert_eq!(b.count(), 1);
        // centered on a grid node: no cell center within h/2
        assert!(indicator_ball(&g, &[0.0, 0.0], 0.5 * h).is_err());
    }

    #[test]
    fn band_marks_cells_near_boundary() {
        let g = unit_grid(2, 16);
        let q = indicator_cube(&g, &[0.0, 0.0], 1.0).unwrap();
        let band = q.boundary_band(1);
        let inside = g.ravel(&[5, 5]);
        assert!(!band[inside]);
        let edge = g.ravel(&[4, 5]);
        assert!(band[edge]);
    }
}
