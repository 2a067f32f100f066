use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{
    argmax_dot, convex_hull_normalize, coord_scale, cross2, dist2, xy, DirectionGrid, Point,
    TAU_AREA,
};
use crate::error::{Error, Result};

/// A nonempty convex compact polytope stored by its extreme points.
///
/// In the plane the vertices are in counterclockwise hull order starting at the
/// lexicographically smallest vertex; no three consecutive vertices are
/// collinear. Segments and singletons are valid (lower-dimensional) polytopes.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Point>,
}

/// JSON form: `{"dim": n, "vertices": [[...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PolytopeJson {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
}

impl Polytope {
    /// Normalizes `points` to the extreme points of their hull.
    pub fn from_points(dim: usize, points: &[Point]) -> Result<Self> {
        let vertices = convex_hull_normalize(points, dim)?;
        Ok(Polytope { dim, vertices })
    }

    pub fn singleton(p: Point) -> Self {
        Polytope {
            dim: p.len(),
            vertices: vec![p],
        }
    }

    /// The axis-aligned box `[lo_1, hi_1] x ... x [lo_n, hi_n]`.
    pub fn axis_box(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::domain("box bounds must be nonempty and of equal length"));
        }
        if lo.iter().zip(hi).any(|(a, b)| a > b) {
            return Err(Error::domain("box lower bound exceeds upper bound"));
        }
        let n = lo.len();
        let corners: Vec<Point> = (0..1usize << n)
            .map(|mask| Point::from_fn(n, |i, _| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }))
            .collect();
        Polytope::from_points(n, &corners)
    }

    /// The symmetric box `[-r, r]^n`.
    pub fn cube(n: usize, r: f64) -> Result<Self> {
        Polytope::axis_box(&vec![-r; n], &vec![r; n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Counterclockwise traversal order, present for planar polytopes.
    pub fn hull_order(&self) -> Option<Vec<usize>> {
        (self.dim == 2).then(|| (0..self.vertices.len()).collect())
    }

    fn check_direction(&self, l: &Point) -> Result<()> {
        if l.len() != self.dim {
            return Err(Error::dim(self.dim, l.len()));
        }
        if (l.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!("direction has norm {}, expected 1", l.norm())));
        }
        Ok(())
    }

    /// `max <l, v>` over the vertices.
    pub fn support_function(&self, l: &Point) -> Result<f64> {
        self.check_direction(l)?;
        Ok(self.support_unchecked(l))
    }

    /// The supporting point in direction `l` (lexicographically largest on ties).
    pub fn supporting_point(&self, l: &Point) -> Result<&Point> {
        self.check_direction(l)?;
        Ok(&self.vertices[argmax_dot(&self.vertices, l)])
    }

    /// Support value for an arbitrary (not necessarily unit) covector.
    pub fn support_unchecked(&self, l: &Point) -> f64 {
        self.vertices
            .iter()
            .map(|v| l.dot(v))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn minkowski_sum(&self, other: &Polytope) -> Result<Polytope> {
        if self.dim != other.dim {
            return Err(Error::dim(self.dim, other.dim));
        }
        let sums: Vec<Point> = self
            .vertices
            .iter()
            .flat_map(|a| other.vertices.iter().map(move |b| a + b))
            .collect();
        Polytope::from_points(self.dim, &sums)
    }

    /// The image `{M v}`; `M` must have `self.dim()` columns.
    pub fn linear_image(&self, m: &DMatrix<f64>) -> Result<Polytope> {
        if m.ncols() != self.dim {
            return Err(Error::dim(self.dim, m.ncols()));
        }
        if m.nrows() == 0 {
            return Err(Error::domain("linear map with zero rows"));
        }
        let img: Vec<Point> = self.vertices.iter().map(|v| m * v).collect();
        Polytope::from_points(m.nrows(), &img)
    }

    pub fn translate(&self, t: &Point) -> Result<Polytope> {
        if t.len() != self.dim {
            return Err(Error::dim(self.dim, t.len()));
        }
        Ok(Polytope {
            dim: self.dim,
            vertices: self.vertices.iter().map(|v| v + t).collect(),
        })
    }

    /// Largest pairwise vertex distance.
    pub fn diameter(&self) -> f64 {
        let mut d = 0.0f64;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max((a - b).norm());
            }
        }
        d
    }

    pub fn centroid(&self) -> Point {
        let mut c = Point::zeros(self.dim);
        for v in &self.vertices {
            c += v;
        }
        c / self.vertices.len() as f64
    }

    pub(crate) fn scale(&self) -> f64 {
        coord_scale(&self.vertices)
    }

    /// Enclosed area of a planar polytope (zero for segments and points).
    pub fn area(&self) -> f64 {
        if self.dim != 2 || self.vertices.len() < 3 {
            return 0.0;
        }
        let n = self.vertices.len();
        let mut a = 0.0;
        for i in 0..n {
            let p = &self.vertices[i];
            let q = &self.vertices[(i + 1) % n];
            a += p[0] * q[1] - p[1] * q[0];
        }
        0.5 * a
    }

    /// Whether a planar polytope has positive area.
    pub fn is_full_dimensional(&self) -> bool {
        match self.dim {
            1 => self.vertices.len() == 2,
            2 => self.area() > TAU_AREA * self.scale().powi(2),
            _ => self.vertices.len() > self.dim,
        }
    }

    /// Membership test for planar polytopes with absolute tolerance `tol`.
    pub fn contains_2d(&self, x: [f64; 2], tol: f64) -> bool {
        let ring: Vec<[f64; 2]> = self.vertices.iter().map(xy).collect();
        match ring.len() {
            1 => dist2(ring[0], x) <= tol,
            2 => super::hausdorff::point_segment_distance(x, ring[0], ring[1]) <= tol,
            n => (0..n).all(|i| {
                let a = ring[i];
                let b = ring[(i + 1) % n];
                cross2(a, b, x) >= -tol * dist2(a, b)
            }),
        }
    }

    /// Angular bisector of the outward normals of the two edges meeting at
    /// vertex `index` of a planar polygon. The result lies in the normal cone.
    pub fn vertex_normal(&self, index: usize) -> Result<Point> {
        if self.dim != 2 {
            return Err(Error::Unsupported("vertex normals are planar only".into()));
        }
        let n = self.vertices.len();
        if n < 3 || !self.is_full_dimensional() {
            return Err(Error::domain("vertex normal of a degenerate polygon"));
        }
        if index >= n {
            return Err(Error::domain(format!("vertex index {index} out of range ({n} vertices)")));
        }
        let prev = xy(&self.vertices[(index + n - 1) % n]);
        let cur = xy(&self.vertices[index]);
        let next = xy(&self.vertices[(index + 1) % n]);
        let n1 = edge_normal(prev, cur);
        let n2 = edge_normal(cur, next);
        let b = [n1[0] + n2[0], n1[1] + n2[1]];
        let len = (b[0] * b[0] + b[1] * b[1]).sqrt();
        Ok(Point::from_vec(vec![b[0] / len, b[1] / len]))
    }

    /// Index of the vertex equal to `v` within `tol`, if any.
    pub fn find_vertex(&self, v: &Point, tol: f64) -> Option<usize> {
        self.vertices.iter().position(|w| (w - v).amax() <= tol)
    }

    pub fn to_json(&self) -> PolytopeJson {
        PolytopeJson {
            dim: self.dim,
            vertices: self.vertices.iter().map(|v| v.iter().copied().collect()).collect(),
        }
    }

    pub fn from_json(j: &PolytopeJson) -> Result<Polytope> {
        let pts: Vec<Point> = j
            .vertices
            .iter()
            .map(|v| Point::from_vec(v.clone()))
            .collect();
        Polytope::from_points(j.dim, &pts)
    }
}

/// Unit outward normal of a counterclockwise edge a -> b.
pub(crate) fn edge_normal(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len = (dx * dx + dy * dy).sqrt();
    [dy / len, -dx / len]
}

/// Hull of the supporting points of `p` in the grid directions; an inner
/// approximation within `2 diam(p) eps` in Hausdorff distance.
pub fn polytope_from_directions(p: &Polytope, grid: &DirectionGrid) -> Result<Polytope> {
    if grid.dim() != p.dim() {
        return Err(Error::dim(p.dim(), grid.dim()));
    }
    let pts: Vec<Point> = grid
        .directions()
        .iter()
        .map(|l| p.vertices[argmax_dot(&p.vertices, l)].clone())
        .collect();
    Polytope::from_points(p.dim(), &pts)
}
