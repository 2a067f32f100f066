//! Convex compact polytopes in vertex form and their support calculus.
//!
//! Every set the rest of the crate manipulates (targets, control sets, discrete
//! reachable sets) is a [`Polytope`]: a normalized vertex cloud. In the plane the
//! vertices are additionally kept in counterclockwise hull order.

mod directions;
mod hausdorff;
mod hull;
mod polytope;
mod sweep;

pub use directions::DirectionGrid;
pub use hausdorff::{hausdorff_distance, point_polygon_distance, HausdorffDistance};
pub use hull::{convex_hull_normalize, in_convex_hull};
pub use sweep::{strict_hull_2d, support_sweep};
pub(crate) use polytope::edge_normal;
pub use polytope::{polytope_from_directions, Polytope, PolytopeJson};

use nalgebra::DVector;
use std::cmp::Ordering;

/// A point (or direction) in R^n.
pub type Point = DVector<f64>;

/// Absolute deduplication tolerance, applied after scaling by the problem size.
pub const TAU_DEDUP: f64 = 1e-9;

/// Relative tolerance on the cross product when eliminating collinear hull vertices.
pub const COLLINEAR_TOL: f64 = 1e-12;

/// Polygons below this area are treated as lower-dimensional.
pub const TAU_AREA: f64 = 1e-14;

/// Lexicographic comparison of two coordinate vectors.
pub fn lex_cmp(a: &Point, b: &Point) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Index of the point maximizing `<dir, p>`; exact float ties go to the
/// lexicographically largest point.
///
/// `dir` need not be normalized. Panics on an empty slice.
pub fn argmax_dot(points: &[Point], dir: &Point) -> usize {
    let mut best = 0;
    let mut best_val = dir.dot(&points[0]);
    for (i, p) in points.iter().enumerate().skip(1) {
        let v = dir.dot(p);
        if v > best_val || (v == best_val && lex_cmp(p, &points[best]) == Ordering::Greater) {
            best = i;
            best_val = v;
        }
    }
    best
}

/// Largest absolute coordinate of a point set, at least 1.
pub(crate) fn coord_scale<'a>(points: impl IntoIterator<Item = &'a Point>) -> f64 {
    points
        .into_iter()
        .flat_map(|p| p.iter())
        .fold(1.0f64, |m, x| m.max(x.abs()))
}

/// Twice the signed area of the triangle (o, a, b); positive for a left turn.
#[inline]
pub fn cross2(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

#[inline]
pub(crate) fn xy(p: &Point) -> [f64; 2] {
    [p[0], p[1]]
}

#[inline]
pub(crate) fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}
