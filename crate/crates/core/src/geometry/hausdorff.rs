use super::{cross2, dist2, xy, DirectionGrid, Point, Polytope};
use crate::error::{Error, Result};

/// Hausdorff distance, exact in dimensions one and two and bracketed above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HausdorffDistance {
    pub lower: f64,
    pub upper: f64,
}

impl HausdorffDistance {
    fn exact(d: f64) -> Self {
        HausdorffDistance { lower: d, upper: d }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    /// The exact value when available, otherwise the upper bracket.
    pub fn value(&self) -> f64 {
        self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

pub(crate) fn point_segment_distance(x: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return dist2(x, a);
    }
    let t = ((x[0] - a[0]) * dx + (x[1] - a[1]) * dy) / len2;
    // endpoints exactly, so a vertex is at distance zero from its own edges
    if t <= 0.0 {
        dist2(x, a)
    } else if t >= 1.0 {
        dist2(x, b)
    } else {
        dist2(x, [a[0] + t * dx, a[1] + t * dy])
    }
}

/// Euclidean distance from `x` to a convex polygon given as a ccw ring
/// (a point or a segment when the ring has one or two entries).
pub fn point_polygon_distance(x: [f64; 2], ring: &[[f64; 2]]) -> f64 {
    match ring.len() {
        0 => f64::INFINITY,
        1 => dist2(x, ring[0]),
        2 => point_segment_distance(x, ring[0], ring[1]),
        n => {
            let inside = (0..n).all(|i| cross2(ring[i], ring[(i + 1) % n], x) >= 0.0);
            if inside {
                return 0.0;
            }
            (0..n)
                .map(|i| point_segment_distance(x, ring[i], ring[(i + 1) % n]))
                .fold(f64::INFINITY, f64::min)
        }
    }
}

fn directed_2d(from: &[[f64; 2]], to: &[[f64; 2]]) -> f64 {
    // distance to a convex set is convex, so its max over a polygon is at a vertex
    from.iter()
        .map(|&v| point_polygon_distance(v, to))
        .fold(0.0, f64::max)
}

/// Hausdorff distance between two polytopes of equal dimension.
///
/// Dimensions one and two are exact. Above that, a cube-surface direction grid
/// brackets the distance: the lower end is the largest support-function gap on
/// the grid, the upper end adds the Lipschitz slack of the gap between grid
/// directions.
pub fn hausdorff_distance(p: &Polytope, q: &Polytope) -> Result<HausdorffDistance> {
    if p.dim() != q.dim() {
        return Err(Error::dim(p.dim(), q.dim()));
    }
    match p.dim() {
        1 => {
            let (a0, a1) = interval(p);
            let (b0, b1) = interval(q);
            Ok(HausdorffDistance::exact((a0 - b0).abs().max((a1 - b1).abs())))
        }
        2 => {
            let rp: Vec<[f64; 2]> = p.vertices().iter().map(xy).collect();
            let rq: Vec<[f64; 2]> = q.vertices().iter().map(xy).collect();
            Ok(HausdorffDistance::exact(directed_2d(&rp, &rq).max(directed_2d(&rq, &rp))))
        }
        d => {
            let grid = DirectionGrid::for_dim(d, 20_000)?;
            Ok(bracket(p, q, &grid))
        }
    }
}

fn interval(p: &Polytope) -> (f64, f64) {
    let v = p.vertices();
    let lo = v.iter().map(|x| x[0]).fold(f64::INFINITY, f64::min);
    let hi = v.iter().map(|x| x[0]).fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn bracket(p: &Polytope, q: &Polytope, grid: &DirectionGrid) -> HausdorffDistance {
    let c = p.centroid();
    let shift = |poly: &Polytope| -> Vec<Point> { poly.vertices().iter().map(|v| v - &c).collect() };
    let pv = shift(p);
    let qv = shift(q);
    let radius = |vs: &[Point]| vs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let support = |vs: &[Point], l: &Point| vs.iter().map(|v| l.dot(v)).fold(f64::NEG_INFINITY, f64::max);
    let lower = grid
        .directions()
        .iter()
        .map(|l| (support(&pv, l) - support(&qv, l)).abs())
        .fold(0.0, f64::max);
    let slack = (radius(&pv) + radius(&qv)) * grid.density_eps();
    HausdorffDistance {
        lower,
        upper: lower + slack,
    }
}
