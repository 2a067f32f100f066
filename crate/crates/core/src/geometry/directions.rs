use std::f64::consts::PI;

use super::Point;
use crate::error::{Error, Result};

/// A finite set of unit directions with a certified covering radius:
/// every unit vector is within `density_eps` (Euclidean) of some grid direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionGrid {
    dim: usize,
    directions: Vec<Point>,
    density_eps: f64,
}

impl DirectionGrid {
    /// `N` equally spaced angles `2 pi k / N`, `k = 0..N`.
    ///
    /// Multiples of a quarter turn are returned as exact axis vectors.
    pub fn uniform_2d(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::domain(format!("a planar direction grid needs N >= 3, got {n}")));
        }
        let directions = (0..n)
            .map(|k| {
                let (x, y) = if (4 * k) % n == 0 {
                    match 4 * k / n {
                        0 => (1.0, 0.0),
                        1 => (0.0, 1.0),
                        2 => (-1.0, 0.0),
                        _ => (0.0, -1.0),
                    }
                } else {
                    let (s, c) = (2.0 * PI * k as f64 / n as f64).sin_cos();
                    (c, s)
                };
                Point::from_vec(vec![x, y])
            })
            .collect();
        Ok(DirectionGrid {
            dim: 2,
            directions,
            density_eps: 2.0 * (PI / (2.0 * n as f64)).sin(),
        })
    }

    /// The unit sphere of R^1, `{+1, -1}`; exact.
    pub fn interval() -> Self {
        DirectionGrid {
            dim: 1,
            directions: vec![Point::from_vec(vec![1.0]), Point::from_vec(vec![-1.0])],
            density_eps: 0.0,
        }
    }

    /// Radial projection of a regular grid on the surface of `[-1,1]^dim`
    /// with `per_axis` cells per face edge.
    ///
    /// Projection from outside the unit ball onto the sphere is 1-Lipschitz, so
    /// the covering radius is at most half a face-cell diagonal.
    pub fn cube_surface(dim: usize, per_axis: usize) -> Result<Self> {
        if dim < 2 || per_axis < 1 {
            return Err(Error::domain("cube-surface grid needs dim >= 2 and per_axis >= 1"));
        }
        let step = 2.0 / per_axis as f64;
        let ticks: Vec<f64> = (0..=per_axis).map(|i| -1.0 + step * i as f64).collect();
        let mut dirs: Vec<Point> = Vec::new();
        let free = dim - 1;
        let total = ticks.len().pow(free as u32);
        for axis in 0..dim {
            for sign in [1.0, -1.0] {
                for idx in 0..total {
                    let mut rem = idx;
                    let mut v = Vec::with_capacity(dim);
                    let mut on_other_face = false;
                    for d in 0..dim {
                        if d == axis {
                            v.push(sign);
                        } else {
                            let t = ticks[rem % ticks.len()];
                            rem /= ticks.len();
                            // Points on a face boundary belong to several faces; keep
                            // them only on the face with the smallest axis index.
                            if t.abs() == 1.0 && d < axis {
                                on_other_face = true;
                            }
                            v.push(t);
                        }
                    }
                    if on_other_face {
                        continue;
                    }
                    let p = Point::from_vec(v);
                    let norm = p.norm();
                    dirs.push(p / norm);
                }
            }
        }
        dirs.sort_by(super::lex_cmp);
        dirs.dedup_by(|a, b| (&*a - &*b).amax() < 1e-15);
        Ok(DirectionGrid {
            dim,
            directions: dirs,
            density_eps: 0.5 * step * (free as f64).sqrt(),
        })
    }

    /// A caller-supplied grid. Directions are normalized; `density_eps` is
    /// taken on trust.
    pub fn custom(dim: usize, directions: Vec<Point>, density_eps: f64) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::domain("empty direction grid"));
        }
        if !(density_eps >= 0.0) {
            return Err(Error::domain("density_eps must be nonnegative"));
        }
        let mut out = Vec::with_capacity(directions.len());
        for d in directions {
            if d.len() != dim {
                return Err(Error::dim(dim, d.len()));
            }
            let n = d.norm();
            if !(n > 0.0) || !n.is_finite() {
                return Err(Error::domain("zero or non-finite direction"));
            }
            out.push(d / n);
        }
        Ok(DirectionGrid {
            dim,
            directions: out,
            density_eps,
        })
    }

    /// A reasonable grid with roughly `count` directions for the given dimension.
    pub fn for_dim(dim: usize, count: usize) -> Result<Self> {
        match dim {
            0 => Err(Error::domain("dimension must be positive")),
            1 => Ok(DirectionGrid::interval()),
            2 => DirectionGrid::uniform_2d(count),
            d => {
                // 2 d (s+1)^(d-1) ~ count
                let per_face = (count as f64 / (2.0 * d as f64)).max(1.0);
                let s = (per_face.powf(1.0 / (d - 1) as f64) - 1.0).ceil().max(1.0) as usize;
                DirectionGrid::cube_surface(d, s)
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn directions(&self) -> &[Point] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn density_eps(&self) -> f64 {
        self.density_eps
    }
}
