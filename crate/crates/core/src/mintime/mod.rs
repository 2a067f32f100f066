//! The fully discrete minimum time function: fronts become level sets, the
//! bands between consecutive fronts are triangulated, and values in between
//! are interpolated barycentrically.

mod bounds;
mod triangulate;

pub use bounds::{
    error_bound_general, error_bound_two_dt, fit_hoelder, halton, sup_error_vs_oracle, ErrorBudget,
    Modulus, SupError, TwoDtBound,
};

use std::ops::Range;

use crate::error::{Error, Result};
use crate::geometry::{edge_normal, support_sweep, xy, Point, Polytope};
use crate::reach::ReachRun;
use triangulate::{ring_of, tri_area2, zip_rings};

/// Result of evaluating the surface at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evaluation {
    Value(f64),
    NotInDomain,
}

impl Evaluation {
    pub fn value(self) -> Option<f64> {
        match self {
            Evaluation::Value(v) => Some(v),
            Evaluation::NotInDomain => None,
        }
    }
}

/// Piecewise linear minimum time function over the triangulated fronts.
#[derive(Debug, Clone)]
pub struct TimeSurface {
    /// All front vertices, ring by ring (front 0 first).
    pub vertices: Vec<[f64; 2]>,
    pub values: Vec<f64>,
    /// Level of each vertex.
    pub vertex_level: Vec<usize>,
    pub triangles: Vec<[usize; 3]>,
    /// Band of each triangle: its vertices come from fronts `band` and `band+1`.
    pub triangle_band: Vec<usize>,
    /// Vertex index range of each front ring.
    pub rings: Vec<Range<usize>>,
    /// Triangle index range of each band.
    pub bands: Vec<Range<usize>>,
    pub times: Vec<f64>,
    pub fronts: Vec<Polytope>,
    /// Largest triangle diameter.
    pub max_diameter: f64,
    scale: f64,
}

/// Per-vertex values `t_i` for front `i` (the target's vertices get `t_0`).
///
/// Fails if a vertex of front `i` lies on the boundary of front `i + 1`, which
/// would give it two values.
pub fn assign_boundary_times(run: &ReachRun) -> Result<Vec<Vec<f64>>> {
    for i in 1..run.fronts.len() {
        let outer = &run.fronts[i].polytope;
        let inner = &run.fronts[i - 1].polytope;
        if let Some(v) = vertex_on_boundary(inner, outer) {
            return Err(Error::Structural {
                band: i - 1,
                reason: format!(
                    "vertex ({}, {}) lies on fronts {} and {}; the sets do not expand strictly",
                    v[0],
                    v[1],
                    i - 1,
                    i
                ),
            });
        }
    }
    Ok(run
        .fronts
        .iter()
        .map(|f| vec![f.time; f.polytope.len()])
        .collect())
}

/// A vertex of `inner` on the boundary of the polygon `outer`, if any: some
/// edge of `outer` supports `inner` as well.
fn vertex_on_boundary(inner: &Polytope, outer: &Polytope) -> Option<[f64; 2]> {
    let ring = ring_of(outer);
    let m = ring.len();
    if m < 3 {
        return None;
    }
    let tol = 1e-12 * outer.diameter().max(1.0);
    let normals: Vec<Point> = (0..m)
        .map(|e| {
            let n = edge_normal(ring[e], ring[(e + 1) % m]);
            Point::from_vec(n.to_vec())
        })
        .collect();
    let hit = support_sweep(inner.vertices(), &normals);
    (0..m).find_map(|e| {
        let v = xy(&inner.vertices()[hit[e]]);
        let n = &normals[e];
        let gap = n[0] * (ring[e][0] - v[0]) + n[1] * (ring[e][1] - v[1]);
        (gap <= tol).then_some(v)
    })
}

/// Builds the time surface of a planar run.
pub fn triangulate(run: &ReachRun) -> Result<TimeSurface> {
    if run.directions.dim() != 2 {
        return Err(Error::Structural {
            band: 0,
            reason: format!(
                "time surfaces are planar; the state dimension is {}",
                run.directions.dim()
            ),
        });
    }
    if run.fronts.len() < 2 {
        return Err(Error::Structural {
            band: 0,
            reason: "need at least one band (K >= 1)".into(),
        });
    }
    for (i, f) in run.fronts.iter().enumerate().skip(1) {
        if !f.polytope.is_full_dimensional() {
            return Err(Error::Structural {
                band: i - 1,
                reason: format!(
                    "front {i} is lower-dimensional; the band below it has no interior \
                     (the sets do not expand strictly)"
                ),
            });
        }
    }
    check_nesting(run)?;
    let values = assign_boundary_times(run)?;

    let mut vertices = Vec::new();
    let mut vals = Vec::new();
    let mut vertex_level = Vec::new();
    let mut rings = Vec::new();
    for (i, f) in run.fronts.iter().enumerate() {
        let start = vertices.len();
        vertices.extend(ring_of(&f.polytope));
        vals.extend_from_slice(&values[i]);
        vertex_level.extend(std::iter::repeat_n(i, f.polytope.len()));
        rings.push(start..vertices.len());
    }

    let mut triangles = Vec::new();
    let mut triangle_band = Vec::new();
    let mut bands = Vec::new();
    for b in 0..run.fronts.len() - 1 {
        let (ri, ro) = (rings[b].clone(), rings[b + 1].clone());
        let start = triangles.len();
        for t in zip_rings(&vertices[ri.clone()], &vertices[ro.clone()]) {
            let map = |k: usize| if k < ri.len() { ri.start + k } else { ro.start + k - ri.len() };
            triangles.push([map(t[0]), map(t[1]), map(t[2])]);
            triangle_band.push(b);
        }
        bands.push(start..triangles.len());
    }
    let max_diameter = triangles
        .iter()
        .map(|t| triangle_diameter(&vertices, t))
        .fold(0.0, f64::max);
    let scale = run.final_front().polytope.diameter().max(1.0);
    Ok(TimeSurface {
        vertices,
        values: vals,
        vertex_level,
        triangles,
        triangle_band,
        rings,
        bands,
        times: run.fronts.iter().map(|f| f.time).collect(),
        fronts: run.fronts.iter().map(|f| f.polytope.clone()).collect(),
        max_diameter,
        scale,
    })
}

fn check_nesting(run: &ReachRun) -> Result<()> {
    for (i, w) in run.fronts.windows(2).enumerate() {
        let worst = w[0]
            .support_values
            .iter()
            .zip(&w[1].support_values)
            .map(|(a, b)| b - a)
            .fold(f64::INFINITY, f64::min);
        if worst < -1e-9 {
            return Err(Error::Structural {
                band: i,
                reason: format!(
                    "front {} is not contained in front {} (support deficit {:.3e}); \
                     reduce the step size",
                    i,
                    i + 1,
                    -worst
                ),
            });
        }
        if worst <= 0.0 && w[0].polytope == w[1].polytope {
            return Err(Error::Structural {
                band: i,
                reason: format!("fronts {i} and {} coincide; the sets do not expand strictly", i + 1),
            });
        }
    }
    Ok(())
}

pub fn triangle_diameter(vertices: &[[f64; 2]], t: &[usize; 3]) -> f64 {
    let d = |a: usize, b: usize| {
        let (p, q) = (vertices[a], vertices[b]);
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
    };
    d(t[0], t[1]).max(d(t[1], t[2])).max(d(t[0], t[2]))
}

const BARY_TOL: f64 = 1e-9;

impl TimeSurface {
    pub fn levels(&self) -> usize {
        self.fronts.len() - 1
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        0.5 * tri_area2(self.vertices[a], self.vertices[b], self.vertices[c]).abs()
    }

    /// Barycentric coordinates of `x` in triangle `t`, or `None` if degenerate.
    pub fn barycentric(&self, t: usize, x: [f64; 2]) -> Option<[f64; 3]> {
        let [a, b, c] = self.triangles[t].map(|k| self.vertices[k]);
        let d = tri_area2(a, b, c);
        if d.abs() <= f64::MIN_POSITIVE {
            return None;
        }
        let la = tri_area2(x, b, c) / d;
        let lb = tri_area2(a, x, c) / d;
        let lc = tri_area2(a, b, x) / d;
        Some([la, lb, lc])
    }

    /// Interpolated value in triangle `t` from (possibly slightly negative)
    /// barycentric coordinates.
    pub fn interpolate(&self, t: usize, lambda: [f64; 3]) -> f64 {
        let idx = self.triangles[t];
        let mut l = lambda.map(|v| v.max(0.0));
        let s: f64 = l.iter().sum();
        l.iter_mut().for_each(|v| *v /= s);
        let top = (0..3).max_by(|&i, &j| l[i].total_cmp(&l[j])).unwrap();
        let base = self.values[idx[top]];
        if l[top] >= 1.0 - 1e-12 {
            return base;
        }
        let mut v = base;
        for k in 0..3 {
            if k != top {
                v += l[k] * (self.values[idx[k]] - base);
            }
        }
        v
    }

    /// Band containing `x`: the smallest `i` with `x` in front `i + 1`.
    /// `None` if `x` is in the target or outside the last front.
    fn locate_band(&self, x: [f64; 2]) -> Option<usize> {
        let tol = 1e-12 * self.scale;
        let k = self.levels();
        if !self.fronts[k].contains_2d(x, BARY_TOL * self.scale) {
            return None;
        }
        let (mut lo, mut hi) = (1usize, k);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.fronts[mid].contains_2d(x, tol) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(lo - 1)
    }

    fn best_in_band(&self, band: usize, x: [f64; 2]) -> Option<(usize, [f64; 3])> {
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for t in self.bands[band].clone() {
            if let Some(l) = self.barycentric(t, x) {
                let worst = l[0].min(l[1]).min(l[2]);
                if best.is_none_or(|b| worst > b.2) {
                    best = Some((t, l, worst));
                }
            }
        }
        best.map(|(t, l, _)| (t, l))
    }

    /// `T_h(x)`: `t_0` on the target, barycentric interpolation in the bands,
    /// [`Evaluation::NotInDomain`] outside the last front.
    pub fn evaluate(&self, x: [f64; 2]) -> Evaluation {
        if self.fronts[0].contains_2d(x, 1e-12 * self.scale) {
            return Evaluation::Value(self.times[0]);
        }
        let Some(band) = self.locate_band(x) else {
            return Evaluation::NotInDomain;
        };
        let lo = band.saturating_sub(1);
        let hi = (band + 1).min(self.bands.len() - 1);
        let mut pick = self.best_in_band(band, x);
        let worst = |p: &Option<(usize, [f64; 3])>| {
            p.map_or(f64::NEG_INFINITY, |(_, l)| l[0].min(l[1]).min(l[2]))
        };
        if worst(&pick) < -BARY_TOL {
            for b in [lo, hi] {
                let alt = self.best_in_band(b, x);
                if worst(&alt) > worst(&pick) {
                    pick = alt;
                }
            }
        }
        match pick {
            Some((t, l)) if worst(&pick) >= -1e-6 => Evaluation::Value(self.interpolate(t, l)),
            _ => Evaluation::NotInDomain,
        }
    }

    /// Recomputes the largest triangle diameter.
    pub fn recompute_max_diameter(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| triangle_diameter(&self.vertices, t))
            .fold(0.0, f64::max)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Writes the graph of T as an OFF surface: vertices `x y T`, faces
    /// `3 a b c`.
    pub fn write_off<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "OFF")?;
        writeln!(w, "{} {} 0", self.vertices.len(), self.triangles.len())?;
        for (p, v) in self.vertices.iter().zip(&self.values) {
            writeln!(w, "{} {} {}", p[0], p[1], v)?;
        }
        for t in &self.triangles {
            writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Coefficient, LinearSystem, Scheme};
    use crate::reach::{run, ReachConfig};
    use nalgebra::{dvector, DMatrix};

    fn product(levels: usize) -> TimeSurface {
        let sys = LinearSystem::new(
            Coefficient::Constant(DMatrix::zeros(2, 2)),
            Coefficient::Constant(DMatrix::identity(2, 2)),
            Polytope::cube(2, 1.0).unwrap(),
            Polytope::singleton(dvector![0.0, 0.0]),
            0.0,
            0.1 * levels as f64,
        )
        .unwrap();
        triangulate(&run(&sys, &ReachConfig::new(Scheme::Euler, levels, 2, 16)).unwrap()).unwrap()
    }

    #[test]
    fn product_surface_is_inf_norm() {
        let s = product(5);
        // fan of 4 triangles, then 8 per band between nested squares
        assert_eq!(s.triangles.len(), 4 + 8 * 4);
        assert!((s.total_area() - 1.0).abs() < 1e-12);
        for &x in &[[0.05f64, 0.0], [0.13, -0.27], [-0.49, 0.2], [0.3, 0.3]] {
            let want = x[0].abs().max(x[1].abs());
            let got = s.evaluate(x).value().unwrap();
            assert!((got - want).abs() <= 0.2, "{x:?}: {got} vs {want}");
        }
        assert_eq!(s.evaluate([0.6, 0.0]), Evaluation::NotInDomain);
        assert_eq!(s.evaluate([0.0, 0.0]), Evaluation::Value(0.0));
    }

    #[test]
    fn exact_at_vertices() {
        let s = product(5);
        for (i, p) in s.vertices.iter().enumerate() {
            assert_eq!(s.evaluate(*p), Evaluation::Value(s.values[i]));
        }
    }

    #[test]
    fn centroid_value() {
        let s = product(3);
        for t in 0..s.triangles.len() {
            let idx = s.triangles[t];
            let c = [0, 1].map(|d| idx.iter().map(|&k| s.vertices[k][d]).sum::<f64>() / 3.0);
            let want = idx.iter().map(|&k| s.values[k]).sum::<f64>() / 3.0;
            let got = s.evaluate(c).value().unwrap();
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn diameter_matches_recomputation() {
        let s = product(4);
        assert_eq!(s.max_diameter, s.recompute_max_diameter());
    }

    #[test]
    fn one_dimensional_runs_are_rejected() {
        let sys = LinearSystem::new(
            Coefficient::Constant(DMatrix::zeros(1, 1)),
            Coefficient::Constant(DMatrix::identity(1, 1)),
            Polytope::cube(1, 1.0).unwrap(),
            Polytope::singleton(dvector![0.0]),
            0.0,
            1.0,
        )
        .unwrap();
        let r = run(&sys, &ReachConfig::new(Scheme::Euler, 1, 1, 2)).unwrap();
        assert!(matches!(triangulate(&r), Err(Error::Structural { .. })));
    }

    #[test]
    fn off_export() {
        let s = product(1);
        let mut buf = Vec::new();
        s.write_off(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("OFF\n5 4 0\n"));
        assert_eq!(text.lines().count(), 2 + 5 + 4);
        assert!(text.lines().last().unwrap().starts_with("3 "));
    }
}
