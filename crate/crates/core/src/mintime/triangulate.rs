use std::f64::consts::TAU;

use crate::geometry::{cross2, xy};
use crate::geometry::Polytope;

/// Triangles filling the region between two nested convex rings, as index
/// triples into `inner ++ outer` (outer indices offset by `inner.len()`).
///
/// Both rings are swept by outward normal angle: passing the normal of an inner
/// edge emits the triangle over that edge with the current outer vertex, and
/// vice versa. Each bridge joins the supporting points of both rings for a common
/// normal, so bridges stay inside the annulus and never cross. Simultaneous
/// events (parallel edges) are ordered so that the shorter diagonal is used.
pub(crate) fn zip_rings(inner: &[[f64; 2]], outer: &[[f64; 2]]) -> Vec<[usize; 3]> {
    let n = inner.len();
    let m = outer.len();
    let ia = edge_angles(inner);
    let oa = edge_angles(outer);

    let mut all: Vec<f64> = ia.iter().chain(oa.iter()).copied().collect();
    all.sort_by(f64::total_cmp);
    let start = widest_gap_middle(&all);
    let offset = |a: f64| (a - start).rem_euclid(TAU);

    let mut iev: Vec<(f64, usize)> = ia.iter().enumerate().map(|(i, &a)| (offset(a), i)).collect();
    let mut oev: Vec<(f64, usize)> = oa.iter().enumerate().map(|(j, &a)| (offset(a), j)).collect();
    iev.sort_by(|a, b| a.0.total_cmp(&b.0));
    oev.sort_by(|a, b| a.0.total_cmp(&b.0));

    // The vertex supporting the start direction is the tail of the first edge
    // whose normal comes after it.
    let mut p = iev.first().map_or(0, |e| e.1);
    let mut q = oev.first().map_or(0, |e| e.1);
    let (mut a, mut b) = (0usize, 0usize);
    let mut tris = Vec::with_capacity(n + m);
    const TIE: f64 = 1e-9;
    while a < iev.len() || b < oev.len() {
        let take_inner = match (iev.get(a), oev.get(b)) {
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (Some(x), Some(y)) => {
                if (x.0 - y.0).abs() < TIE {
                    // inner first leaves the diagonal p'q, outer first leaves pq'
                    let p2 = inner[(p + 1) % n];
                    let q2 = outer[(q + 1) % m];
                    dist2(p2, outer[q]) <= dist2(inner[p], q2)
                } else {
                    x.0 < y.0
                }
            }
            (None, None) => unreachable!(),
        };
        if take_inner {
            let p2 = (p + 1) % n;
            tris.push([p, n + q, p2]);
            p = p2;
            a += 1;
        } else {
            let q2 = (q + 1) % m;
            tris.push([p, n + q, n + q2]);
            q = q2;
            b += 1;
        }
    }
    tris
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Outward normal angles of the edges `i -> i+1` of a counterclockwise ring.
/// A single point has no edges; a segment has two opposite ones.
fn edge_angles(ring: &[[f64; 2]]) -> Vec<f64> {
    let n = ring.len();
    if n < 2 {
        return Vec::new();
    }
    (0..n)
        .map(|i| {
            let a = ring[i];
            let b = ring[(i + 1) % n];
            (-(b[0] - a[0])).atan2(b[1] - a[1])
        })
        .collect()
}

fn widest_gap_middle(sorted: &[f64]) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let mut best = (sorted[0] + TAU - sorted[sorted.len() - 1], sorted[sorted.len() - 1]);
    for w in sorted.windows(2) {
        if w[1] - w[0] > best.0 {
            best = (w[1] - w[0], w[0]);
        }
    }
    best.1 + 0.5 * best.0
}

pub(crate) fn ring_of(p: &Polytope) -> Vec<[f64; 2]> {
    p.vertices().iter().map(xy).collect()
}

/// Twice the signed area.
pub(crate) fn tri_area2(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    cross2(a, b, c)
}
