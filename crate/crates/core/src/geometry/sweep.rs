use std::cmp::Ordering;

use super::{argmax_dot, cross2, lex_cmp, xy, Point};

/// Indices of the vertices of the convex hull of a planar point set, in
/// counterclockwise order from the lexicographically smallest point.
///
/// No tolerances: a point is dropped only if the exact floating point
/// orientation test puts it inside or on a hull edge. Every maximizer of a
/// linear functional that is lexicographically largest among the maximizers is
/// such a vertex.
pub fn strict_hull_2d(points: &[Point]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| lex_cmp(&points[a], &points[b]).then(a.cmp(&b)));
    idx.dedup_by(|a, b| points[*a] == points[*b]);
    if idx.len() < 3 {
        return idx;
    }
    let p = |i: usize| xy(&points[i]);
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2 && cross2(p(lower[lower.len() - 2]), p(lower[lower.len() - 1]), p(i)) <= 0.0 {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2 && cross2(p(upper[upper.len() - 2]), p(upper[upper.len() - 1]), p(i)) <= 0.0 {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// For each direction, the index in `ring` maximizing `<d, v>` (lexicographically
/// largest on exact ties).
///
/// `ring` must be a convex polygon in counterclockwise order. Directions are
/// visited by angle while a caliper walks the ring, so the cost is
/// `O(m log m + n)` instead of `O(m n)`. Small rings and sparse direction sets
/// fall back to the exhaustive scan.
pub fn support_sweep(ring: &[Point], dirs: &[Point]) -> Vec<usize> {
    let n = ring.len();
    if n <= 16 || dirs.len() < 8 || ring[0].len() != 2 {
        return dirs.iter().map(|d| argmax_dot(ring, d)).collect();
    }
    let ang: Vec<f64> = dirs.iter().map(|d| d[1].atan2(d[0])).collect();
    let mut order: Vec<usize> = (0..dirs.len()).collect();
    order.sort_by(|&a, &b| ang[a].total_cmp(&ang[b]).then(a.cmp(&b)));
    let mut widest = ang[order[0]] + std::f64::consts::TAU - ang[order[order.len() - 1]];
    for w in order.windows(2) {
        widest = widest.max(ang[w[1]] - ang[w[0]]);
    }
    if widest >= std::f64::consts::FRAC_PI_2 {
        return dirs.iter().map(|d| argmax_dot(ring, d)).collect();
    }
    let mut out = vec![0; dirs.len()];
    let mut cur = argmax_dot(ring, &dirs[order[0]]);
    for &k in &order {
        let d = &dirs[k];
        let better = |a: usize, b: usize| {
            let (va, vb) = (d.dot(&ring[a]), d.dot(&ring[b]));
            va > vb || (va == vb && lex_cmp(&ring[a], &ring[b]) == Ordering::Greater)
        };
        let mut steps = 0;
        loop {
            let next = (cur + 1) % n;
            if steps < n && better(next, cur) {
                cur = next;
                steps += 1;
            } else {
                break;
            }
        }
        out[k] = cur;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DirectionGrid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hull_indices_of_square() {
        let pts: Vec<Point> = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5], [1.0, 1.0]]
            .iter()
            .map(|p| Point::from_row_slice(p))
            .collect();
        let h = strict_hull_2d(&pts);
        let got: Vec<[f64; 2]> = h.iter().map(|&i| xy(&pts[i])).collect();
        assert_eq!(got, vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
    }

    #[test]
    fn sweep_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..20 {
            let pts: Vec<Point> = (0..400)
                .map(|_| {
                    let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    let r: f64 = rng.random_range(0.5..1.0);
                    Point::from_vec(vec![2.0 * r * a.cos(), r * a.sin()])
                })
                .collect();
            let ring: Vec<Point> = strict_hull_2d(&pts).into_iter().map(|i| pts[i].clone()).collect();
            let grid = DirectionGrid::uniform_2d(50 + 37 * trial).unwrap();
            let fast = support_sweep(&ring, grid.directions());
            for (k, d) in grid.directions().iter().enumerate() {
                assert_eq!(fast[k], argmax_dot(&ring, d), "trial {trial} dir {k}");
                let all = argmax_dot(&pts, d);
                assert_eq!(ring[fast[k]], pts[all]);
            }
        }
    }
}
