use super::{coord_scale, cross2, lex_cmp, xy, Point, COLLINEAR_TOL, TAU_DEDUP};
use crate::error::{Error, Result};

/// Reduces a point cloud to the extreme points of its convex hull.
///
/// * dim 1: the two endpoints of the spanned interval.
/// * dim 2: Andrew's monotone chain, counterclockwise from the lexicographically
///   smallest vertex, with collinear vertices removed.
/// * dim >= 3: a point is dropped iff it lies in the hull of the remaining
///   ones, decided by a phase-one simplex feasibility problem.
///
/// Coincident points (within `TAU_DEDUP` times the coordinate scale) collapse to
/// one. Lower-dimensional inputs yield lower-dimensional vertex sets.
pub fn convex_hull_normalize(points: &[Point], dim: usize) -> Result<Vec<Point>> {
    if points.is_empty() {
        return Err(Error::domain("convex hull of an empty point set"));
    }
    if dim == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    for p in points {
        if p.len() != dim {
            return Err(Error::dim(dim, p.len()));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("non-finite coordinate in point set"));
        }
    }
    let tol = TAU_DEDUP * coord_scale(points);
    let pts = dedup_sorted(points, tol);
    Ok(match dim {
        1 => hull_1d(pts),
        2 => monotone_chain(pts),
        _ => extreme_points(pts, tol),
    })
}

fn dedup_sorted(points: &[Point], tol: f64) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(lex_cmp);
    let mut out: Vec<Point> = Vec::with_capacity(pts.len());
    for p in pts {
        // Sorted order puts exact duplicates adjacent; near duplicates are almost
        // always adjacent too, but check the last few to be safe.
        let dup = out
            .iter()
            .rev()
            .take(8)
            .any(|q| (q - &p).amax() <= tol);
        if !dup {
            out.push(p);
        }
    }
    out
}

fn hull_1d(pts: Vec<Point>) -> Vec<Point> {
    let lo = pts.first().unwrap().clone();
    let hi = pts.last().unwrap().clone();
    if pts.len() == 1 {
        vec![lo]
    } else {
        vec![lo, hi]
    }
}

fn left_turn(o: &Point, a: &Point, b: &Point) -> bool {
    let (o, a, b) = (xy(o), xy(a), xy(b));
    let c = cross2(o, a, b);
    let la = ((a[0] - o[0]).powi(2) + (a[1] - o[1]).powi(2)).sqrt();
    let lb = ((b[0] - o[0]).powi(2) + (b[1] - o[1]).powi(2)).sqrt();
    c > COLLINEAR_TOL * la * lb
}

fn monotone_chain(pts: Vec<Point>) -> Vec<Point> {
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && !left_turn(&lower[lower.len() - 2], &lower[lower.len() - 1], p) {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Point> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && !left_turn(&upper[upper.len() - 2], &upper[upper.len() - 1], p) {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn extreme_points(mut pts: Vec<Point>, tol: f64) -> Vec<Point> {
    let mut i = 0;
    while i < pts.len() {
        if pts.len() <= 1 {
            break;
        }
        let p = pts[i].clone();
        let others: Vec<&Point> = pts
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, q)| q)
            .collect();
        if in_convex_hull(&others, &p, tol) {
            pts.remove(i);
        } else {
            i += 1;
        }
    }
    pts
}

/// Decides whether `p` is a convex combination of `points` (any dimension).
///
/// Solves the phase-one problem of `{lambda >= 0, sum lambda = 1, V lambda = p}`
/// with a dense simplex tableau and Bland's rule; feasible iff the residual is
/// at most `tol`.
pub fn in_convex_hull(points: &[&Point], p: &Point, tol: f64) -> bool {
    if points.is_empty() {
        return false;
    }
    let d = p.len();
    let k = points.len();
    let rows = d + 1;
    let ncol = k + rows;
    let rhs = ncol;
    let mut tab = vec![vec![0.0; ncol + 1]; rows];
    for i in 0..d {
        for (j, q) in points.iter().enumerate() {
            tab[i][j] = q[i];
        }
        tab[i][rhs] = p[i];
    }
    for j in 0..k {
        tab[d][j] = 1.0;
    }
    tab[d][rhs] = 1.0;
    for (i, row) in tab.iter_mut().enumerate() {
        if row[rhs] < 0.0 {
            for x in row.iter_mut() {
                *x = -*x;
            }
        }
        row[k + i] = 1.0;
    }
    let mut basis: Vec<usize> = (k..k + rows).collect();
    let mut z = vec![0.0; ncol + 1];
    for row in &tab {
        for j in 0..k {
            z[j] -= row[j];
        }
        z[rhs] -= row[rhs];
    }
    let eps = 1e-12;
    for _ in 0..(50 * (ncol + rows)) {
        let Some(enter) = (0..ncol).find(|&j| z[j] < -eps) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..rows {
            let a = tab[i][enter];
            if a > eps {
                let ratio = tab[i][rhs] / a;
                let better = match leave {
                    None => true,
                    Some(l) => ratio < best - 1e-15 || (ratio <= best + 1e-15 && basis[i] < basis[l]),
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(r) = leave else { break };
        let piv = tab[r][enter];
        for x in tab[r].iter_mut() {
            *x /= piv;
        }
        let pivot_row = tab[r].clone();
        for (i, row) in tab.iter_mut().enumerate() {
            if i != r {
                let f = row[enter];
                if f != 0.0 {
                    for (x, y) in row.iter_mut().zip(pivot_row.iter()) {
                        *x -= f * y;
                    }
                }
            }
        }
        let f = z[enter];
        for (x, y) in z.iter_mut().zip(pivot_row.iter()) {
            *x -= f * y;
        }
        basis[r] = enter;
    }
    -z[rhs] <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn square_drops_interior_point() {
        let pts = vec![
            dvector![0.0, 0.0],
            dvector![1.0, 0.0],
            dvector![0.5, 0.25],
            dvector![0.0, 1.0],
            dvector![1.0, 1.0],
        ];
        let h = convex_hull_normalize(&pts, 2).unwrap();
        assert_eq!(
            h,
            vec![dvector![0.0, 0.0], dvector![1.0, 0.0], dvector![1.0, 1.0], dvector![0.0, 1.0]]
        );
    }

    #[test]
    fn singleton_and_collinear() {
        let h = convex_hull_normalize(&[dvector![0.0, 0.0]], 2).unwrap();
        assert_eq!(h.len(), 1);
        let pts = vec![dvector![0.0, 0.0], dvector![2.0, 2.0], dvector![1.0, 1.0], dvector![0.0, 0.0]];
        let h = convex_hull_normalize(&pts, 2).unwrap();
        assert_eq!(h, vec![dvector![0.0, 0.0], dvector![2.0, 2.0]]);
    }

    #[test]
    fn empty_is_rejected() {
        assert!(convex_hull_normalize(&[], 2).is_err());
    }

    #[test]
    fn cube_in_3d() {
        let mut pts = Vec::new();
        for &x in &[-1.0, 1.0] {
            for &y in &[-1.0, 1.0] {
                for &z in &[-1.0, 1.0] {
                    pts.push(dvector![x, y, z]);
                }
            }
        }
        pts.push(dvector![0.0, 0.0, 0.0]);
        pts.push(dvector![1.0, 0.0, 0.0]);
        pts.push(dvector![0.3, -0.2, 1.0]);
        let h = convex_hull_normalize(&pts, 3).unwrap();
        assert_eq!(h.len(), 8);
    }

    #[test]
    fn lp_membership() {
        let a = dvector![0.0, 0.0, 0.0];
        let b = dvector![1.0, 0.0, 0.0];
        let c = dvector![0.0, 1.0, 0.0];
        let pts = vec![&a, &b, &c];
        assert!(in_convex_hull(&pts, &dvector![0.25, 0.25, 0.0], 1e-10));
        assert!(!in_convex_hull(&pts, &dvector![0.25, 0.25, 0.1], 1e-10));
        assert!(!in_convex_hull(&pts, &dvector![0.75, 0.75, 0.0], 1e-10));
    }
}
