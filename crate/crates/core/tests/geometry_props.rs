use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use linreach::geometry::{
    convex_hull_normalize, hausdorff_distance, polytope_from_directions, DirectionGrid, Polytope,
};

fn pt(x: f64, y: f64) -> DVector<f64> {
    DVector::from_vec(vec![x, y])
}

fn cloud(dim: usize, max: usize) -> impl Strategy<Value = Vec<DVector<f64>>> {
    prop::collection::vec(prop::collection::vec(-10.0..10.0f64, dim), 1..max)
        .prop_map(|v| v.into_iter().map(DVector::from_vec).collect())
}

fn angle() -> impl Strategy<Value = DVector<f64>> {
    (0.0..std::f64::consts::TAU).prop_map(|a| pt(a.cos(), a.sin()))
}

fn unit3() -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-1.0..1.0f64, 3)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-2)
        .prop_map(|v| {
            let v = DVector::from_vec(v);
            v.normalize()
        })
}

fn brute_support(points: &[DVector<f64>], l: &DVector<f64>) -> f64 {
    points.iter().map(|p| p.dot(l)).fold(f64::NEG_INFINITY, f64::max)
}

fn probes(n: usize) -> Vec<DVector<f64>> {
    (0..n)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / n as f64;
            pt(a.cos(), a.sin())
        })
        .collect()
}

// Distance from x to the polygon spanned by `pts`, brute force: zero when x is
// below the support of `pts` in 2048 probe directions, otherwise the distance
// to the nearest segment between two of the points.
fn distance_to_hull(x: &DVector<f64>, pts: &[DVector<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for a in pts {
        best = best.min((x - a).norm());
        for b in pts {
            let e = b - a;
            let len2 = e.norm_squared();
            if len2 > 0.0 {
                let t = ((x - a).dot(&e) / len2).clamp(0.0, 1.0);
                best = best.min((x - a - e * t).norm());
            }
        }
    }
    let scale = pts.iter().map(|p| p.amax()).fold(1.0, f64::max);
    let inside = probes(2048).iter().all(|l| l.dot(x) <= brute_support(pts, l) + 1e-12 * scale);
    if inside {
        0.0
    } else {
        best
    }
}

fn hausdorff_oracle(p: &Polytope, q: &Polytope) -> f64 {
    let a = p.vertices().iter().map(|x| distance_to_hull(x, q.vertices())).fold(0.0, f64::max);
    let b = q.vertices().iter().map(|x| distance_to_hull(x, p.vertices())).fold(0.0, f64::max);
    a.max(b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn minkowski_sum_adds_supports(a in cloud(2, 20), b in cloud(2, 20), l in angle()) {
        let pa = Polytope::from_points(2, &a).unwrap();
        let pb = Polytope::from_points(2, &b).unwrap();
        let s = pa.minkowski_sum(&pb).unwrap().support_function(&l).unwrap();
        let want = brute_support(&a, &l) + brute_support(&b, &l);
        prop_assert!((s - want).abs() <= 1e-10 * (1.0 + want.abs()));
    }

    #[test]
    fn minkowski_sum_adds_supports_3d(a in cloud(3, 8), b in cloud(3, 8), l in unit3()) {
        let pa = Polytope::from_points(3, &a).unwrap();
        let pb = Polytope::from_points(3, &b).unwrap();
        let s = pa.minkowski_sum(&pb).unwrap().support_function(&l).unwrap();
        let want = brute_support(&a, &l) + brute_support(&b, &l);
        prop_assert!((s - want).abs() <= 1e-10 * (1.0 + want.abs()));
    }

    #[test]
    fn linear_image_is_adjoint(
        a in cloud(2, 20),
        m in prop::collection::vec(-3.0..3.0f64, 4),
        l in angle(),
    ) {
        let m = DMatrix::from_row_slice(2, 2, &m);
        let p = Polytope::from_points(2, &a).unwrap();
        let img = p.linear_image(&m).unwrap();
        let mt = m.transpose() * &l;
        let norm = mt.norm();
        prop_assume!(norm > 1e-6);
        let got = img.support_function(&l).unwrap() / norm;
        let want = p.support_function(&(mt / norm)).unwrap();
        prop_assert!((got - want).abs() <= 1e-10 * (1.0 + want.abs()));
    }

    #[test]
    fn supporting_point_is_a_maximizing_vertex(a in cloud(2, 30), l in angle()) {
        let p = Polytope::from_points(2, &a).unwrap();
        let y = p.supporting_point(&l).unwrap();
        prop_assert_eq!(y.dot(&l), p.support_function(&l).unwrap());
        prop_assert!(p.vertices().contains(y));
        prop_assert!(y.dot(&l) >= brute_support(&a, &l) - 1e-12 * (1.0 + y.amax()));
    }

    #[test]
    fn direction_approximation_is_inner_and_close(a in cloud(2, 40), n in 3usize..80) {
        let p = Polytope::from_points(2, &a).unwrap();
        let grid = DirectionGrid::uniform_2d(n).unwrap();
        let q = polytope_from_directions(&p, &grid).unwrap();
        for l in probes(720) {
            let hp = p.support_function(&l).unwrap();
            for v in q.vertices() {
                prop_assert!(v.dot(&l) <= hp + 1e-10);
            }
        }
        let d = hausdorff_distance(&p, &q).unwrap().value();
        prop_assert!(d <= 2.0 * p.diameter() * grid.density_eps() + 1e-9);
    }

    #[test]
    fn hausdorff_is_a_metric(a in cloud(2, 12), b in cloud(2, 12), c in cloud(2, 12)) {
        let (pa, pb, pc) = (
            Polytope::from_points(2, &a).unwrap(),
            Polytope::from_points(2, &b).unwrap(),
            Polytope::from_points(2, &c).unwrap(),
        );
        let d = |x: &Polytope, y: &Polytope| hausdorff_distance(x, y).unwrap().value();
        prop_assert_eq!(d(&pa, &pb), d(&pb, &pa));
        prop_assert_eq!(d(&pa, &pa), 0.0);
        prop_assert!(d(&pa, &pc) <= d(&pa, &pb) + d(&pb, &pc) + 1e-10);
    }

    #[test]
    fn hausdorff_matches_brute_force(a in cloud(2, 10), b in cloud(2, 10)) {
        let pa = Polytope::from_points(2, &a).unwrap();
        let pb = Polytope::from_points(2, &b).unwrap();
        let d = hausdorff_distance(&pa, &pb).unwrap().value();
        let want = hausdorff_oracle(&pa, &pb);
        prop_assert!((d - want).abs() <= 1e-9 * (1.0 + want), "{} vs {}", d, want);
    }
}

fn in_triangle(p: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>) -> bool {
    let cr = |o: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>| {
        (u[0] - o[0]) * (v[1] - o[1]) - (u[1] - o[1]) * (v[0] - o[0])
    };
    let (d1, d2, d3) = (cr(a, b, p), cr(b, c, p), cr(c, a, p));
    let neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(neg && pos)
}

#[test]
fn hull_of_random_disc_points_matches_triangle_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pts: Vec<DVector<f64>> = (0..100)
        .map(|_| {
            let r = rng.random::<f64>().sqrt();
            let a = rng.random_range(0.0..std::f64::consts::TAU);
            pt(r * a.cos(), r * a.sin())
        })
        .collect();
    let hull = convex_hull_normalize(&pts, 2).unwrap();
    let n = pts.len();
    let extreme: Vec<bool> = (0..n)
        .map(|i| {
            for a in 0..n {
                for b in a + 1..n {
                    for c in b + 1..n {
                        if a != i && b != i && c != i && in_triangle(&pts[i], &pts[a], &pts[b], &pts[c]) {
                            return false;
                        }
                    }
                }
            }
            true
        })
        .collect();
    for (i, p) in pts.iter().enumerate() {
        assert_eq!(extreme[i], hull.contains(p), "point {i}");
    }
    // Every hull vertex is the strict maximizer of some direction.
    for v in &hull {
        let hit = probes(4096).iter().any(|l| {
            let best = brute_support(&pts, l);
            v.dot(l) == best && pts.iter().filter(|q| q.dot(l) == best).count() == 1
        });
        assert!(hit);
    }
}

#[test]
fn hexagon_with_256_directions() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let hex: Vec<DVector<f64>> = (0..6)
        .map(|k| {
            let a = std::f64::consts::TAU * (k as f64 + rng.random_range(-0.3..0.3)) / 6.0;
            let r = rng.random_range(0.5..2.0);
            pt(r * a.cos(), r * a.sin())
        })
        .collect();
    let p = Polytope::from_points(2, &hex).unwrap();
    let grid = DirectionGrid::uniform_2d(256).unwrap();
    let q = polytope_from_directions(&p, &grid).unwrap();
    let d = hausdorff_oracle(&p, &q);
    assert!(d <= 2.0 * p.diameter() * grid.density_eps());
    // Every hexagon vertex has a normal cone wider than the grid spacing.
    assert_eq!(q.len(), p.len());
    assert_eq!(d, 0.0);
}

#[test]
fn density_eps_matches_angular_scan() {
    for n in [4, 7, 64, 360] {
        let grid = DirectionGrid::uniform_2d(n).unwrap();
        let dirs = grid.directions();
        // a multiple of 2n, so the midpoints between grid directions are hit
        let samples = 200 * n;
        let worst = (0..samples)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / samples as f64;
                let x = pt(a.cos(), a.sin());
                dirs.iter().map(|d| (d - &x).norm()).fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        assert!(worst <= grid.density_eps() + 1e-12);
        assert!(grid.density_eps() - worst < 1e-9, "n = {n}");
    }
}
