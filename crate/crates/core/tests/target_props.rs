mod common;

use common::{rng, spaces, tripod_point};
use hmflow_core::target::{inductive_mean, weighted_barycenter, Point, TargetSpace};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn metric_axioms(seed in any::<u64>()) {
        let mut r = rng(seed);
        for (name, space) in spaces() {
            for _ in 0..40 {
                let (p, q, s) = (space.sample(&mut r, 2.0), space.sample(&mut r, 2.0), space.sample(&mut r, 2.0));
                let pq = space.distance(&p, &q).unwrap();
                prop_assert_eq!(pq, space.distance(&q, &p).unwrap(), "{}", name);
                prop_assert!(pq >= 0.0);
                prop_assert_eq!(space.distance(&p, &p).unwrap(), 0.0);
                let ps = space.distance(&p, &s).unwrap();
                let qs = space.distance(&q, &s).unwrap();
                prop_assert!(ps <= pq + qs + 1e-12, "{}: {} > {} + {}", name, ps, pq, qs);
            }
        }
    }

    #[test]
    fn geodesics_have_constant_speed(seed in any::<u64>()) {
        let mut r = rng(seed);
        for (name, space) in spaces() {
            for _ in 0..20 {
                let (p, q) = (space.sample(&mut r, 2.0), space.sample(&mut r, 2.0));
                let (a, b): (f64, f64) = (r.random(), r.random());
                let ga = space.geodesic_point(&p, &q, a).unwrap();
                let gb = space.geodesic_point(&p, &q, b).unwrap();
                let d = space.distance(&p, &q).unwrap();
                let err = (space.distance(&ga, &gb).unwrap() - (a - b).abs() * d).abs();
                prop_assert!(err <= 1e-9, "{}: {}", name, err);
                prop_assert!((space.distance(&p, &ga).unwrap() - a * d).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn comparison_residuals_nonnegative(seed in any::<u64>()) {
        let mut r = rng(seed);
        for (name, space) in spaces() {
            for _ in 0..40 {
                let pts: Vec<Point> = (0..4).map(|_| space.sample(&mut r, 2.0)).collect();
                let (l, m, t) = (r.random(), r.random(), r.random());
                let res = space.comparison_residuals(&pts[0], &pts[1], &pts[2], &pts[3], l, m, t).unwrap();
                for (k, v) in res.as_array().iter().enumerate() {
                    prop_assert!(*v >= -1e-9, "{} {}: {}", name, k, v);
                }
            }
        }
    }

    #[test]
    fn barycenter_variance_bound(seed in any::<u64>()) {
        let mut r = rng(seed);
        for (name, space) in spaces() {
            let k = r.random_range(1..7);
            let pts: Vec<Point> = (0..k).map(|_| space.sample(&mut r, 2.0)).collect();
            let w: Vec<f64> = (0..k).map(|_| r.random_range(0.1..2.0)).collect();
            let refs: Vec<&Point> = pts.iter().collect();
            let b = weighted_barycenter(&space, &refs, &w, 1e-13).unwrap();
            let f = |q: &Point| pts.iter().zip(&w).map(|(x, wi)| wi * space.distance_squared(q, x).unwrap()).sum::<f64>();
            let fb = f(&b);
            let total: f64 = w.iter().sum();
            for _ in 0..10 {
                let q = space.sample(&mut r, 2.5);
                let gap = f(&q) - fb - total * space.distance_squared(&q, &b).unwrap();
                prop_assert!(gap >= -1e-6 * fb.max(1e-12), "{}: {}", name, gap);
            }
        }
    }

    #[test]
    fn projection_is_one_lipschitz(seed in any::<u64>()) {
        let mut r = rng(seed);
        for (name, space) in spaces() {
            let c = space.sample(&mut r, 1.0);
            let rad = r.random_range(0.0..1.5);
            for _ in 0..20 {
                let (p, q) = (space.sample(&mut r, 2.0), space.sample(&mut r, 2.0));
                let (pp, pq) = (space.project_to_ball(&p, &c, rad).unwrap(), space.project_to_ball(&q, &c, rad).unwrap());
                prop_assert!(space.distance(&pp, &pq).unwrap() <= space.distance(&p, &q).unwrap() + 1e-10, "{}", name);
                prop_assert!(space.distance(&pp, &c).unwrap() <= rad + 1e-10);
            }
        }
    }

    #[test]
    fn canonical_encoding_is_unique(seed in any::<u64>()) {
        let mut r = rng(seed);
        for (name, space) in spaces() {
            for _ in 0..20 {
                let (p, q) = (space.sample(&mut r, 2.0), space.sample(&mut r, 2.0));
                let c = space.canonicalize(&p).unwrap();
                prop_assert_eq!(space.canonicalize(&c).unwrap(), c.clone(), "{}", name);
                // Endpoints of geodesics are reproduced exactly up to encoding.
                let g0 = space.geodesic_point(&p, &q, 0.0).unwrap();
                prop_assert!(space.distance(&g0, &p).unwrap() <= 1e-12);
                if space.distance(&p, &q).unwrap() == 0.0 {
                    prop_assert_eq!(space.canonicalize(&q).unwrap(), c);
                }
            }
        }
    }
}

#[test]
fn spec_examples() {
    let r2 = TargetSpace::euclidean(2).unwrap();
    let e = |x: f64, y: f64| Point::Euclidean(vec![x, y]);
    assert_eq!(r2.distance(&e(1.0, 2.0), &e(1.0, 2.0)).unwrap(), 0.0);
    assert_eq!(r2.geodesic_point(&e(0.0, 0.0), &e(2.0, 4.0), 0.25).unwrap(), e(0.5, 1.0));
    let pr = r2.project_to_ball(&e(3.0, 4.0), &e(0.0, 0.0), 1.0).unwrap();
    assert!(r2.distance(&pr, &e(0.6, 0.8)).unwrap() < 1e-15);

    let tri = TargetSpace::tripod(2.0).unwrap();
    let (a, b) = (tripod_point(&tri, 1, 0.3), tripod_point(&tri, 2, 0.4));
    assert!((tri.distance(&a, &b).unwrap() - 0.7).abs() < 1e-15);
    assert_eq!(tri.geodesic_point(&a, &b, 3.0 / 7.0).unwrap(), common::center(&tri));
    let proj = tri
        .project_to_ball(&tripod_point(&tri, 2, 0.8), &tripod_point(&tri, 1, 1.0), 0.5)
        .unwrap();
    assert!(tri.distance(&proj, &tripod_point(&tri, 1, 0.5)).unwrap() < 1e-14);

    let (p, q, s) = (tripod_point(&tri, 1, 1.0), tripod_point(&tri, 2, 1.0), tripod_point(&tri, 3, 1.0));
    let res = tri.comparison_residuals(&p, &q, &s, &s, 0.5, 0.5, 0.5).unwrap();
    // apex P, geodesic Q -> S evaluated at 1/2 is the branch point
    assert!((res.cn - 2.0).abs() < 1e-14);

    let h = TargetSpace::HyperbolicPlane;
    let q = Point::Hyperboloid([1f64.cosh(), 1f64.sinh(), 0.0]);
    assert!((h.distance(&Point::Hyperboloid([1.0, 0.0, 0.0]), &q).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn unit_square_parallelogram() {
    let r2 = TargetSpace::euclidean(2).unwrap();
    let e = |x: f64, y: f64| Point::Euclidean(vec![x, y]);
    let res = r2
        .comparison_residuals(&e(0.0, 0.0), &e(1.0, 0.0), &e(1.0, 1.0), &e(0.0, 1.0), 0.3, 0.6, 0.5)
        .unwrap();
    assert!(res.quadrilateral.abs() < 1e-14);
    let all_equal = r2.comparison_residuals(&e(1.0, 1.0), &e(1.0, 1.0), &e(1.0, 1.0), &e(1.0, 1.0), 0.3, 0.6, 0.5);
    assert!(all_equal.unwrap().as_array().iter().all(|v| v.abs() < 1e-15));
}

#[test]
fn hyperbolic_two_point_barycenter_is_midpoint() {
    let h = TargetSpace::HyperbolicPlane;
    let mut r = rng(5);
    for _ in 0..50 {
        let (p, q) = (h.sample(&mut r, 3.0), h.sample(&mut r, 3.0));
        let b = weighted_barycenter(&h, &[&p, &q], &[1.0, 1.0], 1e-13).unwrap();
        let m = h.geodesic_point(&p, &q, 0.5).unwrap();
        assert!(h.distance(&b, &m).unwrap() < 1e-10);
    }
}

#[test]
fn inductive_mean_approaches_exact_barycenter() {
    let mut r = rng(9);
    for (name, space) in spaces() {
        let pts: Vec<Point> = (0..5).map(|_| space.sample(&mut r, 1.5)).collect();
        let refs: Vec<&Point> = pts.iter().collect();
        let w = [1.0, 2.0, 0.5, 1.0, 1.5];
        let exact = weighted_barycenter(&space, &refs, &w, 1e-13).unwrap();
        let approx = inductive_mean(&space, &refs, &w, 1e-6, 5000, 1).unwrap();
        assert!(space.distance(&exact, &approx).unwrap() < 5e-2, "{name}");
    }
}
