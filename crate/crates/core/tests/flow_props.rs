mod common;

use std::sync::Arc;

use common::{center, dense_heat, dense_resolvent, domain, max_error, random_map, real, rng, spaces, tripod_point};
use hmflow_core::flow::{
    confinement_check, crandall_liggett, evi_residual, evi_residual_from_start, flow_run, harmonic_map, resolvent,
    resolvent_objective, semigroup_residual, StepSchedule, SweepOptions,
};
use hmflow_core::mesh::{DomainKind, MapState};
use hmflow_core::target::{Point, TargetSpace};
use hmflow_core::Error;
use proptest::prelude::*;
use rand::Rng;

fn opts() -> SweepOptions {
    SweepOptions { tol: 1e-12, ..SweepOptions::default() }
}

fn real_line() -> Arc<TargetSpace> {
    Arc::new(TargetSpace::euclidean(1).unwrap())
}

#[test]
fn resolvent_matches_dense_solve() {
    let mut r = rng(1);
    let cases = [
        (DomainKind::IntervalDirichlet, 33, 1),
        (DomainKind::Cycle, 20, 2),
        (DomainKind::Grid2dDirichlet, 7, 1),
        (DomainKind::Torus2d, 5, 3),
    ];
    for (kind, n, dim) in cases {
        let d = domain(kind, n, 1.0);
        let u0 = random_map(&mut r, &d, &Arc::new(TargetSpace::euclidean(dim).unwrap()), 1.0);
        for h in [1e-3, 0.05, 1.0] {
            let out = resolvent(&u0, h, &opts()).unwrap().state;
            let err = max_error(&out, &dense_resolvent(&u0, h));
            assert!(err <= 1e-8, "{kind} h={h}: {err}");
        }
    }
}

#[test]
fn crandall_liggett_first_order_in_m() {
    // Unit spacing keeps hλ small for the modes that carry the error.
    let d = domain(DomainKind::IntervalDirichlet, 33, 32.0);
    let u0 = random_map(&mut rng(2), &d, &real_line(), 1.0);
    let exact = dense_heat(&u0, 1.0);
    let errs: Vec<f64> = [8, 16, 32, 64]
        .iter()
        .map(|&m| max_error(&crandall_liggett(&u0, 1.0, m, &opts()).unwrap(), &exact))
        .collect();
    for w in errs.windows(2) {
        assert!(w[1] < w[0]);
        let ratio = w[0] / w[1];
        assert!((1.6..=2.4).contains(&ratio), "{errs:?}");
    }
}

#[test]
fn three_point_closed_forms() {
    let d = domain(DomainKind::IntervalDirichlet, 3, 2.0);
    let u0 = MapState::new(d, real_line(), vec![Point::real(0.0), Point::real(1.0), Point::real(0.0)]).unwrap();
    let c = |m| real(crandall_liggett(&u0, 1.0, m, &opts()).unwrap().value(1));
    assert!((c(1) - 1.0 / 3.0).abs() < 1e-12);
    assert!((c(2) - 0.25).abs() < 1e-12);
    let exact = dense_heat(&u0, 1.0)[1][0];
    assert!((exact - (-2f64).exp()).abs() < 1e-14);
}

#[test]
fn long_run_limit_is_the_harmonic_map() {
    let d = domain(DomainKind::IntervalDirichlet, 9, 1.0);
    let tri = Arc::new(TargetSpace::tripod(2.0).unwrap());
    let u0 = MapState::from_fn(d.clone(), tri.clone(), |i, _| match i {
        0 => tripod_point(&tri, 1, 1.0),
        8 => tripod_point(&tri, 2, 1.5),
        _ => tripod_point(&tri, 3, 0.2 * (i % 3) as f64),
    })
    .unwrap();
    let limit = crandall_liggett(&u0, 20.0, 40, &opts()).unwrap();
    let direct = harmonic_map(&u0, &opts()).unwrap();
    assert!(limit.l2_distance(&direct).unwrap() < 1e-6);
    // The harmonic map is the geodesic between the boundary values.
    for i in 0..9 {
        let g = tri.geodesic_point(u0.value(0), u0.value(8), i as f64 / 8.0).unwrap();
        assert!(tri.distance(&g, direct.value(i)).unwrap() < 1e-9);
    }
}

#[test]
fn semigroup_defect_shrinks_with_m() {
    let d = domain(DomainKind::Cycle, 8, 1.0);
    let tri = Arc::new(TargetSpace::tripod(2.0).unwrap());
    let u0 = MapState::from_fn(d, tri.clone(), |_, x| common::tripod_loop(&tri, 1.5, 0.0, [x[0] * std::f64::consts::TAU, 0.0]))
        .unwrap();
    let coarse = semigroup_residual(&u0, 0.05, 0.03, 8, &opts()).unwrap();
    let fine = semigroup_residual(&u0, 0.05, 0.03, 64, &opts()).unwrap();
    assert!(fine < coarse, "{fine} !< {coarse}");
    assert_eq!(semigroup_residual(&u0, 0.05, 0.0, 8, &opts()).unwrap(), 0.0);
}

#[test]
fn confinement_in_tripod_and_plane() {
    let d = domain(DomainKind::Cycle, 16, 1.0);
    let tri = Arc::new(TargetSpace::tripod(2.0).unwrap());
    let u0 = MapState::from_fn(d.clone(), tri.clone(), |_, x| {
        common::tripod_loop(&tri, 1.5, 0.3, [x[0] * std::f64::consts::TAU, 0.0])
    })
    .unwrap();
    let trace = flow_run(&u0, &[0.01, 0.02, 0.05, 0.1], StepSchedule::MaxStep(0.005), &opts()).unwrap();
    assert!(confinement_check(&trace, &center(&tri), 1.5).unwrap() <= 1e-9);

    let r2 = Arc::new(TargetSpace::euclidean(2).unwrap());
    let circle = MapState::from_fn(d, r2, |i, _| {
        let a = i as f64 * 0.9;
        Point::Euclidean(vec![a.cos(), a.sin()])
    })
    .unwrap();
    let trace = flow_run(&circle, &[0.01, 0.1], StepSchedule::PerInterval(4), &opts()).unwrap();
    let origin = Point::Euclidean(vec![0.0, 0.0]);
    assert!(confinement_check(&trace, &origin, 1.0 + 1e-12).unwrap() <= 1e-9);
    assert!(matches!(confinement_check(&trace, &origin, 0.5), Err(Error::Precondition(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn flows_decrease_energy_and_satisfy_evi(space_ix in 0usize..6, kind in prop::sample::select(DomainKind::ALL.to_vec()), seed in any::<u64>()) {
        let (name, space) = spaces().swap_remove(space_ix);
        let space = Arc::new(space);
        let d = domain(kind, 4, 1.0);
        let mut r = rng(seed);
        let u0 = random_map(&mut r, &d, &space, 1.0);
        let trace = flow_run(&u0, &[0.01, 0.02, 0.03, 0.04], StepSchedule::PerInterval(1), &opts()).unwrap();
        prop_assert!(trace.max_energy_increase() <= 1e-10, "{}", name);
        prop_assert!(trace.energy_admissible.iter().all(|&a| a));
        for _ in 0..10 {
            let v = random_map(&mut r, &d, &space, 1.0);
            let v = MapState::from_fn(d.clone(), space.clone(), |i, _| {
                if u0.is_free(i) { v.value(i).clone() } else { u0.value(i).clone() }
            }).unwrap();
            let ev = v.total_energy();
            for k in 1..trace.len() {
                let res = evi_residual(&trace, &v, k, 1).unwrap();
                prop_assert!(res >= -1e-8 * (1.0 + ev), "{}: {}", name, res);
            }
            prop_assert!(evi_residual_from_start(&trace, &v, 0).unwrap() >= -1e-8 * (1.0 + ev));
        }
    }

    #[test]
    fn resolvent_is_minimal(space_ix in 0usize..6, seed in any::<u64>()) {
        let (name, space) = spaces().swap_remove(space_ix);
        let space = Arc::new(space);
        let d = domain(DomainKind::IntervalDirichlet, 6, 1.0);
        let mut r = rng(seed);
        let u0 = random_map(&mut r, &d, &space, 1.0);
        let h = r.random_range(0.01..0.5);
        let out = resolvent(&u0, h, &opts()).unwrap().state;
        let best = resolvent_objective(&out, &u0, h).unwrap();
        for size in [1e-11, 1e-3] {
            for _ in 0..64 {
                let target = space.sample(&mut r, 2.0);
                let pert = MapState::from_fn(d.clone(), space.clone(), |i, _| {
                    if !out.is_free(i) { return out.value(i).clone(); }
                    let dist = space.distance(out.value(i), &target).unwrap();
                    if dist == 0.0 { return target.clone(); }
                    space.geodesic_point(out.value(i), &target, (size / dist).min(1.0)).unwrap()
                }).unwrap();
                let obj = resolvent_objective(&pert, &u0, h).unwrap();
                prop_assert!(obj >= best - 1e-13 * (1.0 + best), "{} size {}: {} < {}", name, size, obj, best);
            }
        }
    }

    #[test]
    fn flows_contract(space_ix in 0usize..6, seed in any::<u64>()) {
        let (name, space) = spaces().swap_remove(space_ix);
        let space = Arc::new(space);
        let d = domain(DomainKind::IntervalDirichlet, 7, 1.0);
        let mut r = rng(seed);
        let u0 = random_map(&mut r, &d, &space, 1.0);
        let w = random_map(&mut r, &d, &space, 1.0);
        let v0 = MapState::from_fn(d.clone(), space.clone(), |i, _| {
            if u0.is_free(i) { w.value(i).clone() } else { u0.value(i).clone() }
        }).unwrap();
        let times = [0.01, 0.02, 0.04, 0.08];
        let tu = flow_run(&u0, &times, StepSchedule::PerInterval(2), &opts()).unwrap();
        let tv = flow_run(&v0, &times, StepSchedule::PerInterval(2), &opts()).unwrap();
        let mut prev = u0.l2_distance(&v0).unwrap();
        for (a, b) in tu.states.iter().zip(&tv.states) {
            let dist = a.l2_distance(b).unwrap();
            prop_assert!(dist <= prev + 1e-9, "{}: {} > {}", name, dist, prev);
            prev = dist;
        }
    }
}
