mod common;

use std::sync::Arc;

use common::{domain, rng, random_map, spaces};
use hmflow_core::mesh::{ks_energy_profile, DomainKind, MapState, ScalarField};
use hmflow_core::target::{Point, TargetSpace};
use proptest::prelude::*;
use rand::Rng;

fn kinds() -> impl Strategy<Value = (DomainKind, usize)> {
    (prop::sample::select(DomainKind::ALL.to_vec()), 3usize..9)
}

fn random_field<R: Rng>(r: &mut R, d: &Arc<hmflow_core::mesh::MeshDomain>) -> ScalarField {
    ScalarField::new(d.clone(), (0..d.num_vertices()).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_is_symmetric_and_green(k in kinds(), length in 0.5f64..4.0, seed in any::<u64>()) {
        let d = domain(k.0, k.1, length);
        let mut r = rng(seed);
        let (f, g) = (random_field(&mut r, &d), random_field(&mut r, &d));
        let (lf, lg) = (f.laplacian(), g.laplacian());
        let a = g.pair(&lf);
        let b = f.pair(&lg);
        let dirichlet: f64 = d.edges().iter().map(|&(i, j, w)| w * (f[i] - f[j]) * (g[i] - g[j])).sum();
        let scale = 1.0 + dirichlet.abs();
        prop_assert!((a - b).abs() <= 1e-11 * scale);
        prop_assert!((a + dirichlet).abs() <= 1e-11 * scale);
        // Constants are harmonic.
        let one = ScalarField::new(d.clone(), vec![1.0; d.num_vertices()]).unwrap();
        prop_assert!(one.laplacian().values().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn energy_density_integrates_to_energy(k in kinds(), seed in any::<u64>()) {
        let d = domain(k.0, k.1, 2.0);
        let mut r = rng(seed);
        for (name, space) in spaces() {
            let u = random_map(&mut r, &d, &Arc::new(space), 1.5);
            let (e, density) = u.energy();
            prop_assert!((density.integral() - e).abs() <= 1e-12 * (1.0 + e), "{}", name);
            prop_assert!(density.min() >= 0.0);
        }
    }

    #[test]
    fn contractions_do_not_increase_energy(k in kinds(), seed in any::<u64>()) {
        let d = domain(k.0, k.1, 2.0);
        let mut r = rng(seed);
        for (name, space) in spaces() {
            let space = Arc::new(space);
            let u = random_map(&mut r, &d, &space, 1.5);
            let c = space.sample(&mut r, 0.5);
            let rad = r.random_range(0.1..1.0);
            let proj = u.map_points(|p| space.project_to_ball(p, &c, rad).unwrap()).unwrap();
            prop_assert!(proj.total_energy() <= u.total_energy() * (1.0 + 1e-12) + 1e-14, "{}", name);
            // Composition with the 1-Lipschitz function d(·, c) into the real line.
            let df = u.distance_field(&c).unwrap();
            prop_assert!(df.gradient_squared().integral() <= u.total_energy() * (1.0 + 1e-12) + 1e-14);
        }
    }

    #[test]
    fn heat_conserves_mass_on_closed_domains(periodic_2d in any::<bool>(), n in 3usize..12, s in 0.01f64..2.0, seed in any::<u64>()) {
        let kind = if periodic_2d { DomainKind::Torus2d } else { DomainKind::Cycle };
        let d = domain(kind, n, 1.0);
        let f = random_field(&mut rng(seed), &d);
        let g = f.heat_evolve(s, 4).unwrap();
        prop_assert!((g.integral() - f.integral()).abs() < 1e-12);
        prop_assert!(g.max() <= f.max() + 1e-12 && g.min() >= f.min() - 1e-12);
    }

    #[test]
    fn heat_maximum_principle_with_boundary(grid in any::<bool>(), n in 3usize..10, s in 0.01f64..2.0, seed in any::<u64>()) {
        let kind = if grid { DomainKind::Grid2dDirichlet } else { DomainKind::IntervalDirichlet };
        let d = domain(kind, n, 1.0);
        let f = random_field(&mut rng(seed), &d);
        let g = f.heat_evolve(s, 3).unwrap();
        prop_assert!(g.max() <= f.max() + 1e-12 && g.min() >= f.min() - 1e-12);
    }

    #[test]
    fn dilation_scales_energy_quadratically(k in kinds(), lambda in 0.1f64..3.0, seed in any::<u64>()) {
        let d = domain(k.0, k.1, 1.0);
        let r2 = Arc::new(TargetSpace::euclidean(2).unwrap());
        let u = random_map(&mut rng(seed), &d, &r2, 1.0);
        let v = u.map_points(|p| match p {
            Point::Euclidean(x) => Point::Euclidean(x.iter().map(|c| lambda * c).collect()),
            _ => unreachable!(),
        }).unwrap();
        prop_assert!((v.total_energy() - lambda * lambda * u.total_energy()).abs() <= 1e-12 * (1.0 + v.total_energy()));
    }
}

#[test]
fn ks_profile_tracks_slope() {
    let d = domain(DomainKind::IntervalDirichlet, 1001, 1.0);
    let r = Arc::new(TargetSpace::euclidean(1).unwrap());
    for (slope, expect, tol) in [(1.0, 1.0, 1e-3), (2.0, 4.0, 4e-3)] {
        let u = MapState::from_fn(d.clone(), r.clone(), |_, x| Point::real(slope * x[0])).unwrap();
        let (e, mask) = ks_energy_profile(&u, 1e-2).unwrap();
        assert!(mask.iter().filter(|&&m| m).count() > 900);
        for i in (0..1001).filter(|&i| mask[i]) {
            assert!((e[i] - expect).abs() <= tol, "{}", e[i]);
        }
    }
}

#[test]
fn ks_profile_2d_converges_for_linear_maps() {
    let r = Arc::new(TargetSpace::euclidean(1).unwrap());
    let mut errs = Vec::new();
    for n in [41, 81] {
        let d = domain(DomainKind::Grid2dDirichlet, n, 1.0);
        let u = MapState::from_fn(d.clone(), r.clone(), |_, x| Point::real(x[0] + 0.5 * x[1])).unwrap();
        let (e, mask) = ks_energy_profile(&u, 0.1).unwrap();
        let err = (0..d.num_vertices()).filter(|&i| mask[i]).map(|i| (e[i] - 1.25).abs()).fold(0.0, f64::max);
        errs.push(err);
    }
    assert!(errs[1] < 0.05, "{errs:?}");
}

#[test]
fn boundary_pinning_survives_map_points() {
    let d = domain(DomainKind::IntervalDirichlet, 6, 1.0);
    let u = common::real_map(&d, |_, x| x[0]);
    assert!(u.is_pinned());
    assert!(!u.is_free(0) && !u.is_free(5) && u.is_free(2));
    assert!(!u.clone().unpinned().is_pinned());
    assert_eq!(u.psi().len(), 2);
}
