//! Verification suites: property batteries with a seed and a JSON summary.

use std::sync::Arc;

use hmflow_core::flow::{crandall_liggett, flow_run, semigroup_residual, StepSchedule, SweepOptions};
use hmflow_core::mesh::{DomainKind, MapState, MeshDomain, ScalarField};
use hmflow_core::regularity::{phi_interpolation_residuals, CheckReport};
use hmflow_core::target::{ComparisonResiduals, MetricTree, Point, TargetSpace};
use rand::Rng;
use serde::Serialize;

use crate::config::{parse_config_str, ScenarioConfig};
use crate::maps::{rng_for, stream};
use crate::oracle::{dense_heat, dense_resolvent, max_error};
use crate::run::execute;

pub const SUITES: [&str; 4] = ["cat0", "flow", "regularity", "all"];

pub const SMOKE: &str = include_str!("../../../scenarios/smoke.toml");
pub const TRIPOD_CYCLE: &str = include_str!("../../../scenarios/tripod_cycle.toml");

#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub suite: String,
    pub seed: u64,
    pub pass: bool,
    pub failed: Vec<String>,
    pub reports: Vec<CheckReport>,
}

/// The six spaces of the comparison battery; the random tree depends on `seed`.
pub fn spaces(seed: u64) -> Vec<(&'static str, TargetSpace)> {
    let mut rng = rng_for(seed, stream::SAMPLES);
    let tree = MetricTree::random(&mut rng, 20, 0.2..1.5).expect("random tree");
    let tripod = || TargetSpace::tripod(2.0).expect("tripod");
    vec![
        ("r2", TargetSpace::euclidean(2).expect("r2")),
        ("r3", TargetSpace::euclidean(3).expect("r3")),
        ("tripod", tripod()),
        ("tree20", TargetSpace::MetricTree(tree)),
        ("hyperbolic", TargetSpace::HyperbolicPlane),
        ("tripod_x_r", TargetSpace::product(vec![tripod(), TargetSpace::euclidean(1).expect("r")]).expect("product")),
    ]
}

const CAT0_ANCHORS: [&str; 5] = [
    "CN inequality for a geodesic and an apex",
    "quadrilateral comparison inequality",
    "midpoint comparison inequality",
    "interpolation along one side seen from a fourth point",
    "two-parameter interpolation comparison",
];

/// `count` random quadruples with random `λ, μ, t` per space; one report per family and space.
pub fn cat0_reports(seed: u64, count: usize) -> Vec<CheckReport> {
    let mut out = Vec::new();
    for (k, (name, space)) in spaces(seed).into_iter().enumerate() {
        let mut rng = rng_for(seed.wrapping_add(k as u64), stream::SAMPLES);
        let mut families = vec![Vec::with_capacity(count); 5];
        for _ in 0..count {
            let [p, q, r, s] = std::array::from_fn(|_| space.sample(&mut rng, 2.0));
            let (l, m, t) = (rng.random(), rng.random(), rng.random());
            let res = space.comparison_residuals(&p, &q, &r, &s, l, m, t).expect("valid quadruple");
            for (f, v) in families.iter_mut().zip(res.as_array()) {
                f.push(v);
            }
        }
        for ((family, res), anchor) in ComparisonResiduals::NAMES.iter().zip(families).zip(CAT0_ANCHORS) {
            out.push(CheckReport::at_least(&format!("cat0_{family}"), anchor, 1e-9, res).with_context(name, seed));
        }
    }
    out
}

/// Smallest per-edge margin of the φ-interpolation inequality for one random
/// triple `(u, v, φ)`, with `φ` vanishing on the boundary.
pub fn phi_margin<R: Rng>(domain: &Arc<MeshDomain>, space: &Arc<TargetSpace>, rng: &mut R, scale: f64) -> hmflow_core::Result<f64> {
    let mut draw = || {
        let values = (0..domain.num_vertices()).map(|_| space.sample(rng, scale)).collect();
        MapState::new(domain.clone(), space.clone(), values)
    };
    let (u, v) = (draw()?, draw()?);
    let phi: Vec<f64> = (0..domain.num_vertices()).map(|i| if domain.is_boundary(i) { 0.0 } else { rng.random() }).collect();
    let r = phi_interpolation_residuals(&u, &v, &ScalarField::new(domain.clone(), phi)?)?;
    Ok(r.per_edge.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Random `(u, v, φ)` triples on a Dirichlet interval, per space; the residual
/// of a triple is its smallest per-edge margin.
pub fn phi_reports(seed: u64, samples: usize) -> Vec<CheckReport> {
    let domain = Arc::new(MeshDomain::build(DomainKind::IntervalDirichlet, 8, 1.0).expect("domain"));
    let mut out = Vec::new();
    for (k, (name, space)) in spaces(seed).into_iter().enumerate() {
        let space = Arc::new(space);
        let mut rng = rng_for(seed.wrapping_add(k as u64), stream::PERTURBATIONS);
        let res = (0..samples)
            .map(|_| phi_margin(&domain, &space, &mut rng, 2.0))
            .collect::<hmflow_core::Result<Vec<_>>>()
            .expect("compatible maps");
        out.push(
            CheckReport::at_least(
                "phi_interpolation",
                "energy comparison for geodesic interpolation with weight phi",
                1e-9,
                res,
            )
            .with_context(name, seed),
        );
    }
    out
}

fn real_map(domain: &Arc<MeshDomain>, f: impl Fn(usize) -> f64) -> MapState {
    MapState::from_fn(domain.clone(), Arc::new(TargetSpace::euclidean(1).expect("r")), |i, _| Point::real(f(i)))
        .expect("finite values")
}

fn center(u: &MapState) -> f64 {
    match u.value(u.values().len() / 2) {
        Point::Euclidean(v) => v[0],
        _ => unreachable!("euclidean map"),
    }
}

/// Crandall-Liggett errors at `t = 1` against the exact heat flow for each `m`.
pub fn crandall_liggett_errors(u0: &MapState, ms: &[usize]) -> hmflow_core::Result<Vec<f64>> {
    let exact = dense_heat(u0, 1.0)?;
    let opts = SweepOptions { tol: 1e-13, ..SweepOptions::default() };
    ms.iter().map(|&m| Ok(max_error(&crandall_liggett(u0, 1.0, m, &opts)?, &exact))).collect()
}

/// Dense-oracle comparisons, first-order convergence and closed forms.
pub fn flow_reports(seed: u64) -> hmflow_core::Result<Vec<CheckReport>> {
    let opts = SweepOptions { tol: 1e-13, ..SweepOptions::default() };
    let ctx = |r: CheckReport| r.with_context("flow", seed);
    let mut out = Vec::new();

    let domain = Arc::new(MeshDomain::build(DomainKind::IntervalDirichlet, 33, 32.0)?);
    let mut rng = rng_for(seed, stream::INITIAL);
    let values: Vec<f64> = (0..33).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let u0 = real_map(&domain, |i| values[i]);
    let mut errs = Vec::new();
    for h in [0.1, 1.0, 10.0] {
        errs.push(max_error(&hmflow_core::flow::resolvent(&u0, h, &opts)?.state, &dense_resolvent(&u0, h)?));
    }
    out.push(ctx(CheckReport::at_most(
        "euclidean_oracle",
        "resolvent of a Euclidean map equals the dense linear solve",
        1e-8,
        errs,
    )));

    let cl = crandall_liggett_errors(&u0, &[8, 16, 32, 64])?;
    out.push(ctx(CheckReport::at_most(
        "crandall_liggett_decreasing",
        "exponential formula converges as the number of steps grows",
        0.0,
        cl.windows(2).map(|w| w[1] - w[0]).collect(),
    )));
    out.push(ctx(CheckReport::at_most(
        "crandall_liggett_order",
        "first-order convergence of the exponential formula",
        0.4,
        cl.windows(2).map(|w| (w[0] / w[1] - 2.0).abs()).collect(),
    )));

    let bump = real_map(&Arc::new(MeshDomain::build(DomainKind::IntervalDirichlet, 3, 2.0)?), |i| (i == 1) as u8 as f64);
    let closed = vec![
        (center(&crandall_liggett(&bump, 1.0, 1, &opts)?) - 1.0 / 3.0).abs(),
        (center(&crandall_liggett(&bump, 1.0, 2, &opts)?) - 0.25).abs(),
        (dense_heat(&bump, 1.0)?[1][0] - (-2f64).exp()).abs(),
    ];
    out.push(ctx(CheckReport::at_most("closed_forms", "resolvent and heat flow closed forms", 1e-12, closed)));
    out.push(ctx(CheckReport::at_most(
        "crandall_liggett_limit",
        "exponential formula approaches the heat semigroup",
        2e-3,
        vec![(center(&crandall_liggett(&bump, 1.0, 64, &opts)?) - (-2f64).exp()).abs()],
    )));

    let tri = Arc::new(TargetSpace::tripod(1.0)?);
    let small = Arc::new(MeshDomain::build(DomainKind::IntervalDirichlet, 6, 1.0)?);
    let mut rng = rng_for(seed, stream::COMPARATORS);
    let values = (0..6).map(|_| tri.sample(&mut rng, 1.0)).collect();
    let w0 = MapState::new(small, tri, values)?;
    let (coarse, fine) = (semigroup_residual(&w0, 0.1, 0.05, 8, &opts)?, semigroup_residual(&w0, 0.1, 0.05, 64, &opts)?);
    out.push(ctx(CheckReport::at_most(
        "semigroup_defect",
        "semigroup property of the limit flow",
        0.0,
        vec![fine - coarse],
    )));
    let traced = flow_run(&w0, &[0.05, 0.1], StepSchedule::PerInterval(4), &opts)?;
    out.push(ctx(CheckReport::at_most(
        "energy_monotone",
        "energy is non-increasing along the flow",
        1e-10,
        vec![traced.max_energy_increase()],
    )));

    let cfg = with_seed(SMOKE, seed);
    out.extend(execute(&cfg).map_err(|e| match e.0 {
        crate::run::RunError::Core { source, .. } => source,
        other => hmflow_core::Error::InvalidParameter(other.to_string()),
    })?.reports);
    Ok(out)
}

fn with_seed(text: &str, seed: u64) -> ScenarioConfig {
    let mut cfg = parse_config_str(text).expect("shipped scenario parses");
    cfg.seed = seed;
    cfg
}

/// φ-interpolation per space plus the shipped tripod-cycle scenario.
pub fn regularity_reports(seed: u64, samples: usize) -> hmflow_core::Result<Vec<CheckReport>> {
    let mut out = phi_reports(seed, samples);
    let cfg = with_seed(TRIPOD_CYCLE, seed);
    out.extend(execute(&cfg).map_err(|e| match e.0 {
        crate::run::RunError::Core { source, .. } => source,
        other => hmflow_core::Error::InvalidParameter(other.to_string()),
    })?.reports);
    Ok(out)
}

/// Runs a suite. Errors of the underlying computations become failing reports.
pub fn verify_suite(name: &str, seed: u64) -> Option<SuiteSummary> {
    let fallible = |check: &str, r: hmflow_core::Result<Vec<CheckReport>>| match r {
        Ok(v) => v,
        Err(e) => {
            let mut rep = CheckReport::at_most(check, &e.to_string(), 0.0, vec![f64::NAN]);
            rep.pass = false;
            vec![rep.with_context(check, seed)]
        }
    };
    let reports = match name {
        "cat0" => cat0_reports(seed, 10_000),
        "flow" => fallible("flow", flow_reports(seed)),
        "regularity" => fallible("regularity", regularity_reports(seed, 1000)),
        "all" => {
            let mut all = cat0_reports(seed, 10_000);
            all.extend(fallible("flow", flow_reports(seed)));
            all.extend(fallible("regularity", regularity_reports(seed, 1000)));
            all
        }
        _ => return None,
    };
    let failed: Vec<String> =
        reports.iter().filter(|r| !r.pass).map(|r| format!("{}/{}", r.scenario, r.check)).collect();
    Some(SuiteSummary { suite: name.into(), seed, pass: failed.is_empty(), failed, reports })
}
