#![allow(dead_code)]

use std::sync::Arc;

use hmflow_core::mesh::{DomainKind, MapState, MeshDomain};
use hmflow_core::target::{MetricTree, Point, TargetSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The six spaces exercised by the comparison suite.
pub fn spaces() -> Vec<(&'static str, TargetSpace)> {
    let mut r = rng(20);
    vec![
        ("r2", TargetSpace::euclidean(2).unwrap()),
        ("r3", TargetSpace::euclidean(3).unwrap()),
        ("tripod", TargetSpace::tripod(2.0).unwrap()),
        ("tree20", TargetSpace::MetricTree(MetricTree::random(&mut r, 20, 0.2..1.5).unwrap())),
        ("hyperbolic", TargetSpace::HyperbolicPlane),
        (
            "tree_x_r",
            TargetSpace::product(vec![TargetSpace::tripod(2.0).unwrap(), TargetSpace::euclidean(1).unwrap()])
                .unwrap(),
        ),
    ]
}

pub fn tripod_point(space: &TargetSpace, leg: usize, r: f64) -> Point {
    let TargetSpace::MetricTree(t) = space else { panic!("not a tree") };
    Point::Tree(t.point_between(0, leg, r).unwrap())
}

pub fn center(space: &TargetSpace) -> Point {
    let TargetSpace::MetricTree(t) = space else { panic!("not a tree") };
    Point::Tree(t.vertex_point(0).unwrap())
}

pub fn domain(kind: DomainKind, n: usize, length: f64) -> Arc<MeshDomain> {
    Arc::new(MeshDomain::build(kind, n, length).unwrap())
}

pub fn random_map<R: Rng>(rng: &mut R, d: &Arc<MeshDomain>, space: &Arc<TargetSpace>, scale: f64) -> MapState {
    let values = (0..d.num_vertices()).map(|_| space.sample(rng, scale)).collect();
    MapState::new(d.clone(), space.clone(), values).unwrap()
}

pub fn real(x: &Point) -> f64 {
    match x {
        Point::Euclidean(v) => v[0],
        _ => panic!("not a real point"),
    }
}

pub fn real_map(d: &Arc<MeshDomain>, f: impl Fn(usize, [f64; 2]) -> f64) -> MapState {
    MapState::from_fn(d.clone(), Arc::new(TargetSpace::euclidean(1).unwrap()), |i, x| Point::real(f(i, x))).unwrap()
}

/// Closed loop through the three legs of a tripod: `2π`-periodic in `x[0]`.
pub fn tripod_loop(space: &TargetSpace, amp: f64, phase: f64, x: [f64; 2]) -> Point {
    let theta = (x[0] + phase).rem_euclid(std::f64::consts::TAU);
    let z = 3.0 * theta / std::f64::consts::TAU;
    let k = (z.floor() as usize).min(2);
    let tau = z - k as f64;
    tripod_point(space, k + 1, amp * (std::f64::consts::PI * tau).sin())
}

pub fn coords(x: &Point) -> &[f64] {
    match x {
        Point::Euclidean(v) => v,
        _ => panic!("not a euclidean point"),
    }
}

struct Dense {
    free: Vec<usize>,
    /// Weighted graph Laplacian `D − W`.
    lap: nalgebra::DMatrix<f64>,
    mass: Vec<f64>,
}

fn dense(u: &MapState) -> Dense {
    let d = u.domain();
    let n = d.num_vertices();
    let mut lap = nalgebra::DMatrix::zeros(n, n);
    for &(a, b, w) in d.edges() {
        lap[(a, a)] += w;
        lap[(b, b)] += w;
        lap[(a, b)] -= w;
        lap[(b, a)] -= w;
    }
    Dense { free: (0..n).filter(|&i| u.is_free(i)).collect(), lap, mass: d.measures().to_vec() }
}

fn column(u: &MapState, c: usize) -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_iterator(u.values().len(), u.values().iter().map(|p| coords(p)[c]))
}

/// Resolvent of a Euclidean map by a dense linear solve, as rows of coordinates.
pub fn dense_resolvent(u0: &MapState, h: f64) -> Vec<Vec<f64>> {
    let Dense { free, lap, mass } = dense(u0);
    let dim = coords(u0.value(0)).len();
    let k = free.len();
    let mut out: Vec<Vec<f64>> = u0.values().iter().map(|p| coords(p).to_vec()).collect();
    let a = nalgebra::DMatrix::from_fn(k, k, |r, c| {
        lap[(free[r], free[c])] + if r == c { mass[free[r]] / h } else { 0.0 }
    });
    let lu = a.lu();
    for c in 0..dim {
        let x0 = column(u0, c);
        let b = nalgebra::DVector::from_fn(k, |r, _| {
            let i = free[r];
            let pinned: f64 = (0..x0.len()).filter(|&j| !u0.is_free(j)).map(|j| lap[(i, j)] * x0[j]).sum();
            mass[i] / h * x0[i] - pinned
        });
        let x = lu.solve(&b).unwrap();
        for (r, &i) in free.iter().enumerate() {
            out[i][c] = x[r];
        }
    }
    out
}

/// Exact linear heat flow `M x' = −L x` at time `t` with pinned values held fixed.
pub fn dense_heat(u0: &MapState, t: f64) -> Vec<Vec<f64>> {
    let Dense { free, lap, mass } = dense(u0);
    let dim = coords(u0.value(0)).len();
    let k = free.len();
    let mut out: Vec<Vec<f64>> = u0.values().iter().map(|p| coords(p).to_vec()).collect();
    let lff = nalgebra::DMatrix::from_fn(k, k, |r, c| lap[(free[r], free[c])]);
    let sq: Vec<f64> = free.iter().map(|&i| mass[i].sqrt()).collect();
    let s = nalgebra::DMatrix::from_fn(k, k, |r, c| lff[(r, c)] / (sq[r] * sq[c]));
    let eig = nalgebra::SymmetricEigen::new(s);
    let decay = nalgebra::DMatrix::from_diagonal(&eig.eigenvalues.map(|l| (-t * l).exp()));
    let prop = &eig.eigenvectors * decay * eig.eigenvectors.transpose();
    for c in 0..dim {
        let x0 = column(u0, c);
        let forcing = nalgebra::DVector::from_fn(k, |r, _| {
            let i = free[r];
            (0..x0.len()).filter(|&j| !u0.is_free(j)).map(|j| lap[(i, j)] * x0[j]).sum::<f64>()
        });
        let steady = if forcing.iter().all(|v| *v == 0.0) {
            nalgebra::DVector::zeros(k)
        } else {
            -lff.clone().lu().solve(&forcing).unwrap()
        };
        let y0 = nalgebra::DVector::from_fn(k, |r, _| sq[r] * (x0[free[r]] - steady[r]));
        let y = &prop * y0;
        for (r, &i) in free.iter().enumerate() {
            out[i][c] = steady[r] + y[r] / sq[r];
        }
    }
    out
}

pub fn max_error(u: &MapState, reference: &[Vec<f64>]) -> f64 {
    u.values()
        .iter()
        .zip(reference)
        .flat_map(|(p, q)| coords(p).iter().zip(q).map(|(a, b)| (a - b).abs()).collect::<Vec<_>>())
        .fold(0.0, f64::max)
}
