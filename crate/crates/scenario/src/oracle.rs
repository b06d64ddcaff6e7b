//! Independent reference computations.
//!
//! Dense linear algebra for Euclidean targets, brute-force tree barycenters
//! and exhaustive 1-D inf-convolutions.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use hmflow_core::flow::{crandall_liggett, SweepOptions};
use hmflow_core::mesh::{DomainKind, MapState, MeshDomain};
use hmflow_core::target::{weighted_barycenter, MetricTree, Point, TargetSpace, TreePoint};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::encode::{decode_point, encode_point, real};
use crate::maps::expr_is_valid;

pub const CASES: [&str; 3] = ["euclidean-heat", "tree-brute-barycenter", "grid-hj-closedform"];

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("unknown oracle case `{0}` (known: euclidean-heat, tree-brute-barycenter, grid-hj-closedform)")]
    UnknownCase(String),
    #[error("parameter `{key}`: {message}")]
    Param { key: String, message: String },
    #[error(transparent)]
    Core(#[from] hmflow_core::Error),
}

fn param_err(key: &str, message: impl Into<String>) -> OracleError {
    OracleError::Param { key: key.into(), message: message.into() }
}

/// Rows of strings under a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        std::fs::File::create(path)?.write_all(&self.to_csv())
    }
}

/// Typed access to `key=value` parameters; unknown keys are rejected.
pub struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    pub fn parse(pairs: &[String], known: &[&str]) -> Result<Self, OracleError> {
        let mut values = BTreeMap::new();
        for p in pairs {
            let (k, v) = p.split_once('=').ok_or_else(|| param_err(p, "expected key=value"))?;
            if !known.contains(&k) {
                return Err(param_err(k, format!("unknown parameter (known: {})", known.join(", "))));
            }
            values.insert(k.to_string(), v.to_string());
        }
        Ok(Params { values })
    }

    fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, OracleError> {
        match self.values.get(key) {
            Some(v) => v.parse().map_err(|_| param_err(key, format!("cannot parse `{v}`"))),
            None => Ok(default),
        }
    }

    fn text(&self, key: &str, default: &str) -> String {
        self.values.get(key).cloned().unwrap_or_else(|| default.to_string())
    }
}

fn coords(p: &Point) -> Result<&[f64], hmflow_core::Error> {
    match p {
        Point::Euclidean(v) => Ok(v),
        _ => Err(hmflow_core::Error::SpaceMismatch("dense oracles need euclidean targets".into())),
    }
}

struct Dense {
    free: Vec<usize>,
    lap: DMatrix<f64>,
    mass: Vec<f64>,
    dim: usize,
}

fn dense(u: &MapState) -> Result<Dense, hmflow_core::Error> {
    let d = u.domain();
    let n = d.num_vertices();
    let mut lap = DMatrix::zeros(n, n);
    for &(a, b, w) in d.edges() {
        lap[(a, a)] += w;
        lap[(b, b)] += w;
        lap[(a, b)] -= w;
        lap[(b, a)] -= w;
    }
    Ok(Dense {
        free: (0..n).filter(|&i| u.is_free(i)).collect(),
        lap,
        mass: d.measures().to_vec(),
        dim: coords(u.value(0))?.len(),
    })
}

fn component(u: &MapState, c: usize) -> DVector<f64> {
    DVector::from_iterator(u.values().len(), u.values().iter().map(|p| coords(p).expect("checked")[c]))
}

fn rows_of(u: &MapState) -> Vec<Vec<f64>> {
    u.values().iter().map(|p| coords(p).expect("checked").to_vec()).collect()
}

/// Resolvent `J_h(u₀)` of a Euclidean map by a dense solve of
/// `(M/h + L)_FF x_F = (M/h) u₀_F − L_FB ψ_B`.
pub fn dense_resolvent(u0: &MapState, h: f64) -> Result<Vec<Vec<f64>>, hmflow_core::Error> {
    let Dense { free, lap, mass, dim } = dense(u0)?;
    let mut out = rows_of(u0);
    let k = free.len();
    let lu = DMatrix::from_fn(k, k, |r, c| lap[(free[r], free[c])] + if r == c { mass[free[r]] / h } else { 0.0 }).lu();
    for c in 0..dim {
        let x0 = component(u0, c);
        let b = DVector::from_fn(k, |r, _| {
            let i = free[r];
            let pinned: f64 = (0..x0.len()).filter(|&j| !u0.is_free(j)).map(|j| lap[(i, j)] * x0[j]).sum();
            mass[i] / h * x0[i] - pinned
        });
        let x = lu.solve(&b).ok_or_else(|| hmflow_core::Error::LinearSolve { residual: f64::NAN, iterations: 0 })?;
        for (r, &i) in free.iter().enumerate() {
            out[i][c] = x[r];
        }
    }
    Ok(out)
}

/// Exact linear heat flow `M x' = −L x` at time `t`, pinned values fixed, via
/// the eigen-decomposition of `M^{-1/2} L_FF M^{-1/2}`.
pub fn dense_heat(u0: &MapState, t: f64) -> Result<Vec<Vec<f64>>, hmflow_core::Error> {
    let Dense { free, lap, mass, dim } = dense(u0)?;
    let mut out = rows_of(u0);
    let k = free.len();
    let lff = DMatrix::from_fn(k, k, |r, c| lap[(free[r], free[c])]);
    let sq: Vec<f64> = free.iter().map(|&i| mass[i].sqrt()).collect();
    let eig = SymmetricEigen::new(DMatrix::from_fn(k, k, |r, c| lff[(r, c)] / (sq[r] * sq[c])));
    let decay = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| (-t * l).exp()));
    let propagator = &eig.eigenvectors * decay * eig.eigenvectors.transpose();
    for c in 0..dim {
        let x0 = component(u0, c);
        let forcing = DVector::from_fn(k, |r, _| {
            let i = free[r];
            (0..x0.len()).filter(|&j| !u0.is_free(j)).map(|j| lap[(i, j)] * x0[j]).sum::<f64>()
        });
        let steady = if forcing.iter().all(|v| *v == 0.0) {
            DVector::zeros(k)
        } else {
            -lff.clone().lu().solve(&forcing).expect("Dirichlet Laplacian is invertible")
        };
        let y = &propagator * DVector::from_fn(k, |r, _| sq[r] * (x0[free[r]] - steady[r]));
        for (r, &i) in free.iter().enumerate() {
            out[i][c] = steady[r] + y[r] / sq[r];
        }
    }
    Ok(out)
}

/// Largest coordinate difference between a map and reference rows.
pub fn max_error(u: &MapState, reference: &[Vec<f64>]) -> f64 {
    u.values()
        .iter()
        .zip(reference)
        .flat_map(|(p, q)| {
            let p = coords(p).expect("euclidean map");
            p.iter().zip(q).map(|(a, b)| (a - b).abs()).collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

pub fn euclidean_heat(params: &Params) -> Result<Table, OracleError> {
    let kind: DomainKind = params.text("kind", "interval-dirichlet").parse().map_err(|e: hmflow_core::Error| param_err("kind", e.to_string()))?;
    let n: usize = params.get("n", 3)?;
    let length: f64 = params.get("length", 2.0)?;
    let t: f64 = params.get("t", 1.0)?;
    let m: usize = params.get("m", 0)?;
    if !(t > 0.0) {
        return Err(param_err("t", "must be positive"));
    }
    let expr = params.text("u0", "4*x*(L-x)/(L*L)");
    expr_is_valid(&expr, length).map_err(|e| param_err("u0", e))?;
    let domain = Arc::new(MeshDomain::build(kind, n, length)?);
    let spec = crate::config::MapSpec { expr: Some(vec![expr]), ..Default::default() };
    let space = TargetSpace::euclidean(1)?;
    let values = crate::maps::map_values(&spec, &domain, &space, &mut crate::maps::rng_for(0, 0))
        .map_err(|e| param_err("u0", e))?;
    let u0 = MapState::new(domain.clone(), Arc::new(space), values)?;
    let exact = dense_heat(&u0, t)?;
    let mut header = vec!["vertex_id", "x", "y", "initial", "exact"];
    let scheme = if m > 0 {
        header.push("crandall_liggett");
        let opts = SweepOptions { tol: 1e-13, ..SweepOptions::default() };
        Some(crandall_liggett(&u0, t, m, &opts)?)
    } else {
        None
    };
    let mut table = Table::new(&header);
    for i in 0..domain.num_vertices() {
        let x = domain.coords(i);
        let mut row = vec![i.to_string(), real(x[0]), real(x[1]), real(coords(u0.value(i))?[0]), real(exact[i][0])];
        if let Some(s) = &scheme {
            row.push(real(coords(s.value(i))?[0]));
        }
        table.push(row);
    }
    Ok(table)
}

fn parse_tree(params: &Params) -> Result<MetricTree, OracleError> {
    match params.values.get("edges") {
        None => Ok(MetricTree::tripod(params.get("leg", 2.0)?)?),
        Some(spec) => {
            let edges = spec
                .split(',')
                .map(|e| {
                    let parts: Vec<&str> = e.trim().split('-').collect();
                    match parts[..] {
                        [a, b, l] => Ok((
                            a.parse().map_err(|_| param_err("edges", format!("bad vertex `{a}`")))?,
                            b.parse().map_err(|_| param_err("edges", format!("bad vertex `{b}`")))?,
                            l.parse().map_err(|_| param_err("edges", format!("bad length `{l}`")))?,
                        )),
                        _ => Err(param_err("edges", format!("`{e}` is not a-b-length"))),
                    }
                })
                .collect::<Result<Vec<(usize, usize, f64)>, _>>()?;
            let mut ids: Vec<usize> = edges.iter().flat_map(|&(a, b, _)| [a, b]).collect();
            ids.sort_unstable();
            ids.dedup();
            Ok(MetricTree::new(&ids, &edges)?)
        }
    }
}

/// Minimizes `F(q) = Σ wᵢ d²(q, xᵢ)` over `resolution + 1` equispaced points on every edge.
pub fn brute_tree_barycenter(tree: &MetricTree, points: &[TreePoint], weights: &[f64], resolution: usize) -> (TreePoint, f64) {
    let objective = |q: &TreePoint| -> f64 {
        points.iter().zip(weights).map(|(p, w)| w * tree.distance(q, p).powi(2)).sum()
    };
    let mut best = (points[0], f64::INFINITY);
    for (e, edge) in tree.edges().iter().enumerate() {
        for k in 0..=resolution {
            let q = tree.canonicalize(TreePoint { edge: e, offset: edge.length * k as f64 / resolution as f64 });
            let f = objective(&q);
            if f < best.1 {
                best = (q, f);
            }
        }
    }
    best
}

pub fn tree_brute_barycenter(params: &Params) -> Result<Table, OracleError> {
    let tree = parse_tree(params)?;
    let space = TargetSpace::MetricTree(tree.clone());
    let points = params
        .text("points", "0:1;1:1;2:1")
        .split(';')
        .map(|p| match decode_point(&space, p) {
            Ok(Point::Tree(t)) => Ok(t),
            Ok(_) => unreachable!("tree space decodes tree points"),
            Err(e) => Err(param_err("points", e)),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let weights = match params.values.get("weights") {
        Some(w) => w
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| param_err("weights", format!("bad weight `{x}`"))))
            .collect::<Result<Vec<_>, _>>()?,
        None => vec![1.0; points.len()],
    };
    if weights.len() != points.len() || weights.iter().any(|w| !(*w > 0.0)) {
        return Err(param_err("weights", "need one positive weight per point"));
    }
    let resolution: usize = params.get("resolution", 20_000)?;
    if resolution == 0 {
        return Err(param_err("resolution", "must be positive"));
    }
    let (brute, f_brute) = brute_tree_barycenter(&tree, &points, &weights, resolution);
    let wrapped: Vec<Point> = points.iter().map(|p| Point::Tree(*p)).collect();
    let refs: Vec<&Point> = wrapped.iter().collect();
    let exact = weighted_barycenter(&space, &refs, &weights, 1e-13)?;
    let f_exact: f64 = wrapped.iter().zip(&weights).map(|(p, w)| w * space.distance_squared(&exact, p).unwrap_or(f64::NAN).max(0.0)).sum();
    let gap = space.distance(&exact, &Point::Tree(brute))?;
    let mut table = Table::new(&["method", "point", "objective", "distance_to_exact"]);
    table.push(vec!["brute".into(), encode_point(&Point::Tree(brute)), real(f_brute), real(gap)]);
    table.push(vec!["exact".into(), encode_point(&exact), real(f_exact), real(0.0)]);
    Ok(table)
}

/// Exhaustive `min_j |xᵢ − xⱼ|^p / (p ε^{p−1}) − slope·|xᵢ − xⱼ|` over the whole lattice.
pub fn grid_hj_closedform(params: &Params) -> Result<Table, OracleError> {
    let n: usize = params.get("n", 801)?;
    let length: f64 = params.get("length", 1.0)?;
    let slope: f64 = params.get("slope", 1.0)?;
    let cells: usize = params.get("eps_cells", 8)?;
    let p: u32 = params.get("p", 2)?;
    if n < 3 || !(length > 0.0) {
        return Err(param_err("n", "need n >= 3 and length > 0"));
    }
    if p < 2 {
        return Err(param_err("p", "exponent must be at least 2"));
    }
    if cells == 0 {
        return Err(param_err("eps_cells", "must be positive"));
    }
    let delta = length / (n - 1) as f64;
    let eps = cells as f64 * delta;
    let (pf, q) = (p as f64, p as f64 / (p as f64 - 1.0));
    let reach = eps * slope.abs().powf(1.0 / (pf - 1.0));
    let closed = -eps * slope.abs().powf(q) / q;
    let mut table = Table::new(&["vertex_id", "x", "value", "closed_form", "interior"]);
    for i in 0..n {
        let value = (0..n)
            .map(|j| {
                let r = (i as f64 - j as f64).abs() * delta;
                r.powi(p as i32) / (pf * eps.powi(p as i32 - 1)) - slope.abs() * r
            })
            .fold(f64::INFINITY, f64::min);
        let x = i as f64 * delta;
        let interior = x >= reach - 1e-12 || length - x >= reach - 1e-12;
        table.push(vec![i.to_string(), real(x), real(value), real(closed), (interior as u8).to_string()]);
    }
    Ok(table)
}

pub fn run_oracle(case: &str, pairs: &[String]) -> Result<Table, OracleError> {
    match case {
        "euclidean-heat" => euclidean_heat(&Params::parse(pairs, &["kind", "n", "length", "t", "m", "u0"])?),
        "tree-brute-barycenter" => {
            tree_brute_barycenter(&Params::parse(pairs, &["leg", "edges", "points", "weights", "resolution"])?)
        }
        "grid-hj-closedform" => grid_hj_closedform(&Params::parse(pairs, &["n", "length", "slope", "eps_cells", "p"])?),
        other => Err(OracleError::UnknownCase(other.into())),
    }
}
