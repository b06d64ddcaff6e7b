use serde::{Deserialize, Serialize};

use super::lipschitz::{lip_field, lip_x};
use super::{check_tests, pair_all, uniform_series, CheckReport};
use crate::error::{Error, Result};
use crate::flow::FlowTrace;
use crate::mesh::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HjParams {
    pub eps: f64,
    /// Integer exponent `p ≥ 2`.
    pub p: u32,
    /// Ricci lower bound `K ≤ 0`.
    pub k: f64,
    /// Radius of a ball `B_{M0}(P0)` containing the map.
    pub m0: f64,
    /// Time horizon `T`.
    pub t_horizon: f64,
    /// Distance from the region of interest to the boundary.
    pub r: f64,
}

/// `(ε₀, C₁)` with `ε₀ = e^{−2|K|T} R² / (8 M0)` and `C₁ = (6 M0 e^{2|K|T})^{1/2}`.
pub fn hj_constants(k: f64, t_horizon: f64, r: f64, m0: f64) -> (f64, f64) {
    let growth = (2.0 * k.abs() * t_horizon).exp();
    (r * r / (8.0 * m0 * growth), (6.0 * m0 * growth).sqrt())
}

#[derive(Debug, Clone)]
pub struct HjField {
    pub params: HjParams,
    pub eps0: f64,
    pub c1: f64,
    /// Search radius `C₁√ε`.
    pub radius: f64,
    pub times: Vec<f64>,
    /// `f_{ε,p}` per time; 0 at vertices that are not admissible.
    pub values: Vec<ScalarField>,
    /// Vertices whose search ball avoids the boundary.
    pub admissible: Vec<bool>,
    /// Largest graph distance to a minimizer.
    pub max_minimizer_distance: f64,
    pub step: f64,
}

impl HjField {
    /// Admissible vertices whose neighbors are all admissible; weak-form tests
    /// must be supported here so the Laplacian only reads computed values.
    pub fn test_support(&self) -> Vec<bool> {
        let d = self.values[0].domain();
        (0..d.num_vertices())
            .map(|i| self.admissible[i] && d.neighbors(i).iter().all(|&(j, _)| self.admissible[j]))
            .collect()
    }
}

/// Inf-convolution `f_{ε,p}(i, t) = min_j e^{−pKt} dist(i,j)^p / (p ε^{p−1}) − d(uᵢᵗ, uⱼᵗ)`
/// over the graph ball of radius `C₁√ε`, evaluated on the trace's uniform grid
/// (including `u₀` when the first recorded time is positive).
pub fn hj_flow(trace: &FlowTrace, params: HjParams) -> Result<HjField> {
    let HjParams { eps, p, k, m0, t_horizon, r } = params;
    if p < 2 {
        return Err(Error::InvalidParameter(format!("exponent p = {p} must be at least 2")));
    }
    if !(m0 > 0.0 && r > 0.0 && t_horizon >= 0.0 && k <= 0.0) {
        return Err(Error::InvalidParameter("need M0 > 0, R > 0, T >= 0 and K <= 0".into()));
    }
    let (eps0, c1) = hj_constants(k, t_horizon, r, m0);
    if !(eps > 0.0 && eps < eps0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must lie in (0, eps0) with eps0 = {eps0}")));
    }
    let (states, times, step) = uniform_series(trace)?;
    let domain = states[0].domain().clone();
    let space = states[0].space().clone();
    let radius = c1 * eps.sqrt();

    let n = domain.num_vertices();
    let balls: Vec<Vec<(usize, f64)>> = (0..n).map(|i| domain.ball(i, radius)).collect();
    let admissible: Vec<bool> = balls
        .iter()
        .map(|b| b.iter().all(|&(j, _)| !domain.is_boundary(j)))
        .collect();
    if !admissible.iter().any(|&a| a) {
        return Err(Error::InvalidParameter(format!(
            "no vertex has its radius-{radius} ball inside the domain"
        )));
    }

    let scale = p as f64 * eps.powi(p as i32 - 1);
    let mut values = Vec::with_capacity(states.len());
    let mut max_minimizer_distance: f64 = 0.0;
    for (u, &t) in states.iter().zip(&times) {
        let damp = (-(p as f64) * k * t).exp();
        let mut f = vec![0.0; n];
        for i in (0..n).filter(|&i| admissible[i]) {
            let mut best = 0.0;
            let mut at = 0.0;
            for &(j, dist) in &balls[i] {
                let v = damp * dist.powi(p as i32) / scale - space.dist(u.value(i), u.value(j));
                if v < best {
                    best = v;
                    at = dist;
                }
            }
            f[i] = best;
            max_minimizer_distance = max_minimizer_distance.max(at);
        }
        values.push(ScalarField::new(domain.clone(), f)?);
    }
    Ok(HjField {
        params,
        eps0,
        c1,
        radius,
        times,
        values,
        admissible,
        max_minimizer_distance,
        step,
    })
}

#[derive(Debug, Clone)]
pub struct HjChecks {
    /// Weak residual of `(Δ − ∂ₜ⁻) f_ε`, bounded above.
    pub supersolution: CheckReport,
    /// `2e^{2|K|T} (lip_{C₁√ε} u)² + f_ε/ε` at admissible vertices, bounded below.
    /// Only evaluated for `p = 2`.
    pub gradient_bound: Option<CheckReport>,
}

pub fn hj_checks(hj: &HjField, trace: &FlowTrace, tests: &[ScalarField]) -> Result<HjChecks> {
    let (states, times, _) = uniform_series(trace)?;
    if times.len() != hj.times.len() {
        return Err(Error::MapMismatch("field and trace have different time grids".into()));
    }
    let domain = hj.values[0].domain();
    check_tests(domain, tests)?;
    let support = hj.test_support();
    for (k, phi) in tests.iter().enumerate() {
        if phi.values().iter().zip(&support).any(|(&v, &ok)| v != 0.0 && !ok) {
            return Err(Error::InvalidParameter(format!(
                "test {k} reaches vertices whose neighbors lack a field value"
            )));
        }
    }

    let s = hj.step;
    let mut weak = Vec::new();
    for k in 1..hj.values.len() {
        let f = &hj.values[k];
        let lap = f.laplacian();
        let g: Vec<f64> = (0..f.values().len())
            .map(|i| lap[i] - (f[i] - hj.values[k - 1][i]) / s)
            .collect();
        weak.extend(pair_all(&g, tests));
    }
    let supersolution = CheckReport::at_most(
        "hj_supersolution",
        "Hamilton-Jacobi inf-convolution is a supersolution of the heat equation",
        s + domain.spacing(),
        weak,
    );

    let gradient_bound = (hj.params.p == 2).then(|| {
        let growth = (2.0 * hj.params.k.abs() * hj.params.t_horizon).exp();
        let eps = hj.params.eps;
        let mut res = Vec::new();
        for (u, f) in states.iter().zip(&hj.values) {
            let lip = lip_field(u, hj.radius);
            for i in (0..f.values().len()).filter(|&i| hj.admissible[i]) {
                res.push(2.0 * growth * lip[i] * lip[i] + f[i] / eps);
            }
        }
        CheckReport::at_least(
            "hj_gradient_bound",
            "gradient bound for the Hamilton-Jacobi inf-convolution",
            1e-9,
            res,
        )
    });
    Ok(HjChecks { supersolution, gradient_bound })
}

/// For each `ε`, the largest `|f_{ε,p}/ε + (e^{Kt} lip_x u)^q / q|` over admissible
/// vertices and times, with `1/p + 1/q = 1`.
pub fn hj_limit_deviation(trace: &FlowTrace, params: HjParams, eps_list: &[f64]) -> Result<Vec<(f64, f64)>> {
    let (states, _, _) = uniform_series(trace)?;
    let p = params.p as f64;
    let q = p / (p - 1.0);
    let lips: Vec<ScalarField> = states.iter().map(|u| lip_x(u)).collect();
    let mut out = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let hj = hj_flow(trace, HjParams { eps, ..params })?;
        let mut worst: f64 = 0.0;
        for (k, f) in hj.values.iter().enumerate() {
            let growth = (params.k * hj.times[k]).exp();
            for i in (0..f.values().len()).filter(|&i| hj.admissible[i]) {
                let limit = -(growth * lips[k][i]).powf(q) / q;
                worst = worst.max((f[i] / eps - limit).abs());
            }
        }
        out.push((eps, worst));
    }
    Ok(out)
}
