use super::{check_tests, interpolation::r_density, pair_all, uniform_series, CheckReport};
use crate::error::{Error, Result};
use crate::flow::FlowTrace;
use crate::mesh::ScalarField;
use crate::target::Point;

const DEFAULT_TOL: f64 = 1e-9;

/// Weak residuals of `(Δ − ∂ₜ⁻)w − 2R_{u,v} ≥ 0` for `w = d²(uᵗ, vᵗ)`, one per
/// (time, test), using the backward difference over the trace step.
pub fn subsolution_residuals(u_trace: &FlowTrace, v_trace: &FlowTrace, tests: &[ScalarField]) -> Result<CheckReport> {
    let (us, ut, s) = uniform_series(u_trace)?;
    let (vs, vt, _) = uniform_series(v_trace)?;
    if ut.len() != vt.len() || ut.iter().zip(&vt).any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0)) {
        return Err(Error::MapMismatch("traces are recorded on different time grids".into()));
    }
    us[0].compatible(vs[0])?;
    check_tests(us[0].domain(), tests)?;

    let mut prev = us[0].pointwise_distance_squared(vs[0])?;
    let mut residuals = Vec::new();
    for k in 1..us.len() {
        let w = us[k].pointwise_distance_squared(vs[k])?;
        let lap = w.laplacian();
        let r = r_density(us[k], vs[k])?;
        let g: Vec<f64> = (0..w.values().len())
            .map(|i| lap[i] - (w[i] - prev[i]) / s - 2.0 * r[i])
            .collect();
        residuals.extend(pair_all(&g, tests));
        prev = w;
    }
    Ok(CheckReport::at_least(
        "subsolution",
        "subsolution property of the squared distance between two flows",
        DEFAULT_TOL,
        residuals,
    ))
}

/// Weak residuals of `(Δ − ∂ₜ⁻)d²(P, u) ≥ 2e_u` and `(Δ − ∂ₜ⁻)d(P, u) ≥ 0`.
pub fn distance_subsolution_residuals(
    trace: &FlowTrace,
    p: &Point,
    tests: &[ScalarField],
) -> Result<(CheckReport, CheckReport)> {
    let (states, _, s) = uniform_series(trace)?;
    check_tests(states[0].domain(), tests)?;
    let mut prev = states[0].distance_field(p)?;
    let (mut sq, mut lin) = (Vec::new(), Vec::new());
    for u in &states[1..] {
        let d = u.distance_field(p)?;
        let d2 = ScalarField::new(d.domain().clone(), d.values().iter().map(|x| x * x).collect())?;
        let lap2 = d2.laplacian();
        let lap1 = d.laplacian();
        let e = u.energy().1;
        let n = d.values().len();
        let g2: Vec<f64> = (0..n)
            .map(|i| lap2[i] - (d2[i] - prev[i] * prev[i]) / s - 2.0 * e[i])
            .collect();
        let g1: Vec<f64> = (0..n).map(|i| lap1[i] - (d[i] - prev[i]) / s).collect();
        sq.extend(pair_all(&g2, tests));
        lin.extend(pair_all(&g1, tests));
        prev = d;
    }
    Ok((
        CheckReport::at_least(
            "distance_squared_subsolution",
            "squared distance to a point is a subsolution with source twice the energy density",
            DEFAULT_TOL,
            sq,
        ),
        CheckReport::at_least(
            "distance_subsolution",
            "distance to a point is a subsolution of the heat equation",
            DEFAULT_TOL,
            lin,
        ),
    ))
}
