use super::lipschitz::lip_x;
use super::{check_tests, pair_all, uniform_series, CheckReport};
use crate::error::Result;
use crate::flow::FlowTrace;
use crate::mesh::ScalarField;

/// Weak residuals of `(Δ − ∂ₜ⁻)ℓ² − 2|∇ℓ|² − 2Kℓ² ≥ 0` with `ℓ = lip_x u`,
/// one per (time, test). The default tolerance is `s + δ`.
pub fn bochner_residuals(trace: &FlowTrace, k: f64, tests: &[ScalarField]) -> Result<CheckReport> {
    let (states, _, s) = uniform_series(trace)?;
    let domain = states[0].domain();
    check_tests(domain, tests)?;
    let square = |l: &ScalarField| -> ScalarField {
        ScalarField::new(l.domain().clone(), l.values().iter().map(|x| x * x).collect())
            .expect("finite lip values")
    };
    let mut prev = square(&lip_x(states[0]));
    let mut residuals = Vec::new();
    for u in &states[1..] {
        let l = lip_x(u);
        let l2 = square(&l);
        let lap = l2.laplacian();
        let grad = l.gradient_squared();
        let g: Vec<f64> = (0..l.values().len())
            .map(|i| lap[i] - (l2[i] - prev[i]) / s - 2.0 * grad[i] - 2.0 * k * l2[i])
            .collect();
        residuals.extend(pair_all(&g, tests));
        prev = l2;
    }
    Ok(CheckReport::at_least(
        "bochner",
        "Bochner inequality for the pointwise Lipschitz constant",
        s + domain.spacing(),
        residuals,
    ))
}
