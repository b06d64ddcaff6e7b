use crate::error::{Error, Result};
use crate::mesh::{MapState, ScalarField};

/// `Rᵢ = (1/2μᵢ) Σ_{j~i} w_{ij} (d(uᵢ, uⱼ) − d(vᵢ, vⱼ))²`.
pub fn r_density(u: &MapState, v: &MapState) -> Result<ScalarField> {
    u.compatible(v)?;
    let d = u.domain();
    let (du, dv) = (u.edge_distances(), v.edge_distances());
    let mut acc = vec![0.0; d.num_vertices()];
    for (k, &(a, b, w)) in d.edges().iter().enumerate() {
        let g = du[k] - dv[k];
        acc[a] += w * g * g;
        acc[b] += w * g * g;
    }
    let values = acc.iter().enumerate().map(|(i, s)| s / (2.0 * d.measure(i))).collect();
    ScalarField::new(d.clone(), values)
}

#[derive(Debug, Clone)]
pub struct PhiInterpolation {
    /// Right-hand side minus left-hand side, one entry per edge.
    pub per_edge: Vec<f64>,
    /// Sum over edges.
    pub total: f64,
    /// `E[u_φ] + E[v_φ] − E[u] − E[v]`.
    pub lhs: f64,
}

/// Energy comparison for the maps `u_φ(i) = γ_{uᵢ→vᵢ}(φᵢ)` and
/// `v_φ(i) = γ_{vᵢ→uᵢ}(φᵢ)`.
///
/// With `Wᵢ = d²(uᵢ, vᵢ)` and `Δd_e = d(vᵢ, vⱼ) − d(uᵢ, uⱼ)`, each edge satisfies
/// `w[d²(u_φ) + d²(v_φ) − d²(u) − d²(v)]_e ≤ −w(φᵢ−φⱼ)[(1−2φᵢ)Wᵢ − (1−2φⱼ)Wⱼ]
///  − w[(φᵢ−φᵢ²) + (φⱼ−φⱼ²)]Δd_e² + w|φᵢ−φⱼ|Δd_e²`,
/// and the edge sum of the middle term is `−2 Σ μᵢ(φᵢ−φᵢ²)Rᵢ`.
pub fn phi_interpolation_residuals(u: &MapState, v: &MapState, phi: &ScalarField) -> Result<PhiInterpolation> {
    u.compatible(v)?;
    let d = u.domain();
    let space = u.space();
    let phi = phi.values();
    if phi.len() != d.num_vertices() {
        return Err(Error::MapMismatch("test field size differs from the domain".into()));
    }
    for (i, &p) in phi.iter().enumerate() {
        if !(0.0..=1.0).contains(&p) || (d.is_boundary(i) && p != 0.0) {
            return Err(Error::InvalidParameter(format!(
                "phi must lie in [0, 1] and vanish on the boundary (vertex {i}: {p})"
            )));
        }
    }
    let (uv, vv) = (u.values(), v.values());
    let u_phi: Vec<_> = (0..phi.len()).map(|i| space.geodesic_unchecked(&uv[i], &vv[i], phi[i])).collect();
    let v_phi: Vec<_> = (0..phi.len()).map(|i| space.geodesic_unchecked(&vv[i], &uv[i], phi[i])).collect();
    let w_pt: Vec<f64> = (0..phi.len()).map(|i| space.dist2(&uv[i], &vv[i])).collect();

    let mut per_edge = Vec::with_capacity(d.edges().len());
    let mut lhs_total = 0.0;
    for &(i, j, w) in d.edges() {
        let (du2, dv2) = (space.dist2(&uv[i], &uv[j]), space.dist2(&vv[i], &vv[j]));
        let (du, dv) = (du2.sqrt(), dv2.sqrt());
        let lhs = w * ((space.dist2(&u_phi[i], &u_phi[j]) - du2) + (space.dist2(&v_phi[i], &v_phi[j]) - dv2));
        let (pi, pj) = (phi[i], phi[j]);
        let gap = (dv - du) * (dv - du);
        let rhs = -w * (pi - pj) * ((1.0 - 2.0 * pi) * w_pt[i] - (1.0 - 2.0 * pj) * w_pt[j])
            - w * ((pi - pi * pi) + (pj - pj * pj)) * gap
            + w * (pi - pj).abs() * gap;
        lhs_total += lhs;
        per_edge.push(rhs - lhs);
    }
    let total = per_edge.iter().sum();
    Ok(PhiInterpolation { per_edge, total, lhs: lhs_total })
}
