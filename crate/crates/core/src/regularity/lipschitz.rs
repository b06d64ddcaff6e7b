use crate::error::{Error, Result};
use crate::flow::FlowTrace;
use crate::mesh::{MapState, ScalarField};

use super::uniform_series;

/// `lip_r u(i) = max { d(uᵢ, uⱼ) / dist(i, j) : 0 < dist(i, j) ≤ r }` in the graph metric.
pub fn lip_field(u: &MapState, r: f64) -> ScalarField {
    let d = u.domain();
    let space = u.space();
    let values = (0..d.num_vertices())
        .map(|i| {
            d.ball(i, r)
                .into_iter()
                .filter(|&(_, dist)| dist > 0.0)
                .map(|(j, dist)| space.dist(u.value(i), u.value(j)) / dist)
                .fold(0.0, f64::max)
        })
        .collect();
    ScalarField::from_parts(d.clone(), values)
}

/// Nearest-neighbor `lip_r` with `r` the lattice spacing.
pub fn lip_x(u: &MapState) -> ScalarField {
    lip_field(u, u.domain().spacing())
}

#[derive(Debug, Clone)]
pub struct TemporalRatios {
    /// Index into the report's time list.
    pub t_index: usize,
    pub lag_steps: usize,
    pub s: f64,
    /// `d(uᵢᵗ, uᵢ^{t+s}) / s` per vertex.
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LipReport {
    pub times: Vec<f64>,
    pub radii: Vec<f64>,
    /// `spatial[k][r]` is `lip_{radii[r]}` of the state at `times[k]`.
    pub spatial: Vec<Vec<ScalarField>>,
    /// Ratios for every start time `≥ t*` and every dyadic lag that fits.
    pub temporal: Vec<TemporalRatios>,
    /// Largest nearest-neighbor lip over times `≥ t*`.
    pub spatial_constant: f64,
    /// Largest temporal ratio.
    pub temporal_constant: f64,
}

impl LipReport {
    /// Largest per-vertex `max/min` of the temporal ratios over lags with
    /// `s ∈ [s_min, s_max]`, taken over start times with every such lag
    /// present. Vertices whose ratios fall below `floor` are skipped.
    pub fn dyadic_spread(&self, s_min: f64, s_max: f64, floor: f64) -> f64 {
        let in_range = |s: f64| s >= s_min * (1.0 - 1e-9) && s <= s_max * (1.0 + 1e-9);
        let lags_in_range = |t: usize| {
            self.temporal.iter().filter(|r| r.t_index == t && in_range(r.s)).count()
        };
        let starts: Vec<usize> = {
            let mut v: Vec<usize> = self.temporal.iter().map(|r| r.t_index).collect();
            v.dedup();
            v
        };
        let full = starts.iter().map(|&t| lags_in_range(t)).max().unwrap_or(0);
        let mut worst: f64 = 1.0;
        for t in starts {
            if full == 0 || lags_in_range(t) < full {
                continue;
            }
            let rows: Vec<&TemporalRatios> =
                self.temporal.iter().filter(|r| r.t_index == t && in_range(r.s)).collect();
            for i in 0..rows[0].ratios.len() {
                let vals: Vec<f64> = rows.iter().map(|r| r.ratios[i]).collect();
                if vals.iter().any(|&v| v < floor) {
                    continue;
                }
                let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                worst = worst.max(hi / lo);
            }
        }
        worst
    }
}

/// Spatial `lip_r` fields for every recorded time and temporal difference
/// quotients over dyadic lags (1, 2, 4, … steps) starting at times `≥ t*`.
pub fn lip_report(trace: &FlowTrace, t_star: f64, radii: &[f64]) -> Result<LipReport> {
    let (states, times, s) = uniform_series(trace)?;
    let domain = states[0].domain();
    if let Some(r) = radii.iter().find(|&&r| r < domain.spacing() * (1.0 - 1e-12)) {
        return Err(Error::InvalidParameter(format!(
            "radius {r} is below the lattice spacing {}",
            domain.spacing()
        )));
    }
    if !(t_star >= times[0] && t_star <= *times.last().unwrap()) {
        return Err(Error::InvalidParameter(format!("t* = {t_star} outside the trace")));
    }
    let space = states[0].space();
    let spatial: Vec<Vec<ScalarField>> = states
        .iter()
        .map(|u| radii.iter().map(|&r| lip_field(u, r)).collect())
        .collect();

    let mut temporal = Vec::new();
    let mut temporal_constant: f64 = 0.0;
    let mut spatial_constant: f64 = 0.0;
    for (a, &t) in times.iter().enumerate() {
        if t < t_star - 1e-12 {
            continue;
        }
        spatial_constant = spatial_constant.max(lip_x(states[a]).max());
        let mut lag = 1;
        while a + lag < states.len() {
            let gap = lag as f64 * s;
            let ratios: Vec<f64> = (0..domain.num_vertices())
                .map(|i| space.dist(states[a].value(i), states[a + lag].value(i)) / gap)
                .collect();
            temporal_constant = ratios.iter().copied().fold(temporal_constant, f64::max);
            temporal.push(TemporalRatios { t_index: a, lag_steps: lag, s: gap, ratios });
            lag *= 2;
        }
    }
    Ok(LipReport {
        times,
        radii: radii.to_vec(),
        spatial,
        temporal,
        spatial_constant,
        temporal_constant,
    })
}

/// `H_s[g(t₀−s)](x₀) − g(x₀, t₀) − ∫₀ˢ H_τ[f(t₀−τ)](x₀) dτ` on a uniform series
/// with step `dt`, where `s = lag·dt`, `H` is the implicit heat semigroup with
/// step `dt` and the integral is the trapezoid rule on `substeps` panels.
///
/// Bounded above by `C·s/substeps` when `(Δ − ∂ₜ⁻)g ≤ f` on a closed domain.
pub fn mean_value_residual(
    g: &[ScalarField],
    f: &[ScalarField],
    dt: f64,
    x0: usize,
    t0: usize,
    lag: usize,
    substeps: usize,
) -> Result<f64> {
    if g.len() != f.len() || t0 >= g.len() || lag == 0 || t0 < lag {
        return Err(Error::InvalidParameter(format!(
            "series of length {} too short for t0 = {t0}, lag = {lag}",
            g.len().min(f.len())
        )));
    }
    if substeps == 0 || lag % substeps != 0 {
        return Err(Error::InvalidParameter(format!("{substeps} panels do not divide the lag {lag}")));
    }
    let s = lag as f64 * dt;
    let heat_g = g[t0 - lag].heat_evolve(s, lag)?;
    let stride = lag / substeps;
    let panel = s / substeps as f64;
    let mut integral = 0.0;
    for k in 0..=substeps {
        let field = &f[t0 - k * stride];
        let value = if k == 0 {
            field[x0]
        } else {
            field.heat_evolve(k as f64 * panel, k * stride)?[x0]
        };
        let weight = if k == 0 || k == substeps { 0.5 } else { 1.0 };
        integral += weight * panel * value;
    }
    Ok(heat_g[x0] - g[t0][x0] - integral)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::flow::{flow_run, StepSchedule, SweepOptions};
    use crate::mesh::{DomainKind, MeshDomain};
    use crate::target::{Point, TargetSpace};

    #[test]
    fn linear_map_has_unit_lip() {
        let d = Arc::new(MeshDomain::build(DomainKind::IntervalDirichlet, 21, 1.0).unwrap());
        let u = MapState::from_fn(d.clone(), Arc::new(TargetSpace::euclidean(1).unwrap()), |_, x| {
            Point::real(x[0])
        })
        .unwrap();
        for r in [0.05, 0.1, 0.3] {
            assert!(lip_field(&u, r).values().iter().all(|&l| (l - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn heat_solution_has_zero_mean_value_residual() {
        let d = Arc::new(MeshDomain::build(DomainKind::Cycle, 12, 1.0).unwrap());
        let g0 = ScalarField::from_fn(d.clone(), |i, _| ((i * 7) % 5) as f64).unwrap();
        let dt = 0.01;
        let mut g = vec![g0];
        for _ in 0..8 {
            g.push(g.last().unwrap().heat_evolve(dt, 1).unwrap());
        }
        let f = vec![ScalarField::new(d.clone(), vec![0.0; 12]).unwrap(); g.len()];
        for x0 in 0..12 {
            let r = mean_value_residual(&g, &f, dt, x0, 8, 8, 4).unwrap();
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn constant_trace_has_zero_lips() {
        let d = Arc::new(MeshDomain::build(DomainKind::Cycle, 8, 1.0).unwrap());
        let u = MapState::constant(d, Arc::new(TargetSpace::euclidean(2).unwrap()), Point::Euclidean(vec![1.0, 2.0]))
            .unwrap();
        let trace = flow_run(&u, &[0.1, 0.2, 0.3], StepSchedule::PerInterval(1), &SweepOptions::default()).unwrap();
        let rep = lip_report(&trace, 0.1, &[0.125, 0.25]).unwrap();
        assert_eq!(rep.spatial_constant, 0.0);
        assert_eq!(rep.temporal_constant, 0.0);
    }
}
