//! Residual evaluators for the inequalities satisfied by the flow.
//!
//! Weak-form checks pair a pointwise integrand with nonnegative test fields
//! `φ` normalized to unit mass (`Σ μᵢ φᵢ = 1`), so residuals stay comparable
//! across resolutions.

mod bochner;
mod hj;
mod interpolation;
mod lipschitz;
mod subsolution;

use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use bochner::bochner_residuals;
pub use hj::{hj_checks, hj_constants, hj_flow, hj_limit_deviation, HjChecks, HjField, HjParams};
pub use interpolation::{phi_interpolation_residuals, r_density, PhiInterpolation};
pub use lipschitz::{lip_field, lip_report, lip_x, mean_value_residual, LipReport, TemporalRatios};
pub use subsolution::{distance_subsolution_residuals, subsolution_residuals};

use crate::error::{Error, Result};
use crate::flow::FlowTrace;
use crate::mesh::{MapState, MeshDomain, ScalarField};

/// Direction of a check: residuals bounded below or above by the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    /// Passes when `min ≥ −tolerance`.
    AtLeast,
    /// Passes when `max ≤ tolerance`.
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    #[serde(rename = "paper_anchor")]
    pub anchor: String,
    pub tolerance: f64,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    pub pass: bool,
    pub scenario: String,
    pub seed: u64,
    #[serde(skip)]
    pub sense: Option<Sense>,
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

impl CheckReport {
    pub fn new(check: &str, anchor: &str, sense: Sense, tolerance: f64, residuals: Vec<f64>) -> Self {
        let (min, mean, max) = if residuals.is_empty() {
            (0.0, 0.0, 0.0)
        } else {
            let min = residuals.iter().copied().fold(f64::INFINITY, f64::min);
            let max = residuals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (min, residuals.iter().sum::<f64>() / residuals.len() as f64, max)
        };
        let pass = match sense {
            Sense::AtLeast => min >= -tolerance,
            Sense::AtMost => max <= tolerance,
        } && residuals.iter().all(|r| r.is_finite());
        CheckReport {
            check: check.into(),
            anchor: anchor.into(),
            tolerance,
            min,
            mean,
            max,
            pass,
            scenario: String::new(),
            seed: 0,
            sense: Some(sense),
            residuals,
        }
    }

    pub fn at_least(check: &str, anchor: &str, tolerance: f64, residuals: Vec<f64>) -> Self {
        Self::new(check, anchor, Sense::AtLeast, tolerance, residuals)
    }

    pub fn at_most(check: &str, anchor: &str, tolerance: f64, residuals: Vec<f64>) -> Self {
        Self::new(check, anchor, Sense::AtMost, tolerance, residuals)
    }

    /// Re-evaluates pass/fail against another tolerance.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        let sense = self.sense.unwrap_or(Sense::AtLeast);
        self = Self::new(&self.check, &self.anchor, sense, tolerance, std::mem::take(&mut self.residuals))
            .with_context(&self.scenario, self.seed);
        self
    }

    pub fn with_context(mut self, scenario: &str, seed: u64) -> Self {
        self.scenario = scenario.into();
        self.seed = seed;
        self
    }

    /// Size of the violation: `max(0, −min)` for lower bounds, `max(0, max)` for upper bounds.
    pub fn deficit(&self) -> f64 {
        match self.sense.unwrap_or(Sense::AtLeast) {
            Sense::AtLeast => (-self.min).max(0.0),
            Sense::AtMost => self.max.max(0.0),
        }
    }
}

/// Hat test fields centred at interior vertices, each normalized to unit mass.
///
/// A hat of radius `r` hops is `1 − hops/(r+1)` on its support; radius 0 gives
/// the nodal basis. Values are zeroed on the boundary and outside `support`
/// (when given), and a hat is dropped if its center is excluded.
pub fn hat_tests(domain: &Arc<MeshDomain>, radii: &[usize], support: Option<&[bool]>) -> Vec<ScalarField> {
    let n = domain.num_vertices();
    let allowed = |i: usize| !domain.is_boundary(i) && support.is_none_or(|s| s[i]);
    let mut tests = Vec::new();
    for &r in radii {
        for c in 0..n {
            if !allowed(c) {
                continue;
            }
            let mut hops = vec![usize::MAX; n];
            hops[c] = 0;
            let mut queue = VecDeque::from([c]);
            let mut values = vec![0.0; n];
            while let Some(v) = queue.pop_front() {
                if allowed(v) {
                    values[v] = 1.0 - hops[v] as f64 / (r + 1) as f64;
                }
                if hops[v] == r {
                    continue;
                }
                for &(j, _) in domain.neighbors(v) {
                    if hops[j] == usize::MAX {
                        hops[j] = hops[v] + 1;
                        queue.push_back(j);
                    }
                }
            }
            let mass: f64 = values.iter().zip(domain.measures()).map(|(v, m)| v * m).sum();
            values.iter_mut().for_each(|v| *v /= mass);
            tests.push(ScalarField::from_parts(domain.clone(), values));
        }
    }
    tests
}

/// Default family: nodal hats and radius-2 hats.
pub fn default_tests(domain: &Arc<MeshDomain>) -> Vec<ScalarField> {
    hat_tests(domain, &[0, 2], None)
}

pub(crate) fn check_tests(domain: &Arc<MeshDomain>, tests: &[ScalarField]) -> Result<()> {
    for (k, phi) in tests.iter().enumerate() {
        if !Arc::ptr_eq(phi.domain(), domain) && phi.domain().as_ref() != domain.as_ref() {
            return Err(Error::MapMismatch(format!("test {k} lives on another domain")));
        }
        for (i, &v) in phi.values().iter().enumerate() {
            if v < 0.0 || (domain.is_boundary(i) && v != 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "test {k} must be nonnegative and vanish on the boundary (vertex {i}: {v})"
                )));
            }
        }
    }
    Ok(())
}

/// `Σ μᵢ φᵢ gᵢ` for every test.
pub(crate) fn pair_all(g: &[f64], tests: &[ScalarField]) -> Vec<f64> {
    tests
        .iter()
        .map(|phi| {
            phi.values()
                .iter()
                .zip(g)
                .zip(phi.domain().measures())
                .map(|((p, v), m)| p * v * m)
                .sum()
        })
        .collect()
}

/// States of a trace on a uniform grid, prefixed by `u₀` when the first
/// recorded time is positive; returns the states, their times and the step.
pub(crate) fn uniform_series(trace: &FlowTrace) -> Result<(Vec<&MapState>, Vec<f64>, f64)> {
    let mut states: Vec<&MapState> = Vec::with_capacity(trace.len() + 1);
    let mut times = Vec::with_capacity(trace.len() + 1);
    if trace.times.first().is_some_and(|&t| t > 0.0) {
        states.push(&trace.initial);
        times.push(0.0);
    }
    states.extend(trace.states.iter());
    times.extend(trace.times.iter().copied());
    if times.len() < 2 {
        return Err(Error::InvalidParameter("need at least two times".into()));
    }
    let s = times[1] - times[0];
    if times.windows(2).any(|w| ((w[1] - w[0]) - s).abs() > 1e-9 * s) {
        return Err(Error::InvalidParameter("time grid is not uniform".into()));
    }
    Ok((states, times, s))
}
