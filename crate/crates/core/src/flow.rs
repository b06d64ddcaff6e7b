//! Resolvent scheme for the energy gradient flow.
//!
//! `J_h(u₀)` minimizes `½E[u] + D²(u, u₀)/(2h)` over maps agreeing with `u₀`
//! on the pinned boundary; the flow is the limit of `J_{t/m}^m`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::MapState;
use crate::target::barycenter::barycenter_unchecked;
use crate::target::Point;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Stop once the largest vertex move in a sweep is below this.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Tolerance passed to iterative barycenter solvers.
    pub barycenter_tol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            tol: 1e-10,
            max_sweeps: 200_000,
            barycenter_tol: 1e-13,
        }
    }
}

/// Diagnostics of one resolvent solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub h: f64,
    pub sweeps: usize,
    pub displacement: f64,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct Resolvent {
    pub state: MapState,
    pub record: StepRecord,
}

/// `½E[u] + D²(u, u₀)/(2h)`.
pub fn resolvent_objective(u: &MapState, u0: &MapState, h: f64) -> Result<f64> {
    Ok(0.5 * u.total_energy() + u.l2_distance_squared(u0)? / (2.0 * h))
}

/// One implicit Euler step by Gauss–Seidel sweeps in ascending vertex order:
/// each free vertex moves to the barycenter of its neighbors (weights `w_ij`)
/// and of `u₀ᵢ` (weight `μᵢ/h`).
pub fn resolvent(u0: &MapState, h: f64, opts: &SweepOptions) -> Result<Resolvent> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("step size h = {h} must be positive")));
    }
    let (state, sweeps, displacement) = sweep(u0, Some((u0, h)), opts)?;
    let objective = resolvent_objective(&state, u0, h)?;
    Ok(Resolvent {
        state,
        record: StepRecord { h, sweeps, displacement, objective },
    })
}

/// Discrete harmonic map with the boundary values of `u`, by the same sweeps
/// without the proximal term. Needs a pinned boundary.
pub fn harmonic_map(u: &MapState, opts: &SweepOptions) -> Result<MapState> {
    if u.psi().is_empty() {
        return Err(Error::Precondition("harmonic map needs pinned boundary values".into()));
    }
    Ok(sweep(u, None, opts)?.0)
}

fn sweep(start: &MapState, anchor: Option<(&MapState, f64)>, opts: &SweepOptions) -> Result<(MapState, usize, f64)> {
    let domain = start.domain().clone();
    let space = start.space().clone();
    let mut u = start.clone();
    let free: Vec<usize> = (0..domain.num_vertices()).filter(|&i| u.is_free(i)).collect();
    if free.is_empty() {
        return Ok((u, 0, 0.0));
    }
    let mut displacement = f64::INFINITY;
    let mut weights: Vec<f64> = Vec::new();
    for sweep in 1..=opts.max_sweeps {
        displacement = 0.0;
        for &i in &free {
            weights.clear();
            let mut points: Vec<&Point> = Vec::with_capacity(domain.neighbors(i).len() + 1);
            for &(j, w) in domain.neighbors(i) {
                points.push(u.value(j));
                weights.push(w);
            }
            if let Some((u0, h)) = anchor {
                points.push(u0.value(i));
                weights.push(domain.measure(i) / h);
            }
            let next = barycenter_unchecked(&space, &points, &weights, opts.barycenter_tol)?;
            let next = space.canonicalize(&next)?;
            displacement = displacement.max(space.dist(u.value(i), &next));
            u.set_value(i, next);
        }
        if displacement < opts.tol {
            return Ok((u, sweep, displacement));
        }
    }
    Err(Error::SweepCap {
        last: Box::new(u),
        displacement,
        max_sweeps: opts.max_sweeps,
    })
}

/// `J_{t/m}` applied `m` times. Errors carry the failing step (1-based).
pub fn crandall_liggett(u0: &MapState, t: f64, m: usize, opts: &SweepOptions) -> Result<MapState> {
    Ok(crandall_liggett_steps(u0, t, m, opts)?.0)
}

fn crandall_liggett_steps(
    u0: &MapState,
    t: f64,
    m: usize,
    opts: &SweepOptions,
) -> Result<(MapState, Vec<StepRecord>)> {
    if !(t > 0.0 && t.is_finite()) || m == 0 {
        return Err(Error::InvalidParameter(format!("need t > 0 and m >= 1 (got {t}, {m})")));
    }
    let h = t / m as f64;
    let mut u = u0.clone();
    let mut records = Vec::with_capacity(m);
    for step in 1..=m {
        let r = resolvent(&u, h, opts).map_err(|e| Error::Step { step, source: Box::new(e) })?;
        u = r.state;
        records.push(r.record);
    }
    Ok((u, records))
}

/// Number of resolvent steps per time interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSchedule {
    /// Fixed `m` for every interval.
    PerInterval(usize),
    /// Smallest `m` with `Δt/m ≤ h_max`.
    MaxStep(f64),
}

impl StepSchedule {
    pub fn steps_for(&self, dt: f64) -> usize {
        match *self {
            StepSchedule::PerInterval(m) => m.max(1),
            StepSchedule::MaxStep(h) => ((dt / h) * (1.0 - 1e-12)).ceil().max(1.0) as usize,
        }
    }
}

/// Flow sampled on a time grid.
#[derive(Debug, Clone)]
pub struct FlowTrace {
    pub times: Vec<f64>,
    pub states: Vec<MapState>,
    pub energies: Vec<f64>,
    /// Resolvent diagnostics for the interval ending at each recorded time.
    pub steps: Vec<Vec<StepRecord>>,
    pub initial: MapState,
    /// `E[uᵗ] ≤ E[u₀]` at each recorded time.
    pub energy_admissible: Vec<bool>,
}

impl FlowTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest relative energy increase between consecutive records
    /// (including `u₀` before the first), `(E[uᵗ] − E[uˢ]) / (1 + E[uˢ])`.
    pub fn max_energy_increase(&self) -> f64 {
        let mut prev = self.initial.total_energy();
        let mut worst = f64::NEG_INFINITY;
        for &e in &self.energies {
            worst = worst.max((e - prev) / (1.0 + prev));
            prev = e;
        }
        worst
    }

    /// Common time step when the grid is uniform (within `1e-9` relative).
    pub fn uniform_step(&self) -> Option<f64> {
        if self.times.len() < 2 {
            return None;
        }
        let s = self.times[1] - self.times[0];
        self.times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - s).abs() <= 1e-9 * s)
            .then_some(s)
    }
}

/// Chains resolvent steps across `times` (strictly increasing, `times[0] ≥ 0`).
pub fn flow_run(u0: &MapState, times: &[f64], schedule: StepSchedule, opts: &SweepOptions) -> Result<FlowTrace> {
    if times.is_empty() {
        return Err(Error::InvalidParameter("time grid is empty".into()));
    }
    if times[0] < 0.0 || times.windows(2).any(|w| w[1] <= w[0]) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter("time grid must be finite, nonnegative and strictly increasing".into()));
    }
    let e0 = u0.total_energy();
    let mut trace = FlowTrace {
        times: times.to_vec(),
        states: Vec::with_capacity(times.len()),
        energies: Vec::with_capacity(times.len()),
        steps: Vec::with_capacity(times.len()),
        initial: u0.clone(),
        energy_admissible: Vec::with_capacity(times.len()),
    };
    let mut u = u0.clone();
    let mut prev_t = 0.0;
    for &t in times {
        let records = if t > prev_t {
            let (next, records) = crandall_liggett_steps(&u, t - prev_t, schedule.steps_for(t - prev_t), opts)?;
            u = next;
            records
        } else {
            Vec::new()
        };
        let e = u.total_energy();
        trace.energy_admissible.push(e <= e0 * (1.0 + 1e-12) + 1e-300);
        trace.energies.push(e);
        trace.steps.push(records);
        trace.states.push(u.clone());
        prev_t = t;
    }
    Ok(trace)
}

/// Discrete EVI residual over the window `[times[t_index − lag], times[t_index]]`:
/// `s(E[v] − E[uᵗ]) − (D²(v, uᵗ) − D²(v, u^{t−s}))`, nonnegative for exact resolvents.
pub fn evi_residual(trace: &FlowTrace, v: &MapState, t_index: usize, lag: usize) -> Result<f64> {
    if lag == 0 || t_index < lag || t_index >= trace.len() {
        return Err(Error::InvalidParameter(format!(
            "evi window ({t_index}, lag {lag}) outside a trace of length {}",
            trace.len()
        )));
    }
    let ut = &trace.states[t_index];
    let us = &trace.states[t_index - lag];
    ut.compatible(v)?;
    if !ut.same_boundary(v) {
        return Err(Error::MapMismatch("comparator has different boundary values".into()));
    }
    let s = trace.times[t_index] - trace.times[t_index - lag];
    Ok(s * (v.total_energy() - trace.energies[t_index]) - (v.l2_distance_squared(ut)? - v.l2_distance_squared(us)?))
}

/// Same inequality for a window starting at `u₀` (time 0) and ending at `times[t_index]`.
pub fn evi_residual_from_start(trace: &FlowTrace, v: &MapState, t_index: usize) -> Result<f64> {
    let ut = &trace.states[t_index];
    ut.compatible(v)?;
    if !ut.same_boundary(v) {
        return Err(Error::MapMismatch("comparator has different boundary values".into()));
    }
    let s = trace.times[t_index];
    Ok(s * (v.total_energy() - trace.energies[t_index])
        - (v.l2_distance_squared(ut)? - v.l2_distance_squared(&trace.initial)?))
}

/// `D(F_{t+s}u₀, F_t F_s u₀)` with the first flow using `m' = round(m(t+s)/t)` steps.
pub fn semigroup_residual(u0: &MapState, t: f64, s: f64, m: usize, opts: &SweepOptions) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::InvalidParameter(format!("s = {s} must be nonnegative")));
    }
    let m_total = ((m as f64) * (t + s) / t).round().max(1.0) as usize;
    let direct = crandall_liggett(u0, t + s, m_total, opts)?;
    let split = if s == 0.0 {
        crandall_liggett(u0, t, m, opts)?
    } else {
        crandall_liggett(&crandall_liggett(u0, s, m, opts)?, t, m, opts)?
    };
    direct.l2_distance(&split)
}

/// Largest `d(uᵢᵗ, P₀) − M₀` over the trace. The initial map must lie in the
/// ball, up to a relative rounding slack of `1e-12`.
pub fn confinement_check(trace: &FlowTrace, p0: &Point, m0: f64) -> Result<f64> {
    let init = trace.initial.distance_field(p0)?;
    if init.max() > m0 * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "initial map leaves the ball: max distance {} > M0 = {m0}",
            init.max()
        )));
    }
    let mut worst = init.max() - m0;
    for u in &trace.states {
        worst = worst.max(u.distance_field(p0)?.max() - m0);
    }
    Ok(worst)
}
