//! Scenario execution and artifact emission.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use hmflow_core::flow::{
    confinement_check, evi_residual, evi_residual_from_start, flow_run, resolvent, resolvent_objective, FlowTrace,
    StepSchedule, SweepOptions,
};
use hmflow_core::mesh::{MapState, ScalarField};
use hmflow_core::regularity::{
    bochner_residuals, default_tests, distance_subsolution_residuals, hat_tests, hj_checks, hj_flow,
    hj_limit_deviation, lip_report, lip_x, mean_value_residual, r_density,
    subsolution_residuals, CheckReport, HjField, HjParams, Sense,
};
use hmflow_core::target::Point;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{parse_config, ConfigError, ScenarioConfig};
use crate::encode::{decode_point, encode_point, real};
use crate::maps::{initial_state, rng_for, stream};
use crate::oracle::{dense_resolvent, max_error};
use crate::verify::phi_margin;

pub const TOOL: &str = "hmflow";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration error:\n{0}")]
    Config(#[from] ConfigError),
    #[error("scenario `{scenario}`: {source}")]
    Core {
        scenario: String,
        #[source]
        source: hmflow_core::Error,
    },
    #[error("writing {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    /// 3 for bad input, 4 for numerical non-convergence, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 3,
            RunError::Core { source, .. } if source.is_numerical() => 4,
            RunError::Core { .. } => 3,
            RunError::Io { .. } => 1,
        }
    }
}

/// One CSV or JSON file of a run, held in memory until written.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn sha256(&self) -> String {
        hex::encode(Sha256::digest(&self.bytes))
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub reports: Vec<CheckReport>,
    pub artifacts: Vec<Artifact>,
    pub trace: FlowTrace,
}

impl RunOutcome {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_pass() { 0 } else { 2 }
    }

    pub fn report(&self, check: &str) -> Option<&CheckReport> {
        self.reports.iter().find(|r| r.check == check)
    }
}

pub fn sweep_options(cfg: &ScenarioConfig) -> SweepOptions {
    SweepOptions { tol: cfg.flow.tol, max_sweeps: cfg.flow.max_sweeps, ..SweepOptions::default() }
}

pub fn schedule(cfg: &ScenarioConfig) -> StepSchedule {
    match (cfg.flow.h_max, cfg.flow.m) {
        (Some(h), _) => StepSchedule::MaxStep(h),
        (None, m) => StepSchedule::PerInterval(m.unwrap_or(1)),
    }
}

/// Random maps sharing the boundary values of `u0`.
pub fn comparators(cfg: &ScenarioConfig, u0: &MapState, count: usize) -> hmflow_core::Result<Vec<MapState>> {
    let mut rng = rng_for(cfg.seed, stream::COMPARATORS);
    let (d, space) = (u0.domain(), u0.space());
    (0..count)
        .map(|_| {
            let values = (0..d.num_vertices()).map(|_| space.sample(&mut rng, 1.0)).collect();
            MapState::new(d.clone(), space.clone(), values)?.with_boundary(|i| u0.value(i).clone())
        })
        .collect()
}

struct Ctx<'a> {
    cfg: &'a ScenarioConfig,
    opts: SweepOptions,
    reports: Vec<CheckReport>,
}

impl Ctx<'_> {
    fn push(&mut self, report: CheckReport) {
        let mut report = report.with_context(&self.cfg.name, self.cfg.seed);
        let base = report.check.split('(').next().unwrap_or("").to_string();
        if let Some(&t) = self.cfg.checks.tolerances.get(&base) {
            report = report.with_tolerance(t);
        }
        self.reports.push(report);
    }
}

fn scenario_err(cfg: &ScenarioConfig) -> impl Fn(hmflow_core::Error) -> RunError + '_ {
    move |source| RunError::Core { scenario: cfg.name.clone(), source }
}

fn p0(cfg: &ScenarioConfig, u0: &MapState) -> hmflow_core::Result<Point> {
    let text = cfg.constants.p0.as_deref().ok_or_else(|| hmflow_core::Error::Precondition("P0 is required".into()))?;
    decode_point(u0.space(), text).map_err(hmflow_core::Error::InvalidParameter)
}

fn m0(cfg: &ScenarioConfig) -> hmflow_core::Result<f64> {
    cfg.constants.m0.ok_or_else(|| hmflow_core::Error::Precondition("M0 is required".into()))
}

fn field(values: Vec<f64>, like: &ScalarField) -> ScalarField {
    ScalarField::new(like.domain().clone(), values).expect("finite field values")
}

/// Initial state followed by every recorded state, with their times.
fn series(trace: &FlowTrace) -> (Vec<&MapState>, Vec<f64>) {
    let mut states = vec![&trace.initial];
    let mut times = vec![0.0];
    if trace.times[0] == 0.0 {
        states.clear();
        times.clear();
    }
    states.extend(trace.states.iter());
    times.extend(trace.times.iter().copied());
    (states, times)
}

fn hj_params(cfg: &ScenarioConfig, eps: f64, p: u32) -> hmflow_core::Result<HjParams> {
    Ok(HjParams { eps, p, k: cfg.constants.k, m0: m0(cfg)?, t_horizon: cfg.t_horizon(), r: cfg.r() })
}

/// Keeps the weak-form rows (one per time after the first, `per` tests each)
/// at times `≥ t*`; the subsolution-type inequalities hold on `(t*, T)`.
fn from_t_star(rep: CheckReport, times: &[f64], per: usize, t_star: Option<f64>) -> CheckReport {
    let Some(t0) = t_star else { return rep };
    let keep: Vec<f64> = rep
        .residuals
        .chunks(per.max(1))
        .zip(&times[1..])
        .filter(|(_, &t)| t >= t0 * (1.0 - 1e-12))
        .flat_map(|(c, _)| c.iter().copied())
        .collect();
    CheckReport::new(&rep.check, &rep.anchor, rep.sense.unwrap_or(Sense::AtLeast), rep.tolerance, keep)
}

fn label(check: &str, eps: f64, p: u32) -> String {
    format!("{check}(eps={eps:e},p={p})")
}

fn evaluate(
    ctx: &mut Ctx,
    trace: &FlowTrace,
    comps: &[MapState],
    twin: Option<&FlowTrace>,
    hj_out: &mut Option<HjField>,
) -> hmflow_core::Result<()> {
    let cfg = ctx.cfg;
    let u0 = &trace.initial;
    let domain = u0.domain().clone();
    let (states, times) = series(trace);
    let t_star = cfg.constants.t_star;

    for check in &cfg.checks.run {
        match check.as_str() {
            "energy_monotone" => {
                let mut prev = u0.total_energy();
                let res = trace
                    .energies
                    .iter()
                    .map(|&e| {
                        let r = (e - prev) / (1.0 + prev);
                        prev = e;
                        r
                    })
                    .collect();
                ctx.push(CheckReport::at_most("energy_monotone", "energy is non-increasing along the flow", 1e-10, res));
            }
            "evi" => {
                let mut res = Vec::new();
                for v in comps {
                    let scale = 1.0 + v.total_energy();
                    res.push(evi_residual_from_start(trace, v, 0)? / scale);
                    for k in 1..trace.len() {
                        res.push(evi_residual(trace, v, k, 1)? / scale);
                    }
                }
                ctx.push(CheckReport::at_least(
                    "evi",
                    "evolution variational inequality against a comparator map",
                    1e-8,
                    res,
                ));
            }
            "resolvent_minimality" => {
                let mut rng = rng_for(cfg.seed, stream::PERTURBATIONS);
                let size = 10.0 * ctx.opts.tol;
                let space = u0.space();
                let mut res = Vec::new();
                for (k, input) in states.iter().take(states.len().saturating_sub(1).max(1)).take(8).enumerate() {
                    let h = trace.steps.get(k).and_then(|s| s.first()).map_or(cfg.flow.t_end, |r| r.h);
                    let out = resolvent(input, h, &ctx.opts)?.state;
                    let best = resolvent_objective(&out, input, h)?;
                    for _ in 0..64 {
                        let target = space.sample(&mut rng, 1.0);
                        let pert = MapState::from_fn(domain.clone(), space.clone(), |i, _| {
                            if !out.is_free(i) {
                                return out.value(i).clone();
                            }
                            let dist = space.distance(out.value(i), &target).unwrap_or(0.0);
                            if dist == 0.0 {
                                return out.value(i).clone();
                            }
                            space.geodesic_point(out.value(i), &target, (size / dist).min(1.0)).unwrap_or_else(|_| out.value(i).clone())
                        })?;
                        res.push((resolvent_objective(&pert, input, h)? - best) / (1.0 + best));
                    }
                }
                ctx.push(CheckReport::at_least(
                    "resolvent_minimality",
                    "resolvent output minimizes the proximal objective",
                    1e-13,
                    res,
                ));
            }
            "contraction" => {
                let twin = twin.expect("comparator trace");
                let mut prev = u0.l2_distance(&twin.initial)?;
                let mut res = Vec::new();
                for (a, b) in trace.states.iter().zip(&twin.states) {
                    let d = a.l2_distance(b)?;
                    res.push(d - prev);
                    prev = d;
                }
                ctx.push(CheckReport::at_most(
                    "contraction",
                    "L2 distance between two flows with common boundary is non-increasing",
                    1e-9,
                    res,
                ));
            }
            "confinement" => {
                let excess = confinement_check(trace, &p0(cfg, u0)?, m0(cfg)?)?;
                ctx.push(CheckReport::at_most(
                    "confinement",
                    "flow stays in a closed ball containing the initial data",
                    1e-9,
                    vec![excess],
                ));
            }
            "euclidean_oracle" => {
                let mut res = Vec::new();
                for (k, input) in states.iter().take(states.len().saturating_sub(1).max(1)).take(8).enumerate() {
                    let h = trace.steps.get(k).and_then(|s| s.first()).map_or(cfg.flow.t_end, |r| r.h);
                    let out = resolvent(input, h, &ctx.opts)?.state;
                    res.push(max_error(&out, &dense_resolvent(input, h)?));
                }
                ctx.push(CheckReport::at_most(
                    "euclidean_oracle",
                    "resolvent of a Euclidean map equals the dense linear solve",
                    1e-8,
                    res,
                ));
            }
            "phi_interpolation" => {
                let mut rng = rng_for(cfg.seed, stream::SAMPLES);
                let res = (0..cfg.checks.samples)
                    .map(|_| phi_margin(&domain, u0.space(), &mut rng, 1.0))
                    .collect::<hmflow_core::Result<Vec<_>>>()?;
                ctx.push(CheckReport::at_least(
                    "phi_interpolation",
                    "energy comparison for geodesic interpolation with weight phi",
                    1e-9,
                    res,
                ));
            }
            "r_bound" => {
                let twin = twin.expect("comparator trace");
                let (vs, _) = series(twin);
                let mut res = Vec::new();
                for (u, v) in states.iter().zip(&vs) {
                    let r = r_density(u, v)?;
                    let (eu, ev) = (u.energy().1, v.energy().1);
                    let worst = (0..r.values().len()).map(|i| 2.0 * (eu[i] + ev[i]) - r[i]).fold(f64::INFINITY, f64::min);
                    res.push(worst);
                }
                ctx.push(CheckReport::at_least(
                    "r_bound",
                    "R is bounded by twice the sum of the energy densities",
                    1e-12,
                    res,
                ));
            }
            "subsolution" => {
                let twin = twin.expect("comparator trace");
                let tests = default_tests(&domain);
                let rep = subsolution_residuals(trace, twin, &tests)?;
                let s = cfg.flow.uniform_step().expect("validated uniform grid");
                ctx.push(from_t_star(rep, &times, tests.len(), t_star).with_tolerance(s));
            }
            "distance_subsolution" => {
                let tests = default_tests(&domain);
                let (sq, lin) = distance_subsolution_residuals(trace, &p0(cfg, u0)?, &tests)?;
                ctx.push(from_t_star(sq, &times, tests.len(), t_star));
                ctx.push(from_t_star(lin, &times, tests.len(), t_star));
            }
            "mean_value" => {
                if domain.has_boundary() {
                    return Err(hmflow_core::Error::Precondition(
                        "the mean value check needs a domain without boundary".into(),
                    ));
                }
                let s = cfg.flow.uniform_step().expect("validated uniform grid");
                let p = p0(cfg, u0)?;
                let mut g = Vec::with_capacity(states.len());
                let mut f = Vec::with_capacity(states.len());
                for u in &states {
                    let d = u.distance_field(&p)?;
                    g.push(field(d.values().iter().map(|x| -x * x).collect(), &d));
                    let e = u.energy().1;
                    f.push(field(e.values().iter().map(|x| -2.0 * x).collect(), &e));
                }
                let t0 = states.len() - 1;
                let lag = 1usize << (usize::BITS - 1 - t0.min(16).leading_zeros());
                let substeps = (lag / 2).max(1);
                let res = (0..domain.num_vertices())
                    .map(|x0| mean_value_residual(&g, &f, s, x0, t0, lag, substeps))
                    .collect::<hmflow_core::Result<Vec<_>>>()?;
                ctx.push(CheckReport::at_most(
                    "mean_value",
                    "mean value inequality for the squared distance to a point",
                    8.0 * s,
                    res,
                ));
            }
            "time_lipschitz" => {
                let t_star = t_star.ok_or_else(|| hmflow_core::Error::Precondition("t_star is required".into()))?;
                let delta = domain.spacing();
                let lip = lip_report(trace, t_star, &[delta, 2.0 * delta])?;
                let s_max = lip.temporal.iter().map(|r| r.s).fold(0.0, f64::max);
                let s_min = lip.temporal.iter().map(|r| r.s).fold(f64::INFINITY, f64::min);
                let floor = 1e-6 * lip.temporal_constant;
                ctx.push(CheckReport::at_most(
                    "time_lipschitz",
                    "flow is Lipschitz in time after t*",
                    2.0,
                    vec![lip.dyadic_spread(s_min, s_max, floor)],
                ));
            }
            "hj_supersolution" | "hj_gradient_bound" | "hj_range" => {
                for &p in &cfg.constants.p {
                    for &eps in &cfg.constants.eps {
                        let hj = hj_flow(trace, hj_params(cfg, eps, p)?)?;
                        match check.as_str() {
                            "hj_supersolution" => {
                                let support = hj.test_support();
                                let tests = hat_tests(&domain, &[0, 1], Some(&support));
                                let mut rep = hj_checks(&hj, trace, &tests)?.supersolution;
                                rep.check = label("hj_supersolution", eps, p);
                                ctx.push(rep);
                            }
                            "hj_gradient_bound" => {
                                if let Some(mut rep) = hj_checks(&hj, trace, &[])?.gradient_bound {
                                    rep.check = label("hj_gradient_bound", eps, p);
                                    ctx.push(rep);
                                }
                            }
                            _ => {
                                let two_m0 = 2.0 * hj.params.m0;
                                let mut res = vec![hj.radius - hj.max_minimizer_distance];
                                for f in &hj.values {
                                    for i in (0..f.values().len()).filter(|&i| hj.admissible[i]) {
                                        res.push((f[i] + two_m0).min(-f[i]));
                                    }
                                }
                                ctx.push(CheckReport::at_least(
                                    &label("hj_range", eps, p),
                                    "range and minimizer localization of the inf-convolution",
                                    1e-12,
                                    res,
                                ));
                            }
                        }
                        if hj_out.is_none() {
                            *hj_out = Some(hj);
                        }
                    }
                }
            }
            "hj_limit" => {
                for &p in &cfg.constants.p {
                    let mut eps = cfg.constants.eps.clone();
                    eps.sort_by(|a, b| b.total_cmp(a));
                    let dev = hj_limit_deviation(trace, hj_params(cfg, eps[0], p)?, &eps)?;
                    ctx.push(CheckReport::at_most(
                        &format!("hj_limit(p={p})"),
                        "inf-convolution over eps tends to minus the q-th power of lip over q",
                        dev[0].1,
                        dev.iter().map(|d| d.1).collect(),
                    ));
                }
            }
            "bochner" => {
                let tests = default_tests(&domain);
                let rep = bochner_residuals(trace, cfg.constants.k, &tests)?;
                ctx.push(from_t_star(rep, &times, tests.len(), t_star));
            }
            other => unreachable!("unknown check `{other}` passed validation"),
        }
    }
    Ok(())
}

fn trace_csv(trace: &FlowTrace) -> Artifact {
    let (states, times) = series(trace);
    let mut out = String::from("t,vertex_id,point,energy_density\n");
    for (u, t) in states.iter().zip(&times) {
        let e = u.energy().1;
        for (i, p) in u.values().iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{}", real(*t), i, encode_point(p), real(e[i]));
        }
    }
    Artifact { name: "trace.csv".into(), bytes: out.into_bytes() }
}

fn field_csv(name: &str, times: &[f64], fields: &[ScalarField]) -> Artifact {
    let mut out = String::from("t,vertex_id,value\n");
    for (t, f) in times.iter().zip(fields) {
        for (i, v) in f.values().iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", real(*t), i, real(*v));
        }
    }
    Artifact { name: name.into(), bytes: out.into_bytes() }
}

const TWIN_CHECKS: [&str; 3] = ["contraction", "subsolution", "r_bound"];

/// Runs the flow and every requested check, keeping artifacts in memory.
/// On error, the artifacts produced so far are returned with it.
pub fn execute(cfg: &ScenarioConfig) -> Result<RunOutcome, (RunError, Vec<Artifact>)> {
    let err = scenario_err(cfg);
    let opts = sweep_options(cfg);
    let u0 = initial_state(cfg).map_err(|e| (err(e), Vec::new()))?;
    let trace = flow_run(&u0, &cfg.flow.time_grid(), schedule(cfg), &opts).map_err(|e| (err(e), Vec::new()))?;
    let mut artifacts = vec![trace_csv(&trace)];

    let (states, times) = series(&trace);
    let lips: Vec<ScalarField> = states.iter().map(|u| lip_x(u)).collect();
    artifacts.push(field_csv("lip.csv", &times, &lips));

    let wants_twin = TWIN_CHECKS.iter().any(|c| cfg.wants(c));
    let count = if cfg.wants("evi") { cfg.checks.comparators.max(1) } else { 1 };
    let stage = || -> hmflow_core::Result<(Vec<MapState>, Option<FlowTrace>)> {
        let comps = if wants_twin || cfg.wants("evi") { comparators(cfg, &u0, count)? } else { Vec::new() };
        let twin = if wants_twin { Some(flow_run(&comps[0], &cfg.flow.time_grid(), schedule(cfg), &opts)?) } else { None };
        Ok((comps, twin))
    };
    let (comps, twin) = stage().map_err(|e| (err(e), artifacts.clone()))?;
    if let Some(tw) = &twin {
        let (vs, _) = series(tw);
        let w: Vec<ScalarField> = states.iter().zip(&vs).map(|(u, v)| u.pointwise_distance_squared(v)).collect::<hmflow_core::Result<_>>().map_err(|e| (err(e), artifacts.clone()))?;
        let r: Vec<ScalarField> = states.iter().zip(&vs).map(|(u, v)| r_density(u, v)).collect::<hmflow_core::Result<_>>().map_err(|e| (err(e), artifacts.clone()))?;
        artifacts.push(field_csv("w.csv", &times, &w));
        artifacts.push(field_csv("r.csv", &times, &r));
    }

    let mut ctx = Ctx { cfg, opts, reports: Vec::new() };
    let mut hj = None;
    let evi_comps = if cfg.wants("evi") { &comps[..] } else { &[] };
    evaluate(&mut ctx, &trace, evi_comps, twin.as_ref(), &mut hj).map_err(|e| (err(e), artifacts.clone()))?;
    if let Some(hj) = &hj {
        artifacts.push(field_csv("f_eps.csv", &hj.times, &hj.values));
    }
    let mut json = serde_json::to_string_pretty(&ctx.reports).expect("reports serialize");
    json.push('\n');
    artifacts.push(Artifact { name: "reports.json".into(), bytes: json.into_bytes() });
    Ok(RunOutcome { reports: ctx.reports, artifacts, trace })
}

#[derive(Serialize)]
struct FileEntry {
    name: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    scenario: String,
    seed: u64,
    config_sha256: String,
    status: &'static str,
    all_pass: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    files: Vec<FileEntry>,
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), RunError> {
    let path = dir.join(name);
    std::fs::write(&path, bytes).map_err(|source| RunError::Io { path, source })
}

/// Executes a scenario and writes its artifacts plus `manifest.json` to `out`.
/// Failed runs still write whatever was produced, marked `"status": "failed"`.
pub fn run_scenario(cfg: &ScenarioConfig, out: &Path) -> Result<RunOutcome, RunError> {
    std::fs::create_dir_all(out).map_err(|source| RunError::Io { path: out.to_path_buf(), source })?;
    let result = execute(cfg);
    let (artifacts, error) = match &result {
        Ok(o) => (o.artifacts.clone(), None),
        Err((e, partial)) => (partial.clone(), Some(e.to_string())),
    };
    for a in &artifacts {
        write(out, &a.name, &a.bytes)?;
    }
    let manifest = Manifest {
        tool: TOOL,
        version: env!("CARGO_PKG_VERSION"),
        scenario: cfg.name.clone(),
        seed: cfg.seed,
        config_sha256: hex::encode(Sha256::digest(cfg.to_toml().as_bytes())),
        status: if error.is_none() { "complete" } else { "failed" },
        all_pass: result.as_ref().ok().map(|o| o.all_pass()),
        error,
        files: artifacts.iter().map(|a| FileEntry { name: a.name.clone(), sha256: a.sha256() }).collect(),
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    write(out, "manifest.json", json.as_bytes())?;
    result.map_err(|(e, _)| e)
}

/// Parses a config file and runs it; the output directory defaults to the
/// config's `output` entry, then to `runs/<name>`.
pub fn run_path(config: &Path, out: Option<&Path>) -> Result<RunOutcome, RunError> {
    let cfg = parse_config(config)?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("runs").join(&cfg.name));
    run_scenario(&cfg, &dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config_str;

    const SMOKE: &str = r#"
name = "smoke"
seed = 1
[domain]
kind = "interval-dirichlet"
n = 3
length = 2.0
[target]
kind = "euclidean"
dim = 1
[initial]
values = ["0", "1", "0"]
[flow]
t_end = 1.0
m = 1
tol = 1e-14
[checks]
run = ["energy_monotone"]
"#;

    fn center(o: &RunOutcome) -> f64 {
        match o.trace.states.last().unwrap().value(1) {
            Point::Euclidean(v) => v[0],
            _ => unreachable!(),
        }
    }

    #[test]
    fn smoke_closed_forms() {
        let cfg = parse_config_str(SMOKE).unwrap();
        let o = execute(&cfg).map_err(|e| e.0).unwrap();
        assert!((center(&o) - 1.0 / 3.0).abs() < 1e-12);
        let rep = o.report("energy_monotone").unwrap();
        assert!(rep.pass && rep.min < 0.0);
        let cfg = parse_config_str(&SMOKE.replace("\nm = 1", "\nm = 2")).unwrap();
        assert!((center(&execute(&cfg).map_err(|e| e.0).unwrap()) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn trace_csv_layout() {
        let cfg = parse_config_str(SMOKE).unwrap();
        let o = execute(&cfg).map_err(|e| e.0).unwrap();
        let text = String::from_utf8(o.artifacts[0].bytes.clone()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,vertex_id,point,energy_density");
        assert_eq!(lines.len(), 1 + 2 * 3);
        assert_eq!(lines[2], format!("{},1,{},{}", real(0.0), real(1.0), real(1.0)));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn failures_are_marked_in_the_manifest() {
        let cfg = parse_config_str(&SMOKE.replace("tol = 1e-14", "tol = 1e-14\nmax_sweeps = 1")).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let err = run_scenario(&cfg, dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 4);
        let manifest: serde_json::Value =
            serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["status"], "failed");
        assert!(manifest["error"].as_str().unwrap().contains("smoke"));
    }
}
