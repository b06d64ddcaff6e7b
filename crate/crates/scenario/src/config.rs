//! Scenario configuration: TOML schema, parsing and validation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use hmflow_core::mesh::{DomainKind, MeshDomain};
use hmflow_core::regularity::hj_constants;
use hmflow_core::target::{MetricTree, TargetSpace};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::encode::decode_point;
use crate::maps::{expr_is_valid, preset_supported, PRESETS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub domain: DomainSpec,
    pub target: TargetSpec,
    pub initial: MapSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<MapSpec>,
    pub flow: FlowSpec,
    #[serde(default)]
    pub checks: ChecksSpec,
    #[serde(default)]
    pub constants: Constants,
    /// Largest admissible ε, derived from `(K, T, R, M0)` during validation.
    #[serde(skip)]
    pub eps0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub n: usize,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TargetSpec {
    Euclidean {
        dim: usize,
    },
    Tripod {
        leg: f64,
    },
    Tree {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        vertices: Option<Vec<usize>>,
        edges: Vec<(usize, usize, f64)>,
    },
    Hyperbolic,
    Product {
        factors: Vec<TargetSpec>,
    },
}

/// Initial data or boundary values: exactly one of `preset`, `expr`, `values`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// One expression per Euclidean component, over `x`, `y`, `L`, `pi` and `i`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<Vec<String>>,
    /// One encoded point per vertex.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
}

impl MapSpec {
    pub fn amplitude(&self) -> f64 {
        self.amplitude.unwrap_or(1.0)
    }

    pub fn mode(&self) -> u32 {
        self.mode.unwrap_or(1)
    }

    pub fn phase(&self) -> f64 {
        self.phase.unwrap_or(0.0)
    }

    pub fn slope(&self) -> f64 {
        self.slope.unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub t_end: f64,
    /// Uniform grid `t_end·k/steps`, `k = 1..=steps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Explicit recording times; overrides `steps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    /// Resolvent steps per recorded interval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Largest resolvent step; overrides `m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_max: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_sweeps")]
    pub max_sweeps: usize,
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_sweeps() -> usize {
    200_000
}

impl FlowSpec {
    pub fn time_grid(&self) -> Vec<f64> {
        match (&self.times, self.steps) {
            (Some(t), _) => t.clone(),
            (None, Some(k)) => (1..=k).map(|j| self.t_end * j as f64 / k as f64).collect(),
            (None, None) => vec![self.t_end],
        }
    }

    /// Common step of the grid (including `t = 0`), if uniform.
    pub fn uniform_step(&self) -> Option<f64> {
        let mut grid = vec![0.0];
        grid.extend(self.time_grid());
        let s = grid[1] - grid[0];
        grid.windows(2).all(|w| ((w[1] - w[0]) - s).abs() <= 1e-9 * s).then_some(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksSpec {
    #[serde(default)]
    pub run: Vec<String>,
    /// Random comparator maps for EVI and contraction-type checks.
    #[serde(default = "default_comparators")]
    pub comparators: usize,
    /// Random (u, v, φ) triples for the φ-interpolation check.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
}

fn default_comparators() -> usize {
    100
}

fn default_samples() -> usize {
    1000
}

impl Default for ChecksSpec {
    fn default() -> Self {
        ChecksSpec {
            run: Vec::new(),
            comparators: default_comparators(),
            samples: default_samples(),
            tolerances: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    /// Ricci lower bound `K ≤ 0`.
    #[serde(default)]
    pub k: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_star: Option<f64>,
    /// Horizon `T`; defaults to the end time of the flow.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_horizon: Option<f64>,
    /// Distance to the boundary entering ε₀; defaults to a quarter of the domain length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eps: Vec<f64>,
    #[serde(default = "default_p")]
    pub p: Vec<u32>,
}

fn default_p() -> Vec<u32> {
    vec![2]
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            k: 0.0,
            m0: None,
            p0: None,
            t_star: None,
            t_horizon: None,
            r: None,
            eps: Vec::new(),
            p: default_p(),
        }
    }
}

/// Checks a scenario may request.
pub const CHECKS: [&str; 17] = [
    "energy_monotone",
    "evi",
    "resolvent_minimality",
    "contraction",
    "confinement",
    "euclidean_oracle",
    "phi_interpolation",
    "r_bound",
    "subsolution",
    "distance_subsolution",
    "mean_value",
    "time_lipschitz",
    "hj_supersolution",
    "hj_gradient_bound",
    "hj_range",
    "hj_limit",
    "bochner",
];

/// Checks that pair a backward time difference with the trace step.
const NEEDS_UNIFORM: [&str; 8] = [
    "subsolution",
    "distance_subsolution",
    "mean_value",
    "time_lipschitz",
    "hj_supersolution",
    "hj_gradient_bound",
    "hj_range",
    "bochner",
];

const NEEDS_P0: [&str; 3] = ["confinement", "distance_subsolution", "mean_value"];
const NEEDS_HJ: [&str; 4] = ["hj_supersolution", "hj_gradient_bound", "hj_range", "hj_limit"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{} configuration error(s):\n{}", .0.len(), .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<FieldError>),
}

impl ConfigError {
    pub fn errors(&self) -> &[FieldError] {
        match self {
            ConfigError::Invalid(e) => e,
            _ => &[],
        }
    }
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config_str(&text)
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

struct Errors(Vec<FieldError>);

impl Errors {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(FieldError { path: path.into(), message: message.into() });
    }

    fn section<T: DeserializeOwned>(&mut self, table: &toml::Table, key: &str) -> Option<T> {
        let value = table.get(key)?;
        match value.clone().try_into::<T>() {
            Ok(v) => Some(v),
            Err(e) => {
                self.push(key, e.message().trim().to_string());
                None
            }
        }
    }

    fn required<T: DeserializeOwned>(&mut self, table: &toml::Table, key: &str) -> Option<T> {
        if !table.contains_key(key) {
            self.push(key, "missing");
            return None;
        }
        self.section(table, key)
    }
}

pub fn parse_config_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        ConfigError::Syntax { line, column, message: e.message().trim().to_string() }
    })?;

    let mut errs = Errors(Vec::new());
    const KEYS: [&str; 10] =
        ["name", "seed", "output", "domain", "target", "initial", "boundary", "flow", "checks", "constants"];
    for key in table.keys() {
        if !KEYS.contains(&key.as_str()) {
            errs.push(key.clone(), "unknown key");
        }
    }
    let name: Option<String> = errs.required(&table, "name");
    let seed: Option<u64> = errs.required(&table, "seed");
    let output: Option<PathBuf> = errs.section(&table, "output");
    let domain: Option<DomainSpec> = errs.required(&table, "domain");
    let target: Option<TargetSpec> = errs.required(&table, "target");
    let initial: Option<MapSpec> = errs.required(&table, "initial");
    let boundary: Option<MapSpec> = errs.section(&table, "boundary");
    let flow: Option<FlowSpec> = errs.required(&table, "flow");
    let checks: Option<ChecksSpec> = if table.contains_key("checks") {
        errs.section(&table, "checks")
    } else {
        Some(ChecksSpec::default())
    };
    let constants: Option<Constants> = if table.contains_key("constants") {
        errs.section(&table, "constants")
    } else {
        Some(Constants::default())
    };

    match (name, seed, domain, target, initial, flow, checks, constants) {
        (Some(name), Some(seed), Some(domain), Some(target), Some(initial), Some(flow), Some(checks), Some(constants)) => {
            let mut cfg = ScenarioConfig {
                name,
                seed,
                output,
                domain,
                target,
                initial,
                boundary,
                flow,
                checks,
                constants,
                eps0: None,
            };
            validate(&mut cfg, &mut errs);
            if errs.0.is_empty() {
                Ok(cfg)
            } else {
                Err(ConfigError::Invalid(errs.0))
            }
        }
        _ => Err(ConfigError::Invalid(errs.0)),
    }
}

impl ScenarioConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn build_domain(&self) -> hmflow_core::Result<Arc<MeshDomain>> {
        Ok(Arc::new(MeshDomain::build(self.domain.kind, self.domain.n, self.domain.length)?))
    }

    pub fn build_target(&self) -> hmflow_core::Result<Arc<TargetSpace>> {
        Ok(Arc::new(self.target.build()?))
    }

    pub fn r(&self) -> f64 {
        self.constants.r.unwrap_or(self.domain.length / 4.0)
    }

    pub fn t_horizon(&self) -> f64 {
        self.constants.t_horizon.unwrap_or(self.flow.t_end)
    }

    pub fn wants(&self, check: &str) -> bool {
        self.checks.run.iter().any(|c| c == check)
    }
}

impl TargetSpec {
    pub fn build(&self) -> hmflow_core::Result<TargetSpace> {
        match self {
            TargetSpec::Euclidean { dim } => TargetSpace::euclidean(*dim),
            TargetSpec::Tripod { leg } => TargetSpace::tripod(*leg),
            TargetSpec::Tree { vertices, edges } => {
                let ids = vertices.clone().unwrap_or_else(|| {
                    let mut ids: Vec<usize> = edges.iter().flat_map(|&(a, b, _)| [a, b]).collect();
                    ids.sort_unstable();
                    ids.dedup();
                    ids
                });
                Ok(TargetSpace::MetricTree(MetricTree::new(&ids, edges)?))
            }
            TargetSpec::Hyperbolic => Ok(TargetSpace::HyperbolicPlane),
            TargetSpec::Product { factors } => {
                TargetSpace::product(factors.iter().map(|f| f.build()).collect::<hmflow_core::Result<_>>()?)
            }
        }
    }
}

fn validate_map(path: &str, spec: &MapSpec, cfg: &ScenarioConfig, space: Option<&TargetSpace>, errs: &mut Errors) {
    let given = [spec.preset.is_some(), spec.expr.is_some(), spec.values.is_some()];
    if given.iter().filter(|&&g| g).count() != 1 {
        errs.push(path, "exactly one of `preset`, `expr` or `values` is required");
        return;
    }
    let Some(space) = space else { return };
    if let Some(p) = &spec.preset {
        if !PRESETS.contains(&p.as_str()) {
            errs.push(format!("{path}.preset"), format!("unknown preset `{p}` (known: {})", PRESETS.join(", ")));
        } else if let Err(m) = preset_supported(p, space, spec) {
            errs.push(format!("{path}.preset"), m);
        }
    }
    if let Some(point) = &spec.point {
        if let Err(m) = decode_point(space, point) {
            errs.push(format!("{path}.point"), m);
        }
    }
    if let Some(exprs) = &spec.expr {
        match space {
            TargetSpace::Euclidean { dim } => {
                if exprs.len() != *dim {
                    errs.push(format!("{path}.expr"), format!("need {dim} expressions, one per component"));
                }
                for (k, e) in exprs.iter().enumerate() {
                    if let Err(m) = expr_is_valid(e, cfg.domain.length) {
                        errs.push(format!("{path}.expr[{k}]"), m);
                    }
                }
            }
            _ => errs.push(format!("{path}.expr"), "expressions are only available for euclidean targets"),
        }
    }
    if let Some(values) = &spec.values {
        if let Ok(d) = cfg.build_domain() {
            if values.len() != d.num_vertices() {
                errs.push(format!("{path}.values"), format!("need {} values, found {}", d.num_vertices(), values.len()));
            }
        }
        for (k, v) in values.iter().enumerate() {
            if let Err(m) = decode_point(space, v) {
                errs.push(format!("{path}.values[{k}]"), m);
            }
        }
    }
}

fn validate(cfg: &mut ScenarioConfig, errs: &mut Errors) {
    if cfg.name.trim().is_empty() {
        errs.push("name", "must not be empty");
    }
    let domain = match cfg.build_domain() {
        Ok(d) => Some(d),
        Err(e) => {
            errs.push("domain", e.to_string());
            None
        }
    };
    let space = match cfg.target.build() {
        Ok(s) => Some(s),
        Err(e) => {
            let msg = e.to_string();
            errs.push("target", msg.strip_prefix("invalid target space: ").unwrap_or(&msg).to_string());
            None
        }
    };
    validate_map("initial", &cfg.initial, cfg, space.as_ref(), errs);
    if let Some(b) = &cfg.boundary {
        if domain.as_ref().is_some_and(|d| !d.has_boundary()) {
            errs.push("boundary", format!("domain {} has no boundary", cfg.domain.kind));
        }
        validate_map("boundary", b, cfg, space.as_ref(), errs);
    }

    let flow = &cfg.flow;
    if !(flow.t_end > 0.0 && flow.t_end.is_finite()) {
        errs.push("flow.t_end", "must be positive");
    }
    if flow.steps == Some(0) {
        errs.push("flow.steps", "must be at least 1");
    }
    if let Some(times) = &flow.times {
        if times.is_empty() || times[0] <= 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
            errs.push("flow.times", "time grid must be positive and strictly increasing");
        } else if (times[times.len() - 1] - flow.t_end).abs() > 1e-12 * flow.t_end {
            errs.push("flow.times", "last time must equal t_end");
        }
    }
    if flow.m == Some(0) {
        errs.push("flow.m", "must be at least 1");
    }
    if flow.m.is_some() && flow.h_max.is_some() {
        errs.push("flow", "give either `m` or `h_max`, not both");
    }
    if flow.h_max.is_some_and(|h| !(h > 0.0)) {
        errs.push("flow.h_max", "must be positive");
    }
    if !(flow.tol > 0.0) {
        errs.push("flow.tol", "must be positive");
    }
    if flow.max_sweeps == 0 {
        errs.push("flow.max_sweeps", "must be at least 1");
    }

    for (k, c) in cfg.checks.run.iter().enumerate() {
        if !CHECKS.contains(&c.as_str()) {
            errs.push(format!("checks.run[{k}]"), format!("unknown check `{c}`"));
        }
    }
    for (c, tol) in &cfg.checks.tolerances {
        if !CHECKS.contains(&c.as_str()) && c != "distance_squared_subsolution" {
            errs.push(format!("checks.tolerances.{c}"), "unknown check");
        }
        if !(*tol >= 0.0 && tol.is_finite()) {
            errs.push(format!("checks.tolerances.{c}"), "must be a finite nonnegative number");
        }
    }
    let uniform = flow.uniform_step().is_some();
    for c in NEEDS_UNIFORM {
        if cfg.wants(c) && !uniform {
            errs.push("flow.times", format!("check `{c}` needs a uniform time grid"));
        }
    }
    if cfg.wants("euclidean_oracle") && !matches!(cfg.target, TargetSpec::Euclidean { .. }) {
        errs.push("checks.run", "`euclidean_oracle` needs a euclidean target");
    }
    if cfg.wants("bochner") && domain.as_ref().is_some_and(|d| d.n() < 3) {
        errs.push("checks.run", "`bochner` needs at least 3 vertices per dimension");
    }

    let c = &cfg.constants;
    if !(c.k <= 0.0 && c.k.is_finite()) {
        errs.push("constants.k", "K must be a finite number <= 0");
    }
    if c.m0.is_some_and(|m| !(m > 0.0 && m.is_finite())) {
        errs.push("constants.m0", "M0 must be positive");
    }
    if let (Some(p0), Some(space)) = (&c.p0, &space) {
        if let Err(m) = decode_point(space, p0) {
            errs.push("constants.p0", m);
        }
    }
    for name in NEEDS_P0 {
        if cfg.wants(name) && c.p0.is_none() {
            errs.push("constants.p0", format!("check `{name}` needs a base point P0"));
        }
    }
    if cfg.wants("confinement") && c.m0.is_none() {
        errs.push("constants.m0", "check `confinement` needs a radius M0");
    }
    if let Some(t) = c.t_star {
        if !(t >= 0.0 && t <= flow.t_end) {
            errs.push("constants.t_star", format!("t* = {t} outside [0, t_end]"));
        }
    }
    if cfg.wants("time_lipschitz") && c.t_star.is_none() {
        errs.push("constants.t_star", "check `time_lipschitz` needs t_star");
    }
    if c.t_horizon.is_some_and(|t| !(t >= 0.0 && t.is_finite())) {
        errs.push("constants.t_horizon", "T must be nonnegative");
    }
    if c.r.is_some_and(|r| !(r > 0.0 && r.is_finite())) {
        errs.push("constants.r", "R must be positive");
    }
    for (k, &p) in c.p.iter().enumerate() {
        if p < 2 {
            errs.push(format!("constants.p[{k}]"), format!("exponent p = {p} must be at least 2"));
        }
    }
    let wants_hj = NEEDS_HJ.iter().any(|h| cfg.wants(h));
    if wants_hj && c.eps.is_empty() {
        errs.push("constants.eps", "Hamilton-Jacobi checks need at least one ε");
    }
    if (wants_hj || !c.eps.is_empty()) && c.m0.is_none() {
        errs.push("constants.m0", "ε₀ needs a radius M0");
    }
    if let Some(m0) = c.m0.filter(|m| *m > 0.0) {
        let (eps0, _) = hj_constants(c.k, cfg.t_horizon(), cfg.r(), m0);
        for (k, &e) in c.eps.iter().enumerate() {
            if !(e > 0.0 && e < eps0) {
                errs.push(format!("constants.eps[{k}]"), format!("ε = {e} must lie in (0, ε₀) with ε₀ = {eps0}"));
            }
        }
        cfg.eps0 = Some(eps0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"
name = "minimal"
seed = 1

[domain]
kind = "cycle"
n = 8
length = 1.0

[target]
kind = "euclidean"
dim = 1

[initial]
preset = "fourier"

[flow]
t_end = 0.1
steps = 4

[constants]
m0 = 1.0
eps = [0.001]
"#;

    #[test]
    fn minimal_config_parses_and_stores_eps0() {
        let cfg = parse_config_str(MINIMAL).unwrap();
        assert_eq!(cfg.domain.n, 8);
        // R defaults to L/4, T to t_end: ε₀ = (1/4)² / 8.
        assert!((cfg.eps0.unwrap() - 0.0625 / 8.0).abs() < 1e-15);
        assert_eq!(cfg.flow.tol, 1e-10);
        assert_eq!(cfg.checks.comparators, 100);
    }

    #[test]
    fn round_trip_is_identity() {
        let cfg = parse_config_str(MINIMAL).unwrap();
        let again = parse_config_str(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn large_eps_names_the_bound() {
        let text = MINIMAL.replace("eps = [0.001]", "eps = [0.078125]");
        let err = parse_config_str(&text).unwrap_err();
        let e = &err.errors()[0];
        assert_eq!(e.path, "constants.eps[0]");
        assert!(e.message.contains("ε₀"), "{}", e.message);
    }

    #[test]
    fn cyclic_tree_is_rejected() {
        let text = MINIMAL.replace(
            "kind = \"euclidean\"\ndim = 1",
            "kind = \"tree\"\nedges = [[0, 1, 1.0], [1, 2, 1.0], [2, 0, 1.0]]",
        );
        let err = parse_config_str(&text).unwrap_err();
        assert!(err.errors().iter().any(|e| e.path == "target" && e.message == "target tree is not acyclic"), "{err}");
    }

    #[test]
    fn all_errors_are_collected() {
        let text = MINIMAL
            .replace("preset = \"fourier\"", "preset = \"nope\"")
            .replace("n = 8", "n = 2")
            .replace("steps = 4", "steps = 4\ntol = -1.0");
        let err = parse_config_str(&text).unwrap_err();
        let paths: Vec<&str> = err.errors().iter().map(|e| e.path.as_str()).collect();
        assert!(paths.contains(&"domain") && paths.contains(&"initial.preset") && paths.contains(&"flow.tol"), "{paths:?}");
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_config_str("name = \"x\"\nseed = = 3\n").unwrap_err();
        match err {
            ConfigError::Syntax { line, column, .. } => assert_eq!((line, column), (2, 8)),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn structural_errors_name_the_section() {
        let text = MINIMAL.replace("n = 8\n", "");
        let err = parse_config_str(&text).unwrap_err();
        assert_eq!(err.errors()[0].path, "domain");
        assert!(err.errors()[0].message.contains("missing field `n`"));
    }
}
