//! Initial and boundary maps from their configuration.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use evalexpr::{build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node, Value};
use hmflow_core::mesh::{MapState, MeshDomain};
use hmflow_core::target::{hyperbolic, MetricTree, Point, TargetSpace};
use rand_chacha::ChaCha8Rng;

use crate::config::{MapSpec, ScenarioConfig};
use crate::encode::decode_point;

pub const PRESETS: [&str; 6] = ["constant", "random", "fourier", "loop", "circle", "linear"];

/// Random stream ids derived from the scenario seed.
pub mod stream {
    pub const INITIAL: u64 = 1;
    pub const COMPARATORS: u64 = 2;
    pub const SAMPLES: u64 = 3;
    pub const PERTURBATIONS: u64 = 4;
}

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Branch vertex and its first three edges, for the `loop` preset.
fn tree_legs(tree: &MetricTree) -> Option<(usize, [usize; 3])> {
    let edges = tree.edges();
    (0..tree.num_vertices()).find_map(|v| {
        let inc: Vec<usize> = (0..edges.len()).filter(|&e| edges[e].a == v || edges[e].b == v).collect();
        (inc.len() >= 3).then(|| (v, [inc[0], inc[1], inc[2]]))
    })
}

pub fn preset_supported(preset: &str, space: &TargetSpace, spec: &MapSpec) -> Result<(), String> {
    match (preset, space) {
        ("constant" | "random", _) => Ok(()),
        ("fourier" | "linear", TargetSpace::Euclidean { .. }) => Ok(()),
        ("circle", TargetSpace::Euclidean { dim }) if *dim >= 2 => Ok(()),
        ("loop", TargetSpace::HyperbolicPlane) => Ok(()),
        ("loop", TargetSpace::MetricTree(tree)) => {
            let (_, legs) = tree_legs(tree).ok_or("`loop` needs a tree vertex of degree at least 3")?;
            let shortest = legs.iter().map(|&e| tree.edges()[e].length).fold(f64::INFINITY, f64::min);
            if spec.amplitude() > shortest {
                return Err(format!("amplitude {} exceeds the shortest loop leg {shortest}", spec.amplitude()));
            }
            Ok(())
        }
        (_, TargetSpace::Product(factors)) => factors.iter().try_for_each(|f| preset_supported(preset, f, spec)),
        _ => Err(format!("preset `{preset}` is not available for {} targets", space.kind())),
    }
}

fn context(length: f64) -> HashMapContext<DefaultNumericTypes> {
    let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
    for (k, v) in [("x", 0.0), ("y", 0.0), ("i", 0.0), ("L", length), ("pi", PI)] {
        ctx.set_value(k.into(), Value::Float(v)).expect("plain variables");
    }
    ctx
}

fn eval(node: &Node<DefaultNumericTypes>, ctx: &mut HashMapContext<DefaultNumericTypes>, i: usize, x: [f64; 2]) -> Result<f64, String> {
    for (k, v) in [("x", x[0]), ("y", x[1]), ("i", i as f64)] {
        ctx.set_value(k.into(), Value::Float(v)).map_err(|e| e.to_string())?;
    }
    let v = node.eval_number_with_context(ctx).map_err(|e| e.to_string())?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expression is not finite at vertex {i}"))
    }
}

pub fn expr_is_valid(expr: &str, length: f64) -> Result<(), String> {
    let node = build_operator_tree::<DefaultNumericTypes>(expr).map_err(|e| e.to_string())?;
    eval(&node, &mut context(length), 0, [0.0, 0.0]).map(|_| ())
}

fn base_point(space: &TargetSpace) -> Point {
    match space {
        TargetSpace::Euclidean { dim } => Point::Euclidean(vec![0.0; *dim]),
        TargetSpace::MetricTree(t) => Point::Tree(t.vertex_point(t.vertex_ids()[0]).expect("first vertex exists")),
        TargetSpace::HyperbolicPlane => Point::Hyperboloid([1.0, 0.0, 0.0]),
        TargetSpace::Product(f) => Point::Product(f.iter().map(base_point).collect()),
    }
}

/// Angle of a vertex for periodic presets: one period across a periodic
/// domain, half a period across a Dirichlet one.
fn angles(domain: &MeshDomain, x: [f64; 2]) -> [f64; 2] {
    let scale = if domain.kind().periodic() { TAU } else { PI } / domain.length();
    [scale * x[0], scale * x[1]]
}

fn preset_point(
    preset: &str,
    spec: &MapSpec,
    space: &TargetSpace,
    domain: &MeshDomain,
    x: [f64; 2],
    factor: usize,
    rng: &mut ChaCha8Rng,
) -> Point {
    let a = spec.amplitude();
    let [tx, ty] = angles(domain, x);
    let theta = spec.mode() as f64 * tx + spec.phase() + factor as f64;
    match (preset, space) {
        ("constant", _) => base_point(space),
        ("random", _) => space.sample(rng, a),
        ("fourier", TargetSpace::Euclidean { dim }) => Point::Euclidean(
            (0..*dim)
                .map(|c| {
                    let shift = c as f64 * PI / 2.0;
                    let second = if domain.dim() == 2 { 0.5 * (ty + shift).cos() } else { 0.0 };
                    a * ((theta + shift).sin() + second)
                })
                .collect(),
        ),
        ("linear", TargetSpace::Euclidean { dim }) => {
            let mut v = vec![0.0; *dim];
            v[0] = spec.slope() * x[0];
            Point::Euclidean(v)
        }
        ("circle", TargetSpace::Euclidean { dim }) => {
            let mut v = vec![0.0; *dim];
            v[0] = a * theta.cos();
            v[1] = a * theta.sin();
            Point::Euclidean(v)
        }
        ("loop", TargetSpace::HyperbolicPlane) => {
            Point::Hyperboloid(hyperbolic::lift(a.sinh() * theta.cos(), a.sinh() * theta.sin()))
        }
        ("loop", TargetSpace::MetricTree(tree)) => {
            let (center, legs) = tree_legs(tree).expect("validated");
            let z = 3.0 * theta.rem_euclid(TAU) / TAU;
            let k = (z.floor() as usize).min(2);
            let edge = tree.edges()[legs[k]];
            let far = if edge.a == center { edge.b } else { edge.a };
            let dist = (a * (PI * (z - k as f64)).sin()).clamp(0.0, edge.length);
            let ids = tree.vertex_ids();
            Point::Tree(tree.point_between(ids[center], ids[far], dist).expect("validated leg"))
        }
        (_, TargetSpace::Product(factors)) => Point::Product(
            factors
                .iter()
                .enumerate()
                .map(|(k, f)| preset_point(preset, spec, f, domain, x, factor + k, rng))
                .collect(),
        ),
        _ => unreachable!("preset support is validated"),
    }
}

/// Point per vertex from a validated map spec.
pub fn map_values(
    spec: &MapSpec,
    domain: &Arc<MeshDomain>,
    space: &TargetSpace,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Point>, String> {
    let n = domain.num_vertices();
    if let Some(values) = &spec.values {
        return values.iter().map(|v| decode_point(space, v)).collect();
    }
    if let Some(exprs) = &spec.expr {
        let nodes = exprs
            .iter()
            .map(|e| build_operator_tree::<DefaultNumericTypes>(e).map_err(|err| err.to_string()))
            .collect::<Result<Vec<_>, _>>()?;
        let mut ctx = context(domain.length());
        return (0..n)
            .map(|i| {
                let x = domain.coords(i);
                let v = nodes.iter().map(|node| eval(node, &mut ctx, i, x)).collect::<Result<Vec<_>, _>>()?;
                Ok(Point::Euclidean(v))
            })
            .collect();
    }
    let preset = spec.preset.as_deref().expect("validated map spec");
    if preset == "constant" {
        if let Some(p) = &spec.point {
            let p = decode_point(space, p)?;
            return Ok(vec![p; n]);
        }
    }
    Ok((0..n)
        .map(|i| preset_point(preset, spec, space, domain, domain.coords(i), 0, rng))
        .collect())
}

/// Initial map of a scenario, with boundary values overridden when given.
pub fn initial_state(cfg: &ScenarioConfig) -> hmflow_core::Result<MapState> {
    let domain = cfg.build_domain()?;
    let space = cfg.build_target()?;
    let mut rng = rng_for(cfg.seed, stream::INITIAL);
    let values = map_values(&cfg.initial, &domain, &space, &mut rng).map_err(hmflow_core::Error::InvalidParameter)?;
    let u = MapState::new(domain.clone(), space.clone(), values)?;
    match &cfg.boundary {
        Some(b) => {
            let psi = map_values(b, &domain, &space, &mut rng).map_err(hmflow_core::Error::InvalidParameter)?;
            u.with_boundary(|i| psi[i].clone())
        }
        None => Ok(u),
    }
}
