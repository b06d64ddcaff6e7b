//! Text encodings of points and numbers used in CSV artifacts and configs.
//!
//! Reals print with 17 significant digits (`{:.16e}`). Euclidean coordinates
//! are joined by `;`, tree points are `edge:offset`, hyperboloid points are
//! `x0;x1;x2`, and product components are joined by `|`, with nested
//! products wrapped in parentheses. A tree vertex may also be written `v<id>`
//! on input; output always uses the canonical edge encoding.

use hmflow_core::target::{hyperbolic, Point, TargetSpace, TreePoint};

pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn encode_point(p: &Point) -> String {
    match p {
        Point::Euclidean(v) => v.iter().map(|&x| real(x)).collect::<Vec<_>>().join(";"),
        Point::Tree(t) => format!("{}:{}", t.edge, real(t.offset)),
        Point::Hyperboloid(x) => x.iter().map(|&c| real(c)).collect::<Vec<_>>().join(";"),
        Point::Product(parts) => parts
            .iter()
            .map(|c| match c {
                Point::Product(_) => format!("({})", encode_point(c)),
                _ => encode_point(c),
            })
            .collect::<Vec<_>>()
            .join("|"),
    }
}

fn parse_real(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

/// Splits on `|` outside parentheses.
fn split_top(s: &str) -> Result<Vec<&str>, String> {
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '|' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(format!("unbalanced parentheses in `{s}`"));
        }
    }
    if depth != 0 {
        return Err(format!("unbalanced parentheses in `{s}`"));
    }
    parts.push(&s[start..]);
    Ok(parts)
}

pub fn decode_point(space: &TargetSpace, s: &str) -> Result<Point, String> {
    let s = s.trim();
    let p = match space {
        TargetSpace::Euclidean { dim } => {
            let v = s.split(';').map(parse_real).collect::<Result<Vec<_>, _>>()?;
            if v.len() != *dim {
                return Err(format!("expected {dim} coordinates, found {}", v.len()));
            }
            Point::Euclidean(v)
        }
        TargetSpace::MetricTree(tree) => {
            if let Some(id) = s.strip_prefix('v') {
                let id: usize = id.parse().map_err(|_| format!("`{s}` is not a vertex reference"))?;
                Point::Tree(tree.vertex_point(id).map_err(|e| e.to_string())?)
            } else {
                let (edge, offset) = s.split_once(':').ok_or_else(|| format!("`{s}` is not of the form edge:offset"))?;
                let edge: usize = edge.trim().parse().map_err(|_| format!("`{edge}` is not an edge id"))?;
                Point::Tree(TreePoint { edge, offset: parse_real(offset)? })
            }
        }
        TargetSpace::HyperbolicPlane => {
            let v = s.split(';').map(parse_real).collect::<Result<Vec<_>, _>>()?;
            let [x0, x1, x2] = v[..] else {
                return Err(format!("expected 3 hyperboloid coordinates, found {}", v.len()));
            };
            let lifted = hyperbolic::lift(x1, x2);
            if (x0 - lifted[0]).abs() > 1e-9 * lifted[0] {
                return Err(format!("`{s}` is not on the hyperboloid"));
            }
            Point::Hyperboloid(lifted)
        }
        TargetSpace::Product(factors) => {
            let parts = split_top(s)?;
            if parts.len() != factors.len() {
                return Err(format!("expected {} product components, found {}", factors.len(), parts.len()));
            }
            let comps = parts
                .iter()
                .zip(factors)
                .map(|(part, f)| {
                    let part = part.trim();
                    let inner = part.strip_prefix('(').and_then(|p| p.strip_suffix(')')).unwrap_or(part);
                    decode_point(f, inner)
                })
                .collect::<Result<Vec<_>, _>>()?;
            Point::Product(comps)
        }
    };
    space.canonicalize(&p).map_err(|e| e.to_string())
}
