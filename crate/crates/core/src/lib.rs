//! Harmonic map heat flow from weighted graphs into CAT(0) metric spaces.
//!
//! The crate is organised bottom-up:
//!
//! - [`target`]: CAT(0) target spaces (Euclidean, metric trees, the hyperbolic
//!   plane and l² products) with distances, geodesics, barycenters and
//!   four-point comparison residuals.
//! - [`mesh`]: the discretized domain (weighted graph with lumped measure),
//!   maps into a target, the graph energy, L² distance, Laplacian and heat
//!   semigroup.
//! - [`flow`]: the resolvent (one implicit Euler step of the energy gradient
//!   flow), iterated resolvents, flow traces and flow-level inequality checks.
//! - [`regularity`]: residual evaluators for subsolution, Lipschitz,
//!   mean-value, Hamilton–Jacobi and Bochner-type inequalities.

pub mod error;
pub mod flow;
pub mod mesh;
pub mod regularity;
pub mod target;

pub use error::{Error, Result};
pub use flow::{FlowTrace, SweepOptions};
pub use mesh::{DomainKind, MapState, MeshDomain, ScalarField};
pub use target::{Point, TargetSpace, TreePoint};
