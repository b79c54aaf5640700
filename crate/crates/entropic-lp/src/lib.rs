//! Entropy-penalized linear programming at desk scale.
//!
//! Replacing the objective of `min c^T x  s.t.  A x = b, x >= 0` with
//! `c^T x - eta^{-1} H(x)` (H the Shannon entropy) turns the LP into a
//! strongly convex interior problem. This crate solves that penalized
//! program, computes the structural quantities of the feasible polytope that
//! govern how fast the penalized optimum approaches the LP optimum, and
//! checks the resulting convergence bounds numerically:
//!
//! - [`model`]: standard-form instances, entropy functions, exact vertex
//!   enumeration, and the polytope profile (suboptimality gap, l1 radius,
//!   entropic radius).
//! - [`solver`]: the penalized optimum by three routes: closed-form Gibbs on
//!   simplex feasible sets, log-domain Sinkhorn scaling on the Birkhoff
//!   polytope, and dual Newton ascent for general instances.
//! - [`bounds`]: the slow rate, the exponential fast rate with its
//!   threshold, the distance-to-face corollary, the tau-relaxed variant, and
//!   the matching lower-bound families.
//! - [`mod@bench`]: instance loading, eta-scan experiments with CSV/JSON
//!   output, and the solve documents behind the CLI.
//! - [`verify`]: the built-in acceptance suite driving the `verify`
//!   subcommand and the `acceptance` test target.
//!
//! The `examples/` directory has one runnable program per capability; the
//! thin `entropic-lp` binary exposes the same functionality as `solve`,
//! `scan`, `profile`, and `verify` subcommands.

pub mod bench;
pub mod bounds;
mod linalg;
pub mod model;
pub mod solver;
pub mod verify;

pub use bounds::{BoundReport, CheckedReport};
pub use model::{
    AssignmentInstance, InstanceSpec, LpInstance, ModelError, PolytopeProfile, SimplexFamily,
};
pub use solver::{PenalizedSolution, Route, ScalingState, SolverError};

/// Profile an instance, producing the max-entropy point with the dual-ascent
/// solver (a zero-cost penalized solve).
pub fn profile_instance(inst: &LpInstance) -> Result<PolytopeProfile, ModelError> {
    model::profile(inst, |i| {
        solver::max_entropy_point(i).map_err(|e| e.to_string())
    })
}
