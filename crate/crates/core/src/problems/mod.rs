//! Concrete problem families.
//!
//! * [`LinearProblem`]: `A(u) = M u`, the degenerate case where `L(u) = M`.
//! * [`PointwiseProblem`]: `A(u)_i = φ(u_i)`, decoupled scalar equations.
//! * [`IntegralProblem`]: `u + ∫ k(x,y) g(u(y)) dy` by Nyström with trapezoid weights.
//! * [`EllipticProblem`]: `-Δu + g(x,u)` with homogeneous Dirichlet data.
//! * [`ParabolicProblem`]: `u - ∫_0^t ∇·[a(u)∇u] dτ` on a space-time grid.

mod elliptic;
mod integral;
mod linear;
mod parabolic;
mod pointwise;

use std::sync::Arc;

pub use elliptic::{make_elliptic_problem, EllipticProblem, EllipticProblemSpec};
pub use integral::{make_integral_problem, IntegralProblem, IntegralProblemSpec, KernelFn};
pub use linear::LinearProblem;
pub use parabolic::{make_parabolic_problem, ParabolicProblem, ParabolicProblemSpec};
pub use pointwise::PointwiseProblem;

use crate::error::Result;
use crate::mesh::Point;
use crate::problem::{evaluate, Problem};
use crate::state::StateVector;

/// A function of position and state value, e.g. a reaction term `g(x, u)`.
pub type PointFn = Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>;

/// Operators up to this many unknowns are realized as dense matrices.
pub const DENSE_LIMIT: usize = 2048;

/// `f = A(u_exact)`, so that `u_exact` solves the discrete problem exactly.
pub fn manufacture_rhs(problem: &dyn Problem, u_exact: &StateVector) -> Result<StateVector> {
    evaluate(problem, u_exact)
}
