//! Global linearization for nonlinear operator equations `A(u) = f`.
//!
//! The operator is rewritten as `A(u) = L(u) u` with
//! `L(u) = ∫_0^1 A'(tu) dt`, and the equation is solved by the fixed-point
//! iteration `u_{n+1} = L(u_n)^{-1} f`. Alongside the solver the crate
//! estimates, by sampling, the constants that make this iteration a
//! contraction and that bound `||L(u)^{-1}||`.
//!
//! Three discretized problem families are provided in [`problems`]: a
//! Nyström-discretized Hammerstein integral equation, a finite-difference
//! semilinear elliptic Dirichlet problem, and a quasilinear heat equation in
//! Volterra form on a space-time grid.

// `!(x > y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod certify;
pub mod cli;
pub mod error;
pub mod iterate;
pub mod linearizer;
pub mod linsolve;
pub mod mesh;
pub mod operator;
pub mod problem;
pub mod problems;
pub mod state;

pub use error::{Error, Result};
pub use mesh::{Axis, Mesh, MeshKind, Point};
pub use operator::LinearOperator;
pub use problem::{apply_derivative, evaluate, Problem, ProblemFamily, ProblemInfo};
pub use state::{NormKind, StateVector};
