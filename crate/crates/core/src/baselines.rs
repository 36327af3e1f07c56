//! Newton and Picard reference solvers. Both reuse the stopping rules and the
//! report schema of [`run_iteration`](crate::iterate::run_iteration).

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::iterate::{drive, IterationOptions, IterationReport, Method};
use crate::linsolve::solve_values;
use crate::problem::Problem;
use crate::state::StateVector;

/// Undamped Newton: `u_{n+1} = u_n - A'(u_n)^{-1} (A(u_n) - f)`.
pub fn newton_solve(
    problem: &dyn Problem,
    f: &StateVector,
    u0: &StateVector,
    opts: &IterationOptions,
) -> Result<IterationReport> {
    let f_values = f.values().clone();
    drive(problem, f, u0, opts, Method::Newton, |u| {
        let jacobian = problem.derivative_operator(u);
        let correction = solve_values(&jacobian, &(problem.evaluate(u) - &f_values), &opts.solve)?;
        Ok(u - correction)
    })
}

/// `u_{n+1} = f - B(u_n)` for problems of the form `A = I + B`.
pub fn picard_solve(
    problem: &dyn Problem,
    f: &StateVector,
    u0: &StateVector,
    opts: &IterationOptions,
) -> Result<IterationReport> {
    if problem.compact_part(&DVector::zeros(problem.dim())).is_none() {
        return Err(Error::Unsupported(format!(
            "Picard iteration needs A = I + B, which the {:?} problem does not provide",
            problem.info().family
        )));
    }
    let f_values = f.values().clone();
    drive(problem, f, u0, opts, Method::Picard, |u| {
        let b = problem.compact_part(u).expect("checked above");
        Ok(&f_values - b)
    })
}
