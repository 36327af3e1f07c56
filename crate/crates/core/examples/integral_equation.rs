//! A Hammerstein integral equation `u + ∫ k(x,y) sin(u(y)) dy = f` solved with
//! the global iteration, Newton and Picard from the same start.

use std::sync::Arc;

use globlin::baselines::{newton_solve, picard_solve};
use globlin::iterate::{run_iteration, IterationOptions};
use globlin::linearizer::Nonlinearity;
use globlin::problems::{make_integral_problem, manufacture_rhs, IntegralProblemSpec};
use globlin::{Problem, StateVector};

fn main() -> globlin::Result<()> {
    let problem = make_integral_problem(IntegralProblemSpec {
        kernel: Arc::new(|x, y| 0.8 * (-(x - y).abs()).exp()),
        symmetric: true,
        nonlinearity: Nonlinearity::new(f64::sin, f64::cos),
        domain: (0.0, 1.0),
        nodes: 101,
    })?;
    let u_exact = StateVector::from_fn(problem.mesh().clone(), problem.norm_kind(), |p| 2.0 * p.x * (1.0 - p.x))?;
    let f = manufacture_rhs(&problem, &u_exact)?;
    let opts = IterationOptions { step_tolerance: 1e-13, residual_tolerance: 1e-12, ..Default::default() };

    for report in [
        run_iteration(&problem, &f, &f, &opts)?,
        newton_solve(&problem, &f, &f, &opts)?,
        picard_solve(&problem, &f, &f, &opts)?,
    ] {
        let u = report.final_state_on(&problem)?;
        println!(
            "{:<7} {:<19} {:>3} iterations, residual {:.2e}, error {:.2e}",
            report.method.name(),
            report.termination.name(),
            report.iterations,
            report.final_residual(),
            problem.norm(&(u.values() - u_exact.values())),
        );
    }
    Ok(())
}
