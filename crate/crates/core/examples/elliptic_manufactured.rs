//! Solve `-u'' + u + 0.1 u^3 = f` on (0, 1) with a manufactured right-hand side
//! and watch the error fall like `h^2` under mesh refinement.

use std::f64::consts::PI;

use globlin::iterate::{run_iteration, IterationOptions};
use globlin::problems::{make_elliptic_problem, EllipticProblemSpec};
use globlin::{Problem, StateVector};

fn main() -> globlin::Result<()> {
    let exact = |x: f64| 0.5 * (PI * x).sin();
    let source = |x: f64| {
        let u = exact(x);
        PI * PI * u + u + 0.1 * u.powi(3)
    };
    let opts = IterationOptions { step_tolerance: 1e-14, residual_tolerance: 1e-13, ..Default::default() };

    println!("{:>5} {:>6} {:>12} {:>7}", "n", "iters", "L2 error", "order");
    let mut previous: Option<f64> = None;
    for n in [16, 32, 64, 128] {
        let problem = make_elliptic_problem(EllipticProblemSpec::autonomous_1d(
            |u| u + 0.1 * u.powi(3),
            |u| 1.0 + 0.3 * u * u,
            n - 1,
        ))?;
        let f = StateVector::from_fn(problem.mesh().clone(), problem.norm_kind(), |p| source(p.x))?;
        let u_exact = StateVector::from_fn(problem.mesh().clone(), problem.norm_kind(), |p| exact(p.x))?;

        let report = run_iteration(&problem, &f, &f, &opts)?;
        let u = report.final_state_on(&problem)?;
        let error = problem.norm(&(u.values() - u_exact.values()));
        let order = previous.map(|e| format!("{:.3}", (e / error).log2())).unwrap_or_default();
        println!("{n:>5} {:>6} {error:>12.4e} {order:>7}", report.iterations);
        previous = Some(error);
    }
    Ok(())
}
