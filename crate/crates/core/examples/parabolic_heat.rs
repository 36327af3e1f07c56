//! Nonlinear diffusion `u_t = (a(u) u_x)_x` posed as a space-time Volterra
//! equation. With constant `a` the discrete solution is checked against
//! `exp(-π² t) sin(π x)`; with `a(u) = 1 + u²` the global iteration is run and
//! the decay of the peak is printed.

use std::f64::consts::PI;
use std::sync::Arc;

use globlin::iterate::{run_iteration, IterationOptions};
use globlin::linearizer::Diffusivity;
use globlin::problems::{make_parabolic_problem, ParabolicProblemSpec};
use globlin::{Problem, StateVector};

fn spec(diffusivity: Diffusivity, bounds: (f64, f64)) -> ParabolicProblemSpec {
    ParabolicProblemSpec {
        diffusivity,
        bounds,
        domain: (0.0, 1.0),
        final_time: 0.2,
        space_nodes: 31,
        time_nodes: 21,
        initial: Arc::new(|x| (PI * x).sin()),
        sample_range: 1.0,
    }
}

fn main() -> globlin::Result<()> {
    let opts = IterationOptions::default();

    let heat = make_parabolic_problem(spec(Diffusivity::constant(1.0), (1.0, 1.0)))?;
    let f = heat.state(heat.right_hand_side(|_, _| 0.0))?;
    let report = run_iteration(&heat, &f, &heat.zero_state(), &opts)?;
    let exact = StateVector::from_fn(heat.mesh().clone(), heat.norm_kind(), |p| (-PI * PI * p.t).exp() * (PI * p.x).sin())?;
    let u = report.final_state_on(&heat)?;
    println!(
        "constant a: {} iteration(s), space-time L2 error {:.3e}",
        report.iterations,
        heat.norm(&(u.values() - exact.values()))
    );

    let quadratic = Diffusivity::new(
        Arc::new(|u| 1.0 + u * u),
        Arc::new(|u| 2.0 * u),
        Arc::new(|_| 2.0),
        Some(Arc::new(|u| u + u * u * u / 3.0)),
    );
    let problem = make_parabolic_problem(spec(quadratic, (1.0, 2.0)))?;
    let f = problem.state(problem.right_hand_side(|_, _| 0.0))?;
    let report = run_iteration(&problem, &f, &problem.zero_state(), &opts)?;
    println!(
        "a = 1 + u^2: {} after {} iterations, residual {:.2e}",
        report.termination.name(),
        report.iterations,
        report.final_residual()
    );
    let nx = problem.space_nodes();
    let mid = nx / 2;
    for (n, t) in problem.mesh().axis(1).coords().iter().enumerate().step_by(4) {
        println!("  t = {t:.2}  u(1/2, t) = {:.5}  heat: {:.5}", report.final_state[n * nx + mid], (-PI * PI * t).exp());
    }
    Ok(())
}
