//! Scale the right-hand side of `-u'' + u + u^3 = s sin(πx/10)` on (0, 10) and
//! compare where the iteration stops converging with where the sampled
//! contraction constant `Q = q‖f‖` reaches 1.

use std::f64::consts::PI;

use globlin::certify::{estimate_lipschitz_q, CertifyOptions};
use globlin::iterate::{empirical_contraction, run_iteration, IterationOptions};
use globlin::problems::{make_elliptic_problem, EllipticProblemSpec};
use globlin::{Problem, StateVector};

fn main() -> globlin::Result<()> {
    let mut spec = EllipticProblemSpec::cubic(1.0, 1.0, 1, 63);
    spec.domain = (0.0, 10.0);
    let problem = make_elliptic_problem(spec)?;
    let shape = StateVector::from_fn(problem.mesh().clone(), problem.norm_kind(), |p| (PI * p.x / 10.0).sin())?;
    let opts = IterationOptions { max_iterations: 500, ..Default::default() };
    let cert = CertifyOptions::with_radius(1.0);

    println!("{:>6} {:>9} {:>6} {:>8} {:>8}", "s", "converged", "iters", "Q_hat", "Q");
    let mut s: f64 = 0.5;
    while s <= 8.0 {
        let f = problem.state(shape.values() * s)?;
        let report = run_iteration(&problem, &f, &f, &opts)?;
        let q_hat = empirical_contraction(&report).map_or(String::from("-"), |q| format!("{q:.4}"));
        let lip = estimate_lipschitz_q(&problem, 2.0 * f.norm(), cert.pairs, &cert.linearizer, &cert.solve, cert.seed)?;
        println!(
            "{s:>6.2} {:>9} {:>6} {q_hat:>8} {:>8.4}",
            report.converged(),
            report.iterations,
            lip.q * f.norm()
        );
        s *= 2f64.powf(0.25);
    }
    Ok(())
}
