//! Certify the convergence hypotheses for `-u'' + u + u^3/2 = f` on a ball, then
//! confirm empirically that iterations from several starts reach one solution.

use std::f64::consts::PI;

use globlin::certify::{certify, sample_ball, CertifyOptions};
use globlin::iterate::{run_iteration, uniqueness_probe, IterationOptions};
use globlin::problems::{make_elliptic_problem, EllipticProblemSpec};
use globlin::{Problem, StateVector};

fn main() -> globlin::Result<()> {
    let problem = make_elliptic_problem(EllipticProblemSpec::cubic(1.0, 0.5, 1, 63))?;
    let f = StateVector::from_fn(problem.mesh().clone(), problem.norm_kind(), |p| 0.4 * (PI * p.x).sin())?;

    let cert = certify(&problem, &f, &f, &CertifyOptions::with_radius(0.6))?;
    println!("p = {:.4}   s = {:.4}   ps = {:.4}", cert.p, cert.s, cert.ps);
    println!("q = {:.4e} (derivative check {:.4e})", cert.q, cert.q_derivative_check.unwrap_or(f64::NAN));
    println!(
        "Q = q‖f‖ = {:.4}; the iterates stay in a ball of radius {:.4} inside R = {}",
        cert.contraction_q,
        cert.s_radius.unwrap_or(f64::INFINITY),
        cert.radius
    );
    println!("invertibility {}, contraction {}", cert.invertibility_verified, cert.contraction_verified);

    let opts = IterationOptions::default();
    let report = run_iteration(&problem, &f, &f, &opts)?;
    println!("solve: {} in {} iterations", report.termination.name(), report.iterations);

    let mut starts = vec![problem.zero_state(), f.clone()];
    for u in sample_ball(&problem, cert.radius, 4, 1) {
        starts.push(problem.state(u)?);
    }
    let spread = uniqueness_probe(&problem, &f, &starts, &opts)?;
    println!("{} starts in the ball converge to limits within {spread:.2e} of each other", starts.len());
    Ok(())
}
