//! Build `L(u) = ∫_0^1 A'(tu) dt` by Gauss–Legendre quadrature and in closed
//! form, and check the factorization `A(u) = L(u) u`.

use std::sync::Arc;

use globlin::certify::sample_ball;
use globlin::linearizer::{
    build_l_closed_form, build_l_quadrature, verify_factorization, Diffusivity, DiffusivityRatio, Nonlinearity,
    QuadratureRule,
};
use globlin::problems::{make_integral_problem, IntegralProblemSpec};
use globlin::Problem;

fn main() -> globlin::Result<()> {
    let problem = make_integral_problem(IntegralProblemSpec {
        kernel: Arc::new(|x, y| (x * y).cos()),
        symmetric: true,
        nonlinearity: Nonlinearity::new(|u| u.powi(3) + u.sin(), |u| 3.0 * u * u + u.cos()),
        domain: (0.0, 1.0),
        nodes: 41,
    })?;
    let u = problem.state(sample_ball(&problem, 1.5, 1, 3).remove(0))?;

    println!("{:>3} {:>12} {:>14}", "m", "defect", "vs closed form");
    let closed = build_l_closed_form(&problem, &u)?.to_dense();
    for m in [1, 2, 4, 8, 16] {
        let rule = QuadratureRule::gauss_legendre(m)?;
        let quad = build_l_quadrature(&problem, &u, &rule)?.to_dense();
        println!("{m:>3} {:>12.3e} {:>14.3e}", verify_factorization(&problem, &u, &rule)?, (quad - &closed).amax());
    }

    // Ratios with removable singularities at u = 0 for a(u) = 1 + u + u^2.
    let a = Diffusivity::new(Arc::new(|u| 1.0 + u + u * u), Arc::new(|u| 1.0 + 2.0 * u), Arc::new(|_| 2.0), None);
    println!("\n{:>8} {:>12} {:>12} {:>12}", "u", "γ(u)/u", "first", "second");
    for u in [1e-1, 1e-3, 1e-5, 1e-8, 1e-12, 0.0] {
        println!(
            "{u:>8.0e} {:>12.8} {:>12.8} {:>12.8}",
            a.ratio(DiffusivityRatio::Mean, u),
            a.ratio(DiffusivityRatio::FirstMoment, u),
            a.ratio(DiffusivityRatio::SecondMoment, u)
        );
    }
    Ok(())
}
