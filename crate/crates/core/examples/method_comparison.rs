//! The global iteration against Newton on the scalar equation `u^3 = 8`
//! started from `u = 1`.
//!
//! The global step is `u ← 8 / u^2`, which runs away: 1, 8, 1/8, 512, ...
//! Newton converges to 2 from the same start, because the convergence
//! hypotheses of the global method fail here while Newton's are met.

use nalgebra::DVector;

use globlin::baselines::newton_solve;
use globlin::iterate::{run_iteration, IterationOptions};
use globlin::problems::PointwiseProblem;
use globlin::Problem;

fn main() -> globlin::Result<()> {
    let problem = PointwiseProblem::scalar_cubic();
    let f = problem.state(DVector::from_element(problem.dim(), 8.0))?;
    let u0 = problem.state(DVector::from_element(problem.dim(), 1.0))?;
    let opts = IterationOptions::default();

    let global = run_iteration(&problem, &f, &u0, &opts)?;
    println!("global: {} after {} steps", global.termination.name(), global.iterations);
    for (n, norm) in global.iterate_norms.iter().enumerate() {
        println!("  u_{n} = {norm:e}");
    }

    let newton = newton_solve(&problem, &f, &u0, &opts)?;
    println!("newton: {} after {} steps, u = {:?}", newton.termination.name(), newton.iterations, newton.final_state);
    Ok(())
}
