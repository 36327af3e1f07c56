//! Load a TOML run configuration, as the `globlin` binary does, and drive the
//! library directly with the resulting instance.
//!
//! ```text
//! cargo run --example run_config -- examples/configs/parabolic.toml
//! ```

use globlin::cli::config::RunConfig;
use globlin::cli::report::convergence_table;
use globlin::iterate::run_iteration;

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/elliptic_manufactured.toml").into());
    let config = RunConfig::from_path(path.as_ref()).unwrap_or_else(|e| {
        eprintln!("{e}");
        std::process::exit(e.code);
    });
    let inst = config.build().expect("configuration validated");
    println!("{:?}, {} unknowns", inst.problem.info().family, inst.problem.dim());

    let report = run_iteration(inst.problem.as_ref(), &inst.f, &inst.u0, &config.iteration_options()).expect("iteration runs");
    print!("{}", convergence_table(&report).expect("table renders"));
    if let Some(exact) = &inst.exact {
        let u = report.final_state_on(inst.problem.as_ref()).expect("state on mesh");
        println!("error against the manufactured solution: {:.3e}", inst.problem.norm(&(u.values() - exact.values())));
    }
}
