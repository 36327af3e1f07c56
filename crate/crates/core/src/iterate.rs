//! The fixed-point iteration `L(u_n) u_{n+1} = f` with stopping rules,
//! contraction diagnostics, and invariant-ball bookkeeping.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linearizer::Linearizer;
use crate::linsolve::{solve_values, Factorization, SolveOptions};
use crate::operator::LinearOperator;
use crate::problem::{check_on_mesh, Problem};
use crate::state::StateVector;

/// Step norms below this are treated as converged noise when forming ratios.
pub const RATIO_NOISE_FLOOR: f64 = 1e-14;
/// Divergence is declared when a step is this many times the step four iterations earlier.
pub const DIVERGENCE_GROWTH: f64 = 10.0;
const DIVERGENCE_WINDOW: usize = 4;

#[derive(Debug, Clone)]
pub struct IterationOptions {
    pub max_iterations: usize,
    pub step_tolerance: f64,
    pub residual_tolerance: f64,
    pub linearizer: Linearizer,
    pub solve: SolveOptions,
    /// Radius `R` of the ball `B_R` used for membership flags.
    pub ball_radius: Option<f64>,
}

impl Default for IterationOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            step_tolerance: 1e-10,
            residual_tolerance: 1e-10,
            linearizer: Linearizer::default(),
            solve: SolveOptions::default(),
            ball_radius: None,
        }
    }
}

impl IterationOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be at least 1".into()));
        }
        for (name, v) in [("step_tolerance", self.step_tolerance), ("residual_tolerance", self.residual_tolerance)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if let Some(r) = self.ball_radius {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidArgument(format!("ball radius must be positive, got {r}")));
            }
        }
        self.solve.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Global,
    Newton,
    Picard,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Global => "global",
            Method::Newton => "newton",
            Method::Picard => "picard",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    ConvergedStep,
    ConvergedResidual,
    MaxIter,
    Diverged,
    #[serde(rename = "singular-L")]
    SingularL,
}

impl Termination {
    pub fn converged(self) -> bool {
        matches!(self, Termination::ConvergedStep | Termination::ConvergedResidual)
    }

    pub fn name(self) -> &'static str {
        match self {
            Termination::ConvergedStep => "converged-step",
            Termination::ConvergedResidual => "converged-residual",
            Termination::MaxIter => "max-iter",
            Termination::Diverged => "diverged",
            Termination::SingularL => "singular-L",
        }
    }
}

/// Per-iteration record of a run.
///
/// With `K` completed steps there are `K + 1` iterate norms, residual norms
/// and ball flags (for `u_0..u_K`), `K` step norms and `K - 1` ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub method: Method,
    pub termination: Termination,
    pub iterations: usize,
    pub step_norms: Vec<f64>,
    pub residual_norms: Vec<f64>,
    /// `‖u_{n+1} - u_n‖ / ‖u_n - u_{n-1}‖` for `n ≥ 1`.
    pub ratios: Vec<f64>,
    pub iterate_norms: Vec<f64>,
    pub ball_radius: Option<f64>,
    pub inside_ball: Option<Vec<bool>>,
    pub rhs_norm: f64,
    pub final_state: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl IterationReport {
    pub fn converged(&self) -> bool {
        self.termination.converged()
    }

    pub fn final_residual(&self) -> f64 {
        *self.residual_norms.last().expect("report records u_0")
    }

    /// Final state placed back on the problem mesh.
    pub fn final_state_on(&self, problem: &dyn Problem) -> Result<StateVector> {
        problem.state(DVector::from_column_slice(&self.final_state))
    }
}

/// Shared driver for the global iteration and the baseline solvers: applies
/// `step` until a stopping rule fires and records the report.
pub(crate) fn drive(
    problem: &dyn Problem,
    f: &StateVector,
    u0: &StateVector,
    opts: &IterationOptions,
    method: Method,
    mut step: impl FnMut(&DVector<f64>) -> Result<DVector<f64>>,
) -> Result<IterationReport> {
    opts.validate()?;
    check_on_mesh(problem, f)?;
    check_on_mesh(problem, u0)?;
    let f_values = f.values();
    let f_norm = problem.norm(f_values);
    let residual_of = |u: &DVector<f64>| problem.norm(&(problem.evaluate(u) - f_values));
    let in_ball = |norm: f64| opts.ball_radius.map(|r| norm <= r + 1e-12);

    let mut u = u0.values().clone();
    let mut report = IterationReport {
        method,
        termination: Termination::MaxIter,
        iterations: 0,
        step_norms: Vec::new(),
        residual_norms: vec![residual_of(&u)],
        ratios: Vec::new(),
        iterate_norms: vec![problem.norm(&u)],
        ball_radius: opts.ball_radius,
        inside_ball: in_ball(problem.norm(&u)).map(|b| vec![b]),
        rhs_norm: f_norm,
        final_state: Vec::new(),
        message: None,
    };
    let residual_target = opts.residual_tolerance * (1.0 + f_norm);

    if report.residual_norms[0] <= residual_target {
        report.termination = Termination::ConvergedResidual;
    } else {
        for n in 0..opts.max_iterations {
            let next = match step(&u) {
                Ok(next) => next,
                Err(Error::SingularOperator { residual }) => {
                    report.termination = Termination::SingularL;
                    report.message = Some(format!("linear solve failed at iteration {n} (residual {residual:e})"));
                    break;
                }
                Err(e) => return Err(e),
            };
            if next.iter().any(|v| !v.is_finite()) {
                report.termination = Termination::Diverged;
                report.message = Some(format!("non-finite iterate at iteration {}", n + 1));
                break;
            }
            let step_norm = problem.norm(&(&next - &u));
            let previous_norm = problem.norm(&u);
            let residual = residual_of(&next);
            let next_norm = problem.norm(&next);

            if let Some(&prev) = report.step_norms.last() {
                report.ratios.push(if prev > 0.0 { step_norm / prev } else { 0.0 });
            }
            report.step_norms.push(step_norm);
            report.residual_norms.push(residual);
            report.iterate_norms.push(next_norm);
            if let (Some(flags), Some(b)) = (report.inside_ball.as_mut(), in_ball(next_norm)) {
                flags.push(b);
            }
            report.iterations = n + 1;
            u = next;

            if !residual.is_finite() {
                report.termination = Termination::Diverged;
                report.message = Some(format!("non-finite residual at iteration {}", n + 1));
                break;
            }
            if residual <= residual_target {
                report.termination = Termination::ConvergedResidual;
                break;
            }
            if step_norm <= opts.step_tolerance * (1.0 + previous_norm) {
                report.termination = Termination::ConvergedStep;
                break;
            }
            let k = report.step_norms.len();
            if k > DIVERGENCE_WINDOW
                && step_norm >= DIVERGENCE_GROWTH * report.step_norms[k - 1 - DIVERGENCE_WINDOW]
            {
                report.termination = Termination::Diverged;
                report.message = Some(format!(
                    "step norm grew from {:e} to {step_norm:e} over {} iterations",
                    report.step_norms[k - 1 - DIVERGENCE_WINDOW],
                    DIVERGENCE_WINDOW
                ));
                break;
            }
        }
    }
    report.final_state = u.as_slice().to_vec();
    Ok(report)
}

/// Runs `u_{n+1} = L(u_n)^{-1} f` from `u0`.
pub fn run_iteration(
    problem: &dyn Problem,
    f: &StateVector,
    u0: &StateVector,
    opts: &IterationOptions,
) -> Result<IterationReport> {
    let f_values = f.values().clone();
    drive(problem, f, u0, opts, Method::Global, |u| {
        let l = opts.linearizer.build(problem, u)?;
        solve_values(&l, &f_values, &opts.solve)
    })
}

/// `Q̂`: the largest step ratio over the last half of the recorded ratios.
///
/// Ratios whose numerator is below [`RATIO_NOISE_FLOOR`] are skipped, since
/// both steps are then at rounding level.
pub fn empirical_contraction(report: &IterationReport) -> Result<f64> {
    if report.step_norms.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, found: report.step_norms.len() });
    }
    let tail = report.ratios.len().div_ceil(2);
    let start = report.ratios.len() - tail;
    Ok(report.ratios[start..]
        .iter()
        .zip(&report.step_norms[start + 1..])
        .filter(|(_, &step)| step > RATIO_NOISE_FLOOR)
        .map(|(&r, _)| r)
        .fold(0.0, f64::max))
}

/// Radius `‖u_0‖ + ‖u_1 - u_0‖ / (1 - Q)` of the ball holding every iterate, and
/// whether all recorded iterates lie in it.
pub fn ball_bookkeeping(report: &IterationReport, u0: &StateVector, q: f64) -> Result<(f64, bool)> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("contraction constant must lie in [0, 1), got {q}")));
    }
    // a start that already solves the equation is its own first step
    let first = match report.step_norms.first() {
        Some(&s) => s,
        None if report.converged() => 0.0,
        None => return Err(Error::InsufficientData { needed: 2, found: report.iterate_norms.len() }),
    };
    let radius = u0.norm() + first / (1.0 - q);
    let inside = report.iterate_norms.iter().all(|&n| n <= radius + 1e-12);
    Ok((radius, inside))
}

/// Admissible Lipschitz constants for a ball of radius `R` around the first step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibleQ {
    /// Supremum of admissible `q`; zero when `R` is too small.
    pub q_max: f64,
    /// `Q = 1 - ‖L(u_0)^{-1} f - u_0‖ / (R - ‖u_0‖)`; zero when `R` is too small.
    pub q_of_r: f64,
    /// `‖L(u_0)^{-1} f - u_0‖ / (R - ‖u_0‖) < 1`.
    pub radius_feasible: bool,
    /// `0 < Q < 1` holds strictly.
    pub strict: bool,
}

pub fn feasible_q_interval(
    u0: &StateVector,
    f: &StateVector,
    radius: f64,
    l0: &LinearOperator,
    opts: &SolveOptions,
) -> Result<FeasibleQ> {
    let u0_norm = u0.norm();
    if !(radius > u0_norm) {
        return Err(Error::InvalidArgument(format!("R = {radius} must exceed ‖u0‖ = {u0_norm}")));
    }
    let f_norm = f.norm();
    if f_norm == 0.0 {
        return Err(Error::InvalidArgument("f = 0 has the trivial solution u = 0".into()));
    }
    let w1 = Factorization::new(l0, opts)?.solve(f.values())?;
    let ratio = u0.norm_kind().of((w1 - u0.values()).as_slice(), u0.mesh().cell_volume()) / (radius - u0_norm);
    if ratio >= 1.0 {
        return Ok(FeasibleQ { q_max: 0.0, q_of_r: 0.0, radius_feasible: false, strict: false });
    }
    let q_of_r = 1.0 - ratio;
    Ok(FeasibleQ { q_max: q_of_r / f_norm, q_of_r, radius_feasible: true, strict: q_of_r > 0.0 && q_of_r < 1.0 })
}

/// Largest pairwise distance between the limits reached from each start.
///
/// Runs execute on separate threads; the result does not depend on their order.
pub fn uniqueness_probe(
    problem: &dyn Problem,
    f: &StateVector,
    starts: &[StateVector],
    opts: &IterationOptions,
) -> Result<f64> {
    if starts.len() < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 starts, got {}", starts.len())));
    }
    let reports: Vec<Result<IterationReport>> = std::thread::scope(|scope| {
        let handles: Vec<_> = starts
            .iter()
            .map(|u0| scope.spawn(move || run_iteration(problem, f, u0, opts)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("iteration thread panicked")).collect()
    });
    let mut finals = Vec::with_capacity(starts.len());
    for (k, report) in reports.into_iter().enumerate() {
        let report = report?;
        if !report.converged() {
            return Err(Error::NotConverged(format!(
                "start {k} terminated {}",
                report.termination.name()
            )));
        }
        finals.push(DVector::from_vec(report.final_state));
    }
    let mut worst: f64 = 0.0;
    for i in 0..finals.len() {
        for j in i + 1..finals.len() {
            worst = worst.max(problem.norm(&(&finals[i] - &finals[j])));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh;
    use crate::problems::LinearProblem;
    use crate::state::NormKind;
    use nalgebra::DMatrix;
    use std::sync::Arc;

    fn report_with_steps(steps: &[f64]) -> IterationReport {
        let ratios = steps.windows(2).map(|w| w[1] / w[0]).collect();
        IterationReport {
            method: Method::Global,
            termination: Termination::ConvergedStep,
            iterations: steps.len(),
            step_norms: steps.to_vec(),
            residual_norms: vec![0.0; steps.len() + 1],
            ratios,
            iterate_norms: vec![0.0; steps.len() + 1],
            ball_radius: None,
            inside_ball: None,
            rhs_norm: 1.0,
            final_state: vec![],
            message: None,
        }
    }

    fn linear() -> LinearProblem {
        let mesh = Arc::new(Mesh::dirichlet_interval(0.0, 1.0, 4).unwrap());
        let m = DMatrix::from_row_slice(4, 4, &[
            4.0, 1.0, 0.0, 0.0, //
            1.0, 3.0, 0.5, 0.0, //
            0.0, 0.5, 2.0, 0.2, //
            0.0, 0.0, 0.2, 5.0,
        ]);
        LinearProblem::new(mesh, NormKind::Sup, m).unwrap()
    }

    #[test]
    fn geometric_steps_give_their_ratio() {
        let q = empirical_contraction(&report_with_steps(&[1.0, 0.5, 0.25, 0.125])).unwrap();
        assert!((q - 0.5).abs() < 1e-15);
    }

    #[test]
    fn short_reports_have_no_contraction_estimate() {
        let err = empirical_contraction(&report_with_steps(&[1.0])).unwrap_err();
        assert!(matches!(err, Error::InsufficientData { .. }));
    }

    #[test]
    fn zero_datum_converges_immediately() {
        let p = linear();
        let z = p.zero_state();
        let report = run_iteration(&p, &z, &z, &IterationOptions::default()).unwrap();
        assert_eq!(report.termination, Termination::ConvergedResidual);
        assert_eq!(report.iterations, 0);
        assert!(report.final_state.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn linear_problem_converges_in_one_step() {
        let p = linear();
        let f = p.state(DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0])).unwrap();
        let u0 = p.state(DVector::from_vec(vec![7.0, 7.0, -7.0, 0.0])).unwrap();
        let report = run_iteration(&p, &f, &u0, &IterationOptions::default()).unwrap();
        assert!(report.converged());
        assert_eq!(report.iterations, 1);
        let exact = p.matrix().clone().lu().solve(f.values()).unwrap();
        assert!((DVector::from_vec(report.final_state.clone()) - exact).amax() < 1e-14);
    }

    #[test]
    fn ball_radius_from_first_step() {
        let mut report = report_with_steps(&[1.0, 0.5]);
        report.iterate_norms = vec![0.0, 1.0, 1.5];
        let p = linear();
        let (radius, inside) = ball_bookkeeping(&report, &p.zero_state(), 0.5).unwrap();
        assert_eq!(radius, 2.0);
        assert!(inside);
        assert!(ball_bookkeeping(&report, &p.zero_state(), 1.0).is_err());
    }

    #[test]
    fn fixed_point_start_has_ball_of_its_own_norm() {
        let p = linear();
        let u = p.state(DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0])).unwrap();
        let f = p.state(p.evaluate(u.values())).unwrap();
        let opts = IterationOptions { residual_tolerance: 1e-300, step_tolerance: 1e-12, ..Default::default() };
        let report = run_iteration(&p, &f, &u, &opts).unwrap();
        let (radius, inside) = ball_bookkeeping(&report, &u, 0.3).unwrap();
        assert!((radius - u.norm()).abs() < 1e-12);
        assert!(inside);
    }

    #[test]
    fn feasible_q_arithmetic() {
        let mesh = Arc::new(Mesh::dirichlet_interval(0.0, 1.0, 3).unwrap());
        let f = StateVector::from_vec(mesh.clone(), NormKind::Sup, vec![1.0, 0.5, -1.0]).unwrap();
        let zero = StateVector::zeros(mesh.clone(), NormKind::Sup);
        let id = LinearOperator::identity(3);
        let opts = SolveOptions::default();

        let fq = feasible_q_interval(&zero, &f, 2.0, &id, &opts).unwrap();
        assert!((fq.q_max - 0.5).abs() < 1e-15 && (fq.q_of_r - 0.5).abs() < 1e-15);
        assert!(fq.radius_feasible && fq.strict);

        let at_solution = feasible_q_interval(&f, &f, 3.0, &id, &opts).unwrap();
        assert_eq!(at_solution.q_of_r, 1.0);
        assert!(at_solution.radius_feasible && !at_solution.strict);

        let big_step = LinearOperator::from_dense(DMatrix::identity(3, 3) * 0.01);
        let tight = feasible_q_interval(&zero, &f, 1.5, &big_step, &opts).unwrap();
        assert_eq!(tight.q_max, 0.0);
        assert!(!tight.radius_feasible);

        assert!(feasible_q_interval(&f, &f, 0.5, &id, &opts).is_err());
        assert!(feasible_q_interval(&zero, &zero, 1.0, &id, &opts).is_err());
    }

    #[test]
    fn linear_problem_has_a_unique_limit() {
        let p = linear();
        let f = p.state(DVector::from_vec(vec![1.0, -1.0, 2.0, 0.5])).unwrap();
        let starts = vec![p.zero_state(), f.clone(), f.scaled(-1.0).unwrap()];
        let d = uniqueness_probe(&p, &f, &starts, &IterationOptions::default()).unwrap();
        assert!(d < 1e-14);

        let z = p.zero_state();
        let d0 = uniqueness_probe(&p, &z, &[z.clone(), f.clone()], &IterationOptions::default()).unwrap();
        assert!(d0 < 1e-14);
    }

    #[test]
    fn report_round_trips_through_json() {
        let report = report_with_steps(&[1.0, 0.1, 0.01]);
        let text = serde_json::to_string(&report).unwrap();
        assert!(text.contains("\"converged-step\""));
        let back: IterationReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
    }
}
