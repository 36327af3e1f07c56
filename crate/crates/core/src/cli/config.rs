//! The TOML run configuration and the problem instances built from it.

use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use super::expr::{Expr, Vars};
use super::CliError;
use crate::certify::CertifyOptions;
use crate::iterate::{IterationOptions, Method};
use crate::linearizer::{Diffusivity, LinearizationMode, Linearizer, Nonlinearity, QuadratureRule};
use crate::linsolve::{SolveMethod, SolveOptions, NORM_SEED};
use crate::mesh::{Mesh, Point};
use crate::problem::Problem;
use crate::problems::{
    make_elliptic_problem, make_integral_problem, make_parabolic_problem, EllipticProblemSpec,
    IntegralProblemSpec, LinearProblem, ParabolicProblem, ParabolicProblemSpec, PointFn,
    PointwiseProblem,
};
use crate::state::{NormKind, StateVector};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Value of the variable `p` available to every expression.
    #[serde(default)]
    pub parameter: f64,
    pub problem: ProblemConfig,
    pub rhs: RhsConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub iteration: IterationConfig,
    pub certify: Option<CertifyConfig>,
    pub compare: Option<CompareConfig>,
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ProblemConfig {
    Linear(LinearConfig),
    Pointwise(PointwiseConfig),
    Integral(IntegralConfig),
    Elliptic(EllipticConfig),
    Parabolic(ParabolicConfig),
}

fn unit_interval() -> [f64; 2] {
    [0.0, 1.0]
}

fn sup() -> NormKind {
    NormKind::Sup
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearConfig {
    /// Row-major square matrix; alternatively `nodes` and `scale` for `scale * I`.
    pub matrix: Option<Vec<Vec<f64>>>,
    pub nodes: Option<usize>,
    pub scale: Option<f64>,
    #[serde(default = "sup")]
    pub norm: NormKind,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointwiseConfig {
    #[serde(default = "three")]
    pub nodes: usize,
    pub phi: String,
    pub phi_u: String,
    #[serde(default = "sup")]
    pub norm: NormKind,
}

fn three() -> usize {
    3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegralConfig {
    pub nodes: usize,
    #[serde(default = "unit_interval")]
    pub domain: [f64; 2],
    /// Expression in `x, y`.
    pub kernel: String,
    #[serde(default)]
    pub symmetric: bool,
    pub g: String,
    pub g_u: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipticConfig {
    #[serde(default = "one_usize")]
    pub dimension: usize,
    pub nodes: usize,
    #[serde(default = "unit_interval")]
    pub domain: [f64; 2],
    /// Expression in `x, y, u`.
    pub reaction: String,
    pub reaction_u: String,
    pub split: Option<f64>,
    #[serde(default = "one")]
    pub sample_range: f64,
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParabolicConfig {
    pub space_nodes: usize,
    pub time_nodes: usize,
    #[serde(default = "unit_interval")]
    pub domain: [f64; 2],
    pub final_time: f64,
    /// Expressions in `u`.
    pub a: String,
    pub a_u: String,
    pub a_uu: String,
    pub gamma: Option<String>,
    /// `[c, m]` with `c ≤ a ≤ m` and `|a'|, |a''| ≤ m`.
    pub bounds: [f64; 2],
    /// Expression in `x`.
    pub initial: String,
    #[serde(default = "one")]
    pub sample_range: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhsKind {
    /// `f = A(u_exact)` with `u_exact` given by `expression`.
    Manufactured,
    /// `f` given by `expression` (for the parabolic family: the source term).
    Expression,
    Zero,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhsConfig {
    pub kind: RhsKind,
    pub expression: Option<String>,
    /// Multiplies the expression before it is used.
    #[serde(default = "one")]
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    #[default]
    Rhs,
    Zero,
    Expression,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default)]
    pub kind: InitialKind,
    pub expression: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IterationConfig {
    pub max_iterations: usize,
    pub step_tolerance: f64,
    pub residual_tolerance: f64,
    pub quadrature_nodes: usize,
    pub linearization: LinearizationMode,
    pub solver: SolveMethod,
    pub solver_tolerance: f64,
    pub ball_radius: Option<f64>,
}

impl Default for IterationConfig {
    fn default() -> Self {
        let it = IterationOptions::default();
        Self {
            max_iterations: it.max_iterations,
            step_tolerance: it.step_tolerance,
            residual_tolerance: it.residual_tolerance,
            quadrature_nodes: it.linearizer.rule.len(),
            linearization: LinearizationMode::Auto,
            solver: SolveMethod::Auto,
            solver_tolerance: it.solve.tolerance,
            ball_radius: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    /// Ball radius `R`; alternatively `rhs_radius_factor` for `R = factor * ‖f‖`.
    pub radius: Option<f64>,
    pub rhs_radius_factor: Option<f64>,
    #[serde(default = "twenty")]
    pub samples: usize,
    #[serde(default = "ten")]
    pub pairs: usize,
    #[serde(default = "five")]
    pub time_points: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "yes")]
    pub derivative_check: bool,
}

fn twenty() -> usize {
    20
}
fn ten() -> usize {
    10
}
fn five() -> usize {
    5
}
fn yes() -> bool {
    true
}
fn default_seed() -> u64 {
    NORM_SEED
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub methods: Vec<Method>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    /// Scales the right-hand side expression.
    RhsAmplitude,
    /// The expression variable `p`.
    P,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::RhsAmplitude => "rhs_amplitude",
            SweepParameter::P => "p",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

fn config_error(key: &str, message: impl std::fmt::Display) -> CliError {
    CliError::config(format!("{key}: {message}"))
}

fn positive(key: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(config_error(key, format!("must be a positive number, got {v}")))
    }
}

fn parse_expr(key: &str, src: &str) -> Result<Expr, CliError> {
    Expr::parse(src).map_err(|e| config_error(key, format!("{e} in `{src}`")))
}

fn require<'a>(key: &str, v: &'a Option<String>) -> Result<&'a str, CliError> {
    v.as_deref().ok_or_else(|| config_error(key, "is required here"))
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Checks every field against the preconditions of the operation that uses it.
    pub fn validate(&self) -> Result<(), CliError> {
        match &self.problem {
            ProblemConfig::Linear(c) => {
                if c.matrix.is_none() && (c.nodes.is_none() || c.scale.is_none()) {
                    return Err(config_error("problem.matrix", "give either `matrix` or both `nodes` and `scale`"));
                }
                if let Some(m) = &c.matrix {
                    if m.len() < 3 || m.iter().any(|row| row.len() != m.len()) {
                        return Err(config_error("problem.matrix", "must be square with at least 3 rows"));
                    }
                }
            }
            ProblemConfig::Pointwise(c) => {
                parse_expr("problem.phi", &c.phi)?;
                parse_expr("problem.phi_u", &c.phi_u)?;
            }
            ProblemConfig::Integral(c) => {
                parse_expr("problem.kernel", &c.kernel)?;
                parse_expr("problem.g", &c.g)?;
                parse_expr("problem.g_u", &c.g_u)?;
            }
            ProblemConfig::Elliptic(c) => {
                if !(1..=2).contains(&c.dimension) {
                    return Err(config_error("problem.dimension", format!("must be 1 or 2, got {}", c.dimension)));
                }
                parse_expr("problem.reaction", &c.reaction)?;
                parse_expr("problem.reaction_u", &c.reaction_u)?;
                positive("problem.sample_range", c.sample_range)?;
                if let Some(a) = c.split {
                    positive("problem.split", a)?;
                }
            }
            ProblemConfig::Parabolic(c) => {
                positive("problem.final_time", c.final_time)?;
                positive("problem.sample_range", c.sample_range)?;
                for (key, src) in [("problem.a", &c.a), ("problem.a_u", &c.a_u), ("problem.a_uu", &c.a_uu), ("problem.initial", &c.initial)] {
                    parse_expr(key, src)?;
                }
                if let Some(g) = &c.gamma {
                    parse_expr("problem.gamma", g)?;
                }
            }
        }
        if let ProblemConfig::Linear(_) | ProblemConfig::Pointwise(_) = &self.problem {
            if self.rhs.kind != RhsKind::Zero {
                if let Some(e) = &self.rhs.expression {
                    parse_expr("rhs.expression", e)?;
                }
            }
        }
        match self.rhs.kind {
            RhsKind::Zero => {}
            _ => {
                parse_expr("rhs.expression", require("rhs.expression", &self.rhs.expression)?)?;
            }
        }
        if !self.rhs.amplitude.is_finite() {
            return Err(config_error("rhs.amplitude", "must be finite"));
        }
        if self.initial.kind == InitialKind::Expression {
            parse_expr("initial.expression", require("initial.expression", &self.initial.expression)?)?;
        }

        let it = &self.iteration;
        if it.max_iterations == 0 {
            return Err(config_error("iteration.max_iterations", "must be at least 1"));
        }
        positive("iteration.step_tolerance", it.step_tolerance)?;
        positive("iteration.residual_tolerance", it.residual_tolerance)?;
        if !(it.solver_tolerance > 0.0 && it.solver_tolerance < 1.0) {
            return Err(config_error("iteration.solver_tolerance", "must lie in (0, 1)"));
        }
        if it.quadrature_nodes == 0 || it.quadrature_nodes > 64 {
            return Err(config_error("iteration.quadrature_nodes", "must lie in 1..=64"));
        }
        if let Some(r) = it.ball_radius {
            positive("iteration.ball_radius", r)?;
        }

        if let Some(c) = &self.certify {
            match (c.radius, c.rhs_radius_factor) {
                (Some(r), None) => positive("certify.radius", r)?,
                (None, Some(k)) => positive("certify.rhs_radius_factor", k)?,
                _ => return Err(config_error("certify.radius", "give exactly one of `radius` and `rhs_radius_factor`")),
            }
            if c.samples == 0 {
                return Err(config_error("certify.samples", "must be at least 1"));
            }
            if c.pairs == 0 {
                return Err(config_error("certify.pairs", "must be at least 1"));
            }
            if c.time_points < 2 {
                return Err(config_error("certify.time_points", "must be at least 2"));
            }
        }
        if let Some(c) = &self.compare {
            if c.methods.is_empty() {
                return Err(config_error("compare.methods", "must list at least one method"));
            }
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(config_error("sweep.values", "must contain at least one value"));
            }
            if let Some(v) = s.values.iter().find(|v| !v.is_finite()) {
                return Err(config_error("sweep.values", format!("contains non-finite value {v}")));
            }
        }
        Ok(())
    }

    pub fn iteration_options(&self) -> IterationOptions {
        let it = &self.iteration;
        IterationOptions {
            max_iterations: it.max_iterations,
            step_tolerance: it.step_tolerance,
            residual_tolerance: it.residual_tolerance,
            linearizer: Linearizer {
                mode: it.linearization,
                rule: QuadratureRule::gauss_legendre(it.quadrature_nodes).expect("validated node count"),
            },
            solve: SolveOptions { method: it.solver, tolerance: it.solver_tolerance, ..SolveOptions::default() },
            ball_radius: it.ball_radius,
        }
    }

    /// Certificate options for an instance built from this configuration.
    pub fn certify_options(&self, inst: &Instance, seed_override: Option<u64>) -> Result<CertifyOptions, CliError> {
        let c = self.certify.as_ref().ok_or_else(|| config_error("certify", "section is required"))?;
        let it = self.iteration_options();
        let radius = match (c.radius, c.rhs_radius_factor) {
            (Some(r), _) => r,
            (None, Some(k)) => k * inst.f.norm(),
            (None, None) => unreachable!("validated"),
        };
        if !(radius > inst.u0.norm()) {
            return Err(config_error("certify.radius", format!("R = {radius} must exceed ‖u0‖ = {}", inst.u0.norm())));
        }
        Ok(CertifyOptions {
            radius,
            samples: c.samples,
            pairs: c.pairs,
            time_points: c.time_points,
            seed: seed_override.unwrap_or(c.seed),
            linearizer: it.linearizer,
            solve: it.solve,
            derivative_check: c.derivative_check,
        })
    }

    /// A copy with one sweep parameter set to `value`.
    pub fn with_parameter(&self, which: SweepParameter, value: f64) -> Self {
        let mut c = self.clone();
        match which {
            SweepParameter::RhsAmplitude => c.rhs.amplitude = value,
            SweepParameter::P => c.parameter = value,
        }
        c
    }

    pub fn build(&self) -> Result<Instance, CliError> {
        Instance::build(self)
    }
}

/// A problem with its right-hand side and starting state.
pub struct Instance {
    pub problem: Box<dyn Problem>,
    pub f: StateVector,
    pub u0: StateVector,
    /// The manufactured solution, when the right-hand side was manufactured.
    pub exact: Option<StateVector>,
}

fn compile(expr: Expr, p: f64) -> PointFn {
    Arc::new(move |pt: Point, u: f64| expr.eval(&Vars { x: pt.x, y: pt.y, t: pt.t, u, p }))
}

fn compile_scalar(expr: Expr, p: f64) -> Arc<dyn Fn(f64) -> f64 + Send + Sync> {
    Arc::new(move |u: f64| expr.eval(&Vars { u, p, ..Vars::default() }))
}

fn spec_error(e: crate::error::Error) -> CliError {
    CliError::config(format!("problem: {e}"))
}

impl Instance {
    fn build(config: &RunConfig) -> Result<Self, CliError> {
        let p = config.parameter;
        let ex = |key: &str, src: &str| parse_expr(key, src);
        let mut parabolic: Option<ParabolicProblem> = None;
        let problem: Box<dyn Problem> = match &config.problem {
            ProblemConfig::Linear(c) => {
                let matrix = match &c.matrix {
                    Some(rows) => DMatrix::from_fn(rows.len(), rows.len(), |i, j| rows[i][j]),
                    None => DMatrix::identity(c.nodes.unwrap_or(0), c.nodes.unwrap_or(0)) * c.scale.unwrap_or(1.0),
                };
                let mesh = Mesh::dirichlet_interval(0.0, 1.0, matrix.nrows()).map_err(spec_error)?;
                Box::new(LinearProblem::new(Arc::new(mesh), c.norm, matrix).map_err(spec_error)?)
            }
            ProblemConfig::Pointwise(c) => {
                let (phi, phi_u) = (compile_scalar(ex("problem.phi", &c.phi)?, p), compile_scalar(ex("problem.phi_u", &c.phi_u)?, p));
                let mesh = Mesh::dirichlet_interval(0.0, 1.0, c.nodes).map_err(spec_error)?;
                let nonlinearity = Nonlinearity::new(move |u| phi(u), move |u| phi_u(u));
                Box::new(PointwiseProblem::new(Arc::new(mesh), c.norm, nonlinearity).map_err(spec_error)?)
            }
            ProblemConfig::Integral(c) => {
                let kernel = ex("problem.kernel", &c.kernel)?;
                let (g, g_u) = (compile_scalar(ex("problem.g", &c.g)?, p), compile_scalar(ex("problem.g_u", &c.g_u)?, p));
                Box::new(
                    make_integral_problem(IntegralProblemSpec {
                        kernel: Arc::new(move |x, y| kernel.eval(&Vars { x, y, p, ..Vars::default() })),
                        symmetric: c.symmetric,
                        nonlinearity: Nonlinearity::new(move |u| g(u), move |u| g_u(u)),
                        domain: (c.domain[0], c.domain[1]),
                        nodes: c.nodes,
                    })
                    .map_err(spec_error)?,
                )
            }
            ProblemConfig::Elliptic(c) => Box::new(
                make_elliptic_problem(EllipticProblemSpec {
                    reaction: compile(ex("problem.reaction", &c.reaction)?, p),
                    reaction_u: compile(ex("problem.reaction_u", &c.reaction_u)?, p),
                    split: c.split,
                    dimension: c.dimension,
                    nodes: c.nodes,
                    domain: (c.domain[0], c.domain[1]),
                    sample_range: c.sample_range,
                })
                .map_err(spec_error)?,
            ),
            ProblemConfig::Parabolic(c) => {
                let gamma = match &c.gamma {
                    Some(g) => Some(compile_scalar(ex("problem.gamma", g)?, p)),
                    None => None,
                };
                let initial = ex("problem.initial", &c.initial)?;
                let prob = make_parabolic_problem(ParabolicProblemSpec {
                    diffusivity: Diffusivity::new(
                        compile_scalar(ex("problem.a", &c.a)?, p),
                        compile_scalar(ex("problem.a_u", &c.a_u)?, p),
                        compile_scalar(ex("problem.a_uu", &c.a_uu)?, p),
                        gamma,
                    ),
                    bounds: (c.bounds[0], c.bounds[1]),
                    domain: (c.domain[0], c.domain[1]),
                    final_time: c.final_time,
                    space_nodes: c.space_nodes,
                    time_nodes: c.time_nodes,
                    initial: Arc::new(move |x| initial.eval(&Vars { x, p, ..Vars::default() })),
                    sample_range: c.sample_range,
                })
                .map_err(spec_error)?;
                parabolic = Some(prob.clone());
                Box::new(prob)
            }
        };

        let on_mesh = |key: &str, src: &str, scale: f64| -> Result<StateVector, CliError> {
            let e = parse_expr(key, src)?;
            let values = DVector::from_iterator(
                problem.dim(),
                problem.mesh().points().map(|pt| scale * e.eval(&Vars { x: pt.x, y: pt.y, t: pt.t, u: 0.0, p })),
            );
            problem.state(values).map_err(|e| config_error(key, e))
        };
        let amplitude = config.rhs.amplitude;
        let (f, exact) = match config.rhs.kind {
            RhsKind::Zero => match &parabolic {
                Some(pp) => (problem.state(pp.right_hand_side(|_, _| 0.0)).map_err(spec_error)?, None),
                None => (problem.zero_state(), None),
            },
            RhsKind::Manufactured => {
                let exact = on_mesh("rhs.expression", config.rhs.expression.as_deref().unwrap_or(""), amplitude)?;
                let f = problem.state(problem.evaluate(exact.values())).map_err(|e| config_error("rhs.expression", e))?;
                (f, Some(exact))
            }
            RhsKind::Expression => {
                let src = config.rhs.expression.as_deref().unwrap_or("");
                match &parabolic {
                    Some(pp) => {
                        let e = parse_expr("rhs.expression", src)?;
                        let values = pp.right_hand_side(|x, t| amplitude * e.eval(&Vars { x, t, p, ..Vars::default() }));
                        (problem.state(values).map_err(|e| config_error("rhs.expression", e))?, None)
                    }
                    None => (on_mesh("rhs.expression", src, amplitude)?, None),
                }
            }
        };
        let u0 = match config.initial.kind {
            InitialKind::Rhs => f.clone(),
            InitialKind::Zero => problem.zero_state(),
            InitialKind::Expression => {
                on_mesh("initial.expression", config.initial.expression.as_deref().unwrap_or(""), 1.0)?
            }
        };
        Ok(Self { problem, f, u0, exact })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ELLIPTIC: &str = r#"
[problem]
family = "elliptic"
nodes = 15
reaction = "u + 0.1*u^3"
reaction_u = "1 + 0.3*u^2"

[rhs]
kind = "manufactured"
expression = "0.5*sin(pi*x)"
"#;

    #[test]
    fn parses_and_builds_an_elliptic_instance() {
        let config = RunConfig::from_toml(ELLIPTIC).unwrap();
        let inst = config.build().unwrap();
        assert_eq!(inst.problem.dim(), 15);
        assert!(inst.exact.is_some());
        assert_eq!(inst.u0.values(), inst.f.values());
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let text = ELLIPTIC.replace("nodes = 15", "nodes = 15\nnodez = 3");
        let err = RunConfig::from_toml(&text).unwrap_err();
        assert_eq!(err.code, 64);
        assert!(err.message.contains("nodez"), "{}", err.message);

        let text = format!("{ELLIPTIC}\n[iteration]\nmax_iter = 3\n");
        let err = RunConfig::from_toml(&text).unwrap_err();
        assert!(err.message.contains("max_iter"), "{}", err.message);
    }

    #[test]
    fn invalid_values_name_their_key() {
        let text = format!("{ELLIPTIC}\n[iteration]\nmax_iterations = 0\n");
        let err = RunConfig::from_toml(&text).unwrap_err();
        assert!(err.message.contains("iteration.max_iterations"), "{}", err.message);

        let text = ELLIPTIC.replace("u + 0.1*u^3", "u + 0.1*w^3");
        let err = RunConfig::from_toml(&text).unwrap_err();
        assert!(err.message.contains("problem.reaction"), "{}", err.message);

        let text = format!("{ELLIPTIC}\n[sweep]\nparameter = \"p\"\nvalues = []\n");
        let err = RunConfig::from_toml(&text).unwrap_err();
        assert!(err.message.contains("sweep.values"), "{}", err.message);

        let text = ELLIPTIC.replace("expression = \"0.5*sin(pi*x)\"", "");
        let err = RunConfig::from_toml(&text).unwrap_err();
        assert!(err.message.contains("rhs.expression"), "{}", err.message);
    }

    #[test]
    fn parameter_reaches_expressions() {
        let text = ELLIPTIC.replace("u + 0.1*u^3", "u + p*u^3").replace("1 + 0.3*u^2", "1 + 3*p*u^2");
        let config = RunConfig::from_toml(&text).unwrap();
        let a = config.with_parameter(SweepParameter::P, 0.0).build().unwrap();
        let b = config.with_parameter(SweepParameter::P, 2.0).build().unwrap();
        let u = DVector::from_element(15, 0.5);
        let diff = b.problem.evaluate(&u) - a.problem.evaluate(&u);
        assert!((diff[7] - 2.0 * 0.125).abs() < 1e-14);
    }
}
