//! The global linearization `L(u) = ∫_0^1 A'(tu) dt`, for which `A(u) = L(u) u`.

mod quadrature;
mod ratio;

pub use quadrature::{QuadratureRule, DEFAULT_QUADRATURE_NODES};
pub use ratio::{
    parabolic_coefficients, removable_ratio, Diffusivity, DiffusivityRatio, Nonlinearity,
    ParabolicCoefficients, ScalarFn, CUBIC_RATIO_SWITCH, RATIO_SWITCH,
};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::LinearOperator;
use crate::problem::{check_on_mesh, Problem};
use crate::state::StateVector;

/// How `L(u)` is built during iteration and certification.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearizationMode {
    /// Closed form when the problem provides it, quadrature otherwise.
    #[default]
    Auto,
    Quadrature,
    ClosedForm,
}

/// A mode plus the quadrature rule used whenever quadrature is needed.
#[derive(Debug, Clone, Default)]
pub struct Linearizer {
    pub mode: LinearizationMode,
    pub rule: QuadratureRule,
}

impl Linearizer {
    pub fn quadrature(rule: QuadratureRule) -> Self {
        Self { mode: LinearizationMode::Quadrature, rule }
    }

    pub fn build(&self, problem: &dyn Problem, u: &DVector<f64>) -> Result<LinearOperator> {
        match self.mode {
            LinearizationMode::Quadrature => Ok(quadrature_linearization(problem, u, &self.rule)),
            LinearizationMode::ClosedForm => problem.closed_form_linearization(u).ok_or_else(|| {
                Error::Unsupported(format!(
                    "{:?} problem has no closed-form linearization",
                    problem.info().family
                ))
            }),
            LinearizationMode::Auto => Ok(problem
                .closed_form_linearization(u)
                .unwrap_or_else(|| quadrature_linearization(problem, u, &self.rule))),
        }
    }
}

/// `Σ_k ω_k A'(t_k u)` on raw node values.
pub fn quadrature_linearization(
    problem: &dyn Problem,
    u: &DVector<f64>,
    rule: &QuadratureRule,
) -> LinearOperator {
    let terms = rule
        .iter()
        .map(|(t, w)| (w, problem.derivative_operator(&(u * t))))
        .collect();
    LinearOperator::linear_combination(terms).expect("rule has at least one node")
}

/// `L(u)` by Gauss–Legendre quadrature of the derivative along the ray `tu`.
pub fn build_l_quadrature(
    problem: &dyn Problem,
    u: &StateVector,
    rule: &QuadratureRule,
) -> Result<LinearOperator> {
    check_on_mesh(problem, u)?;
    Ok(quadrature_linearization(problem, u.values(), rule))
}

/// `L(u)` from the problem family's closed-form ratio coefficients.
pub fn build_l_closed_form(problem: &dyn Problem, u: &StateVector) -> Result<LinearOperator> {
    check_on_mesh(problem, u)?;
    Linearizer { mode: LinearizationMode::ClosedForm, ..Default::default() }
        .build(problem, u.values())
}

/// `||A(u) - L(u) u|| / (1 + ||A(u)||)` with `L` from quadrature.
pub fn verify_factorization(
    problem: &dyn Problem,
    u: &StateVector,
    rule: &QuadratureRule,
) -> Result<f64> {
    let l = build_l_quadrature(problem, u, rule)?;
    let image = problem.evaluate(u.values());
    let gap = &image - l.apply(u.values());
    Ok(problem.norm(&gap) / (1.0 + problem.norm(&image)))
}
