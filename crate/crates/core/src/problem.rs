//! The contract every discretized nonlinear problem `A(u) = f` implements.

use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::operator::LinearOperator;
use crate::state::{NormKind, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemFamily {
    Linear,
    Pointwise,
    Integral,
    Elliptic,
    Parabolic,
}

/// Family tag plus the scalar parameters that identify an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInfo {
    pub family: ProblemFamily,
    pub parameters: Vec<(String, f64)>,
}

/// A nonlinear operator `A` on node values with `A(0) = 0`.
///
/// All methods take raw node values on [`Problem::mesh`]; callers holding
/// [`StateVector`]s should go through [`evaluate`] and [`apply_derivative`],
/// which check the mesh.
pub trait Problem: Send + Sync {
    fn mesh(&self) -> &Arc<Mesh>;

    fn norm_kind(&self) -> NormKind;

    fn info(&self) -> ProblemInfo;

    fn evaluate(&self, u: &DVector<f64>) -> DVector<f64>;

    /// Directional derivative `A'(u) w`.
    fn derivative_action(&self, u: &DVector<f64>, w: &DVector<f64>) -> DVector<f64>;

    /// `A'(u)` as an operator handle (dense where the problem can afford it).
    fn derivative_operator(&self, u: &DVector<f64>) -> LinearOperator;

    /// `L(u) = ∫_0^1 A'(tu) dt` from closed-form coefficients, if the family has them.
    fn closed_form_linearization(&self, _u: &DVector<f64>) -> Option<LinearOperator> {
        None
    }

    /// `B(u)` for problems of the form `A = I + B`.
    fn compact_part(&self, _u: &DVector<f64>) -> Option<DVector<f64>> {
        None
    }

    fn dim(&self) -> usize {
        self.mesh().len()
    }

    fn norm(&self, v: &DVector<f64>) -> f64 {
        self.norm_kind().of(v.as_slice(), self.mesh().cell_volume())
    }

    /// Wrap node values as a state on this problem's mesh.
    fn state(&self, values: DVector<f64>) -> Result<StateVector> {
        StateVector::new(self.mesh().clone(), self.norm_kind(), values)
    }

    fn zero_state(&self) -> StateVector {
        StateVector::zeros(self.mesh().clone(), self.norm_kind())
    }
}

pub(crate) fn check_on_mesh(problem: &dyn Problem, v: &StateVector) -> Result<()> {
    let mesh = problem.mesh();
    if Arc::ptr_eq(mesh, v.mesh()) || mesh.as_ref() == v.mesh().as_ref() {
        Ok(())
    } else {
        Err(Error::Dimension { expected: mesh.len(), found: v.len() })
    }
}

/// `A(u)`.
pub fn evaluate(problem: &dyn Problem, u: &StateVector) -> Result<StateVector> {
    check_on_mesh(problem, u)?;
    problem.state(problem.evaluate(u.values()))
}

/// `A'(u) w`.
pub fn apply_derivative(
    problem: &dyn Problem,
    u: &StateVector,
    w: &StateVector,
) -> Result<StateVector> {
    check_on_mesh(problem, u)?;
    check_on_mesh(problem, w)?;
    problem.state(problem.derivative_action(u.values(), w.values()))
}

/// Central difference `(A(u+tw) - A(u-tw)) / 2t` with
/// `t = 1e-6 (1 + ||u||) / (1 + ||w||)`, the reference for derivative checks.
pub fn central_difference(
    problem: &dyn Problem,
    u: &DVector<f64>,
    w: &DVector<f64>,
) -> DVector<f64> {
    let t = 1e-6 * (1.0 + problem.norm(u)) / (1.0 + problem.norm(w));
    let plus = problem.evaluate(&(u + w * t));
    let minus = problem.evaluate(&(u - w * t));
    (plus - minus) / (2.0 * t)
}
