use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::operator::LinearOperator;
use crate::problem::{Problem, ProblemFamily, ProblemInfo};
use crate::state::NormKind;

/// `A(u) = M u`.
#[derive(Debug, Clone)]
pub struct LinearProblem {
    mesh: Arc<Mesh>,
    norm_kind: NormKind,
    matrix: DMatrix<f64>,
}

impl LinearProblem {
    pub fn new(mesh: Arc<Mesh>, norm_kind: NormKind, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != mesh.len() || matrix.ncols() != mesh.len() {
            return Err(Error::Dimension { expected: mesh.len(), found: matrix.nrows() });
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("matrix has non-finite entries".into()));
        }
        Ok(Self { mesh, norm_kind, matrix })
    }

    /// `A(u) = scale * u`.
    pub fn scaled_identity(mesh: Arc<Mesh>, norm_kind: NormKind, scale: f64) -> Result<Self> {
        let n = mesh.len();
        Self::new(mesh, norm_kind, DMatrix::identity(n, n) * scale)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

impl Problem for LinearProblem {
    fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    fn norm_kind(&self) -> NormKind {
        self.norm_kind
    }

    fn info(&self) -> ProblemInfo {
        ProblemInfo {
            family: ProblemFamily::Linear,
            parameters: vec![("dimension".into(), self.matrix.nrows() as f64)],
        }
    }

    fn evaluate(&self, u: &DVector<f64>) -> DVector<f64> {
        &self.matrix * u
    }

    fn derivative_action(&self, _u: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        &self.matrix * w
    }

    fn derivative_operator(&self, _u: &DVector<f64>) -> LinearOperator {
        LinearOperator::from_dense(self.matrix.clone())
    }

    fn closed_form_linearization(&self, _u: &DVector<f64>) -> Option<LinearOperator> {
        Some(LinearOperator::from_dense(self.matrix.clone()))
    }
}
