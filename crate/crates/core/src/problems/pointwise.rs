use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linearizer::Nonlinearity;
use crate::mesh::Mesh;
use crate::operator::LinearOperator;
use crate::problem::{Problem, ProblemFamily, ProblemInfo};
use crate::state::NormKind;

/// Decoupled scalar equations `φ(u_i) = f_i`, one per node.
#[derive(Debug, Clone)]
pub struct PointwiseProblem {
    mesh: Arc<Mesh>,
    norm_kind: NormKind,
    phi: Nonlinearity,
}

impl PointwiseProblem {
    pub fn new(mesh: Arc<Mesh>, norm_kind: NormKind, phi: Nonlinearity) -> Result<Self> {
        if phi.value(0.0) != 0.0 {
            return Err(Error::InvalidSpec(format!("φ(0) = {} but must vanish", phi.value(0.0))));
        }
        Ok(Self { mesh, norm_kind, phi })
    }

    /// `φ(u) = u³` on three decoupled nodes, measured in the sup norm.
    ///
    /// Here `L(u) = u²`, so the global iteration reads `u_{n+1} = f / u_n²`,
    /// which is not a contraction for `f = 8` near the root `u = 2`.
    pub fn scalar_cubic() -> Self {
        let mesh = Arc::new(Mesh::dirichlet_interval(0.0, 1.0, 3).expect("valid mesh"));
        Self::new(mesh, NormKind::Sup, Nonlinearity::new(|u| u * u * u, |u| 3.0 * u * u))
            .expect("cube vanishes at zero")
    }
}

impl Problem for PointwiseProblem {
    fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    fn norm_kind(&self) -> NormKind {
        self.norm_kind
    }

    fn info(&self) -> ProblemInfo {
        ProblemInfo {
            family: ProblemFamily::Pointwise,
            parameters: vec![("nodes".into(), self.mesh.len() as f64)],
        }
    }

    fn evaluate(&self, u: &DVector<f64>) -> DVector<f64> {
        u.map(|v| self.phi.value(v))
    }

    fn derivative_action(&self, u: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        u.zip_map(w, |v, w| self.phi.derivative(v) * w)
    }

    fn derivative_operator(&self, u: &DVector<f64>) -> LinearOperator {
        LinearOperator::from_dense(DMatrix::from_diagonal(&u.map(|v| self.phi.derivative(v))))
    }

    fn closed_form_linearization(&self, u: &DVector<f64>) -> Option<LinearOperator> {
        Some(LinearOperator::from_dense(DMatrix::from_diagonal(&u.map(|v| self.phi.over_u(v)))))
    }
}
