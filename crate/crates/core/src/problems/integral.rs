use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linearizer::Nonlinearity;
use crate::mesh::{Axis, Mesh};
use crate::operator::LinearOperator;
use crate::problem::{Problem, ProblemFamily, ProblemInfo};
use crate::state::NormKind;

pub type KernelFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// `A(u)(x) = u(x) + ∫ k(x,y) g(u(y)) dy` on `[lo, hi]`.
#[derive(Clone)]
pub struct IntegralProblemSpec {
    pub kernel: KernelFn,
    /// Check `k(x,y) = k(y,x)` on the node grid at construction.
    pub symmetric: bool,
    pub nonlinearity: Nonlinearity,
    pub domain: (f64, f64),
    pub nodes: usize,
}

impl fmt::Debug for IntegralProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntegralProblemSpec")
            .field("symmetric", &self.symmetric)
            .field("domain", &self.domain)
            .field("nodes", &self.nodes)
            .finish_non_exhaustive()
    }
}

/// Nyström discretization with composite trapezoid weights, posed in the sup norm.
#[derive(Debug, Clone)]
pub struct IntegralProblem {
    mesh: Arc<Mesh>,
    /// `ω_j k(x_i, x_j)`
    weighted_kernel: Arc<DMatrix<f64>>,
    g: Nonlinearity,
    domain: (f64, f64),
}

pub fn make_integral_problem(spec: IntegralProblemSpec) -> Result<IntegralProblem> {
    let g0 = spec.nonlinearity.value(0.0);
    if g0.abs() > 1e-14 {
        return Err(Error::InvalidSpec(format!("g(0) = {g0}, but the kernel must vanish at u = 0")));
    }
    let axis = Axis::closed(spec.domain.0, spec.domain.1, spec.nodes)
        .map_err(|e| Error::InvalidSpec(e.to_string()))?;
    let x = axis.coords().to_vec();
    let h = axis.spacing();
    let n = x.len();
    let kernel = DMatrix::from_fn(n, n, |i, j| (spec.kernel)(x[i], x[j]));
    if kernel.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidSpec("kernel is not finite on the node grid".into()));
    }
    if spec.symmetric {
        let asym = (&kernel - kernel.transpose()).amax();
        if asym > 1e-12 {
            return Err(Error::InvalidSpec(format!("kernel declared symmetric but asymmetry is {asym:e}")));
        }
    }
    let weights: Vec<f64> = (0..n)
        .map(|j| if j == 0 || j == n - 1 { 0.5 * h } else { h })
        .collect();
    let weighted_kernel = DMatrix::from_fn(n, n, |i, j| kernel[(i, j)] * weights[j]);
    Ok(IntegralProblem {
        mesh: Arc::new(Mesh::interval(axis)),
        weighted_kernel: Arc::new(weighted_kernel),
        g: spec.nonlinearity,
        domain: spec.domain,
    })
}

impl IntegralProblem {
    pub fn weighted_kernel(&self) -> &DMatrix<f64> {
        &self.weighted_kernel
    }

    /// `I + K diag(c)`
    fn identity_plus(&self, column_scale: DVector<f64>) -> LinearOperator {
        let n = self.mesh.len();
        let mut m = self.weighted_kernel.as_ref().clone();
        for (j, c) in column_scale.iter().enumerate() {
            m.column_mut(j).scale_mut(*c);
        }
        m += DMatrix::<f64>::identity(n, n);
        LinearOperator::from_dense(m)
    }
}

impl Problem for IntegralProblem {
    fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    fn norm_kind(&self) -> NormKind {
        NormKind::Sup
    }

    fn info(&self) -> ProblemInfo {
        ProblemInfo {
            family: ProblemFamily::Integral,
            parameters: vec![
                ("nodes".into(), self.mesh.len() as f64),
                ("x_lo".into(), self.domain.0),
                ("x_hi".into(), self.domain.1),
            ],
        }
    }

    fn evaluate(&self, u: &DVector<f64>) -> DVector<f64> {
        u + &*self.weighted_kernel * u.map(|v| self.g.value(v))
    }

    fn derivative_action(&self, u: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        w + &*self.weighted_kernel * u.zip_map(w, |v, w| self.g.derivative(v) * w)
    }

    fn derivative_operator(&self, u: &DVector<f64>) -> LinearOperator {
        self.identity_plus(u.map(|v| self.g.derivative(v)))
    }

    fn closed_form_linearization(&self, u: &DVector<f64>) -> Option<LinearOperator> {
        Some(self.identity_plus(u.map(|v| self.g.over_u(v))))
    }

    fn compact_part(&self, u: &DVector<f64>) -> Option<DVector<f64>> {
        Some(&*self.weighted_kernel * u.map(|v| self.g.value(v)))
    }
}
