//! Linear operators, either as dense matrices or as matrix-free actions.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Action = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

/// Immutable handle to a linear map `w -> L w` on `R^n`.
///
/// When a dense realization is present it is authoritative and `apply` uses
/// it. Otherwise the action closure is used, and the optional adjoint action
/// enables spectral-norm estimation and transposed solves.
#[derive(Clone)]
pub struct LinearOperator {
    dim: usize,
    dense: Option<DMatrix<f64>>,
    action: Option<Action>,
    adjoint: Option<Action>,
    symmetric: bool,
    positive_definite: bool,
}

impl fmt::Debug for LinearOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearOperator")
            .field("dim", &self.dim)
            .field("dense", &self.dense.is_some())
            .field("adjoint", &self.adjoint.is_some())
            .field("symmetric", &self.symmetric)
            .field("positive_definite", &self.positive_definite)
            .finish()
    }
}

impl LinearOperator {
    /// Wrap a square matrix. Symmetry is detected to `1e-12` relative.
    pub fn from_dense(matrix: DMatrix<f64>) -> Self {
        assert!(matrix.is_square(), "linear operator matrix must be square");
        let scale = matrix.amax().max(f64::MIN_POSITIVE);
        let symmetric = (&matrix - matrix.transpose()).amax() <= 1e-12 * scale;
        Self {
            dim: matrix.nrows(),
            dense: Some(matrix),
            action: None,
            adjoint: None,
            symmetric,
            positive_definite: false,
        }
    }

    pub fn from_action(
        dim: usize,
        action: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            dense: None,
            action: Some(Arc::new(action)),
            adjoint: None,
            symmetric: false,
            positive_definite: false,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_dense(DMatrix::identity(dim, dim)).assume_positive_definite()
    }

    pub fn with_adjoint(
        mut self,
        adjoint: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        self.adjoint = Some(Arc::new(adjoint));
        self
    }

    /// Declare the operator self-adjoint; the action then doubles as its adjoint.
    pub fn assume_symmetric(mut self) -> Self {
        self.symmetric = true;
        self
    }

    /// Declare the operator symmetric positive definite (enables conjugate gradients).
    pub fn assume_positive_definite(mut self) -> Self {
        self.symmetric = true;
        self.positive_definite = true;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dense(&self) -> Option<&DMatrix<f64>> {
        self.dense.as_ref()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn is_positive_definite(&self) -> bool {
        self.positive_definite
    }

    pub fn has_adjoint(&self) -> bool {
        self.dense.is_some() || self.symmetric || self.adjoint.is_some()
    }

    pub fn apply(&self, w: &DVector<f64>) -> DVector<f64> {
        debug_assert_eq!(w.len(), self.dim);
        match (&self.dense, &self.action) {
            (Some(m), _) => m * w,
            (None, Some(f)) => f(w),
            (None, None) => unreachable!("operator without realization"),
        }
    }

    pub fn try_apply(&self, w: &DVector<f64>) -> Result<DVector<f64>> {
        if w.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, found: w.len() });
        }
        Ok(self.apply(w))
    }

    /// Apply the adjoint, if one is known.
    pub fn apply_adjoint(&self, w: &DVector<f64>) -> Option<DVector<f64>> {
        if let Some(m) = &self.dense {
            return Some(m.tr_mul(w));
        }
        if self.symmetric {
            return Some(self.apply(w));
        }
        self.adjoint.as_ref().map(|f| f(w))
    }

    /// The adjoint as an operator in its own right.
    pub fn adjoint(&self) -> Option<LinearOperator> {
        if let Some(m) = &self.dense {
            let mut op = LinearOperator::from_dense(m.transpose());
            op.positive_definite = self.positive_definite;
            return Some(op);
        }
        if self.symmetric {
            return Some(self.clone());
        }
        let adjoint = self.adjoint.clone()?;
        let action = self.action.clone()?;
        Some(Self {
            dim: self.dim,
            dense: None,
            action: Some(adjoint),
            adjoint: Some(action),
            symmetric: false,
            positive_definite: false,
        })
    }

    /// Dense matrix of the operator, built column by column if necessary.
    pub fn to_dense(&self) -> DMatrix<f64> {
        if let Some(m) = &self.dense {
            return m.clone();
        }
        let mut m = DMatrix::zeros(self.dim, self.dim);
        let mut e = DVector::zeros(self.dim);
        for j in 0..self.dim {
            e[j] = 1.0;
            m.set_column(j, &self.apply(&e));
            e[j] = 0.0;
        }
        m
    }

    /// `sum_k c_k L_k`, dense when every term is dense.
    pub fn linear_combination(terms: Vec<(f64, LinearOperator)>) -> Result<LinearOperator> {
        let dim = terms
            .first()
            .map(|(_, op)| op.dim)
            .ok_or_else(|| Error::InvalidArgument("empty linear combination".into()))?;
        if let Some((_, op)) = terms.iter().find(|(_, op)| op.dim != dim) {
            return Err(Error::Dimension { expected: dim, found: op.dim });
        }
        let symmetric = terms.iter().all(|(_, op)| op.symmetric);
        if terms.iter().all(|(_, op)| op.dense.is_some()) {
            let mut sum = DMatrix::zeros(dim, dim);
            for (c, op) in &terms {
                sum += op.dense.as_ref().unwrap() * *c;
            }
            let mut op = LinearOperator::from_dense(sum);
            op.symmetric |= symmetric;
            return Ok(op);
        }
        let terms = Arc::new(terms);
        let forward = terms.clone();
        let mut op = LinearOperator::from_action(dim, move |w| {
            let mut out = DVector::zeros(w.len());
            for (c, op) in forward.iter() {
                out.axpy(*c, &op.apply(w), 1.0);
            }
            out
        });
        if symmetric {
            op = op.assume_symmetric();
        } else if terms.iter().all(|(_, op)| op.has_adjoint()) {
            let backward = terms.clone();
            op = op.with_adjoint(move |w| {
                let mut out = DVector::zeros(w.len());
                for (c, op) in backward.iter() {
                    out.axpy(*c, &op.apply_adjoint(w).unwrap(), 1.0);
                }
                out
            });
        }
        Ok(op)
    }

    /// `self - other`.
    pub fn difference(&self, other: &LinearOperator) -> Result<LinearOperator> {
        Self::linear_combination(vec![(1.0, self.clone()), (-1.0, other.clone())])
    }

    /// `outer ∘ inner`, i.e. `w -> outer(inner(w))`.
    pub fn compose(outer: &LinearOperator, inner: &LinearOperator) -> Result<LinearOperator> {
        if outer.dim != inner.dim {
            return Err(Error::Dimension { expected: outer.dim, found: inner.dim });
        }
        if let (Some(a), Some(b)) = (&outer.dense, &inner.dense) {
            return Ok(LinearOperator::from_dense(a * b));
        }
        let (o, i) = (outer.clone(), inner.clone());
        let mut op = LinearOperator::from_action(outer.dim, move |w| o.apply(&i.apply(w)));
        if outer.has_adjoint() && inner.has_adjoint() {
            let (o, i) = (outer.clone(), inner.clone());
            op = op.with_adjoint(move |w| {
                i.apply_adjoint(&o.apply_adjoint(w).unwrap()).unwrap()
            });
        }
        Ok(op)
    }
}
