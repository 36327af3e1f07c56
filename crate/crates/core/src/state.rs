//! Discrete functions on a mesh and the norms used to measure them.

use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};

/// Which norm a problem is posed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    /// `max_i |v_i|`, the discrete analogue of the norm on continuous functions.
    Sup,
    /// `(sum_i v_i^2 * cell_volume)^(1/2)`.
    #[serde(alias = "l2")]
    DiscreteL2,
}

impl NormKind {
    /// Norm of raw node values. `cell_volume` is ignored for the sup norm.
    pub fn of(self, values: &[f64], cell_volume: f64) -> f64 {
        match self {
            NormKind::Sup => values.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
            NormKind::DiscreteL2 => {
                (values.iter().map(|v| v * v).sum::<f64>() * cell_volume).sqrt()
            }
        }
    }
}

/// Node values on a mesh, tagged with the norm they are measured in.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    values: DVector<f64>,
    mesh: Arc<Mesh>,
    norm_kind: NormKind,
}

impl StateVector {
    pub fn new(mesh: Arc<Mesh>, norm_kind: NormKind, values: DVector<f64>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::Dimension { expected: mesh.len(), found: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidState(format!("non-finite value at node {i}")));
        }
        Ok(Self { values, mesh, norm_kind })
    }

    pub fn from_vec(mesh: Arc<Mesh>, norm_kind: NormKind, values: Vec<f64>) -> Result<Self> {
        Self::new(mesh, norm_kind, DVector::from_vec(values))
    }

    pub fn zeros(mesh: Arc<Mesh>, norm_kind: NormKind) -> Self {
        let n = mesh.len();
        Self { values: DVector::zeros(n), mesh, norm_kind }
    }

    /// Sample `f` at every mesh node.
    pub fn from_fn(
        mesh: Arc<Mesh>,
        norm_kind: NormKind,
        f: impl Fn(Point) -> f64,
    ) -> Result<Self> {
        let values = DVector::from_iterator(mesh.len(), mesh.points().map(f));
        Self::new(mesh, norm_kind, values)
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn into_values(self) -> DVector<f64> {
        self.values
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn norm_kind(&self) -> NormKind {
        self.norm_kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.norm_kind.of(self.values.as_slice(), self.mesh.cell_volume())
    }

    /// Same mesh and norm, new values.
    pub fn with_values(&self, values: DVector<f64>) -> Result<Self> {
        Self::new(self.mesh.clone(), self.norm_kind, values)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        self.with_values(&self.values * factor)
    }

    pub fn same_mesh(&self, other: &StateVector) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh) || self.mesh == other.mesh
    }

    /// `||self - other||` in this vector's norm.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        if !self.same_mesh(other) {
            return Err(Error::Dimension { expected: self.len(), found: other.len() });
        }
        let diff = &self.values - &other.values;
        Ok(self.norm_kind.of(diff.as_slice(), self.mesh.cell_volume()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Axis, Mesh};
    use proptest::prelude::*;

    fn quarter_mesh() -> Arc<Mesh> {
        // four nodes with spacing 0.25
        Arc::new(Mesh::interval(Axis::new(vec![0.0, 0.25, 0.5, 0.75], 0.25).unwrap()))
    }

    #[test]
    fn zero_vector_has_zero_norm() {
        let mesh = quarter_mesh();
        for kind in [NormKind::Sup, NormKind::DiscreteL2] {
            assert_eq!(StateVector::zeros(mesh.clone(), kind).norm(), 0.0);
        }
    }

    #[test]
    fn sup_norm_is_max_abs() {
        assert_eq!(NormKind::Sup.of(&[3.0, -4.0], 1.0), 4.0);
    }

    #[test]
    fn discrete_l2_uses_cell_volume() {
        let v = StateVector::from_vec(quarter_mesh(), NormKind::DiscreteL2, vec![1.0; 4]).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_finite_and_wrong_length() {
        let mesh = quarter_mesh();
        let bad = StateVector::from_vec(mesh.clone(), NormKind::Sup, vec![0.0, f64::NAN, 0.0, 0.0]);
        assert!(matches!(bad, Err(Error::InvalidState(_))));
        let short = StateVector::from_vec(mesh, NormKind::Sup, vec![0.0; 3]);
        assert!(matches!(short, Err(Error::Dimension { .. })));
    }

    proptest! {
        #[test]
        fn norms_are_seminorms(
            a in prop::collection::vec(-10.0..10.0f64, 4),
            b in prop::collection::vec(-10.0..10.0f64, 4),
            s in -5.0..5.0f64,
        ) {
            for kind in [NormKind::Sup, NormKind::DiscreteL2] {
                let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
                let scaled: Vec<f64> = a.iter().map(|x| s * x).collect();
                let (na, nb) = (kind.of(&a, 0.25), kind.of(&b, 0.25));
                prop_assert!(kind.of(&sum, 0.25) <= na + nb + 1e-13);
                prop_assert!((kind.of(&scaled, 0.25) - s.abs() * na).abs() <= 1e-13 * (1.0 + na));
            }
        }
    }
}
