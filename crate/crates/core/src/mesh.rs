//! Uniform tensor-product meshes.
//!
//! A [`Mesh`] stores the nodes that carry unknowns. For Dirichlet problems the
//! boundary nodes are eliminated, so the stored coordinates are interior
//! points only; for Nyström discretizations of integral operators the
//! endpoints are part of the node set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const UNIFORMITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshKind {
    Interval,
    Rectangle,
    SpaceTimeCylinder,
}

/// One coordinate axis of a mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    coords: Vec<f64>,
    spacing: f64,
}

impl Axis {
    /// Build an axis from explicit coordinates with a declared spacing.
    pub fn new(coords: Vec<f64>, spacing: f64) -> Result<Self> {
        if coords.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "an axis needs at least 3 nodes, got {}",
                coords.len()
            )));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidArgument(format!("spacing must be positive, got {spacing}")));
        }
        for pair in coords.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(Error::InvalidArgument(
                    "axis coordinates must be strictly increasing".into(),
                ));
            }
            if ((pair[1] - pair[0]) - spacing).abs() > UNIFORMITY_TOL * spacing {
                return Err(Error::InvalidArgument("axis spacing is not uniform".into()));
            }
        }
        Ok(Self { coords, spacing })
    }

    /// `n` interior nodes of `[lo, hi]`; the endpoints are Dirichlet nodes and excluded.
    pub fn interior(lo: f64, hi: f64, n: usize) -> Result<Self> {
        check_bounds(lo, hi)?;
        let h = (hi - lo) / (n as f64 + 1.0);
        Self::new((1..=n).map(|i| lo + i as f64 * h).collect(), h)
    }

    /// `n` nodes covering `[lo, hi]` including both endpoints.
    pub fn closed(lo: f64, hi: f64, n: usize) -> Result<Self> {
        check_bounds(lo, hi)?;
        if n < 2 {
            return Err(Error::InvalidArgument("closed axis needs at least 2 nodes".into()));
        }
        let h = (hi - lo) / (n as f64 - 1.0);
        let mut coords: Vec<f64> = (0..n).map(|i| lo + i as f64 * h).collect();
        coords[n - 1] = hi;
        Self::new(coords, h)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

fn check_bounds(lo: f64, hi: f64) -> Result<()> {
    if lo.is_finite() && hi.is_finite() && hi > lo {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("invalid interval [{lo}, {hi}]")))
    }
}

/// Coordinates of a mesh node. Unused components are zero.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    kind: MeshKind,
    axes: Vec<Axis>,
}

impl Mesh {
    pub fn interval(axis: Axis) -> Self {
        Self { kind: MeshKind::Interval, axes: vec![axis] }
    }

    /// Node ordering is x fastest.
    pub fn rectangle(x: Axis, y: Axis) -> Self {
        Self { kind: MeshKind::Rectangle, axes: vec![x, y] }
    }

    /// Space axis first, time axis second; node ordering is space fastest,
    /// so node `n * nx + i` sits at `(x_i, t_n)`.
    pub fn space_time(space: Axis, time: Axis) -> Self {
        Self { kind: MeshKind::SpaceTimeCylinder, axes: vec![space, time] }
    }

    /// Interval mesh of `n` interior nodes of `[lo, hi]`.
    pub fn dirichlet_interval(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Ok(Self::interval(Axis::interior(lo, hi, n)?))
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &Axis {
        &self.axes[i]
    }

    /// Total node count.
    pub fn len(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Product of the axis spacings.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    pub fn point(&self, index: usize) -> Point {
        match self.kind {
            MeshKind::Interval => Point { x: self.axes[0].coords[index], ..Point::default() },
            MeshKind::Rectangle => {
                let nx = self.axes[0].len();
                Point {
                    x: self.axes[0].coords[index % nx],
                    y: self.axes[1].coords[index / nx],
                    t: 0.0,
                }
            }
            MeshKind::SpaceTimeCylinder => {
                let nx = self.axes[0].len();
                Point {
                    x: self.axes[0].coords[index % nx],
                    y: 0.0,
                    t: self.axes[1].coords[index / nx],
                }
            }
        }
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_axis_excludes_endpoints() {
        let axis = Axis::interior(0.0, 1.0, 3).unwrap();
        assert_eq!(axis.coords(), &[0.25, 0.5, 0.75]);
        assert_eq!(axis.spacing(), 0.25);
    }

    #[test]
    fn closed_axis_hits_both_ends() {
        let axis = Axis::closed(-1.0, 1.0, 5).unwrap();
        assert_eq!(axis.coords()[0], -1.0);
        assert_eq!(axis.coords()[4], 1.0);
        assert_eq!(axis.spacing(), 0.5);
    }

    #[test]
    fn rejects_small_or_nonuniform_axes() {
        assert!(Axis::interior(0.0, 1.0, 2).is_err());
        assert!(Axis::new(vec![0.0, 0.1, 0.3], 0.1).is_err());
        assert!(Axis::new(vec![0.0, 0.2, 0.1], 0.1).is_err());
        assert!(Axis::interior(1.0, 0.0, 4).is_err());
    }

    #[test]
    fn rectangle_ordering_is_x_fastest() {
        let mesh = Mesh::rectangle(
            Axis::interior(0.0, 1.0, 3).unwrap(),
            Axis::interior(0.0, 2.0, 3).unwrap(),
        );
        assert_eq!(mesh.len(), 9);
        let p = mesh.point(4);
        assert_eq!((p.x, p.y), (0.5, 1.0));
        assert!((mesh.cell_volume() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn space_time_points() {
        let mesh = Mesh::space_time(
            Axis::interior(0.0, 1.0, 3).unwrap(),
            Axis::closed(0.0, 1.0, 3).unwrap(),
        );
        let p = mesh.point(7);
        assert_eq!((p.x, p.t), (0.5, 1.0));
    }
}
