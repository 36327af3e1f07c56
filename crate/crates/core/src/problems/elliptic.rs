use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{PointFn, DENSE_LIMIT};
use crate::error::{Error, Result};
use crate::linearizer::{removable_ratio, RATIO_SWITCH};
use crate::mesh::{Axis, Mesh, Point};
use crate::operator::LinearOperator;
use crate::problem::{Problem, ProblemFamily, ProblemInfo};
use crate::state::NormKind;

/// `-Δu + g(x,u) = f` in `(lo, hi)^d`, `u = 0` on the boundary, `g(x,0) = 0`.
#[derive(Clone)]
pub struct EllipticProblemSpec {
    pub reaction: PointFn,
    /// `∂g/∂u`
    pub reaction_u: PointFn,
    /// Declared constant `a > 0` with `g(x,u)/u = a + q(x;u)`, `q ≥ 0`.
    pub split: Option<f64>,
    /// 1 or 2.
    pub dimension: usize,
    /// Interior nodes per axis.
    pub nodes: usize,
    pub domain: (f64, f64),
    /// States `|u| ≤ sample_range` used to check the declared split.
    pub sample_range: f64,
}

impl fmt::Debug for EllipticProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EllipticProblemSpec")
            .field("split", &self.split)
            .field("dimension", &self.dimension)
            .field("nodes", &self.nodes)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl EllipticProblemSpec {
    /// One-dimensional problem on `(0, 1)` with reaction `g(u)` independent of `x`.
    pub fn autonomous_1d(
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g_u: impl Fn(f64) -> f64 + Send + Sync + 'static,
        nodes: usize,
    ) -> Self {
        Self {
            reaction: Arc::new(move |_, u| g(u)),
            reaction_u: Arc::new(move |_, u| g_u(u)),
            split: None,
            dimension: 1,
            nodes,
            domain: (0.0, 1.0),
            sample_range: 1.0,
        }
    }

    /// `g(u) = a u + ε u³`, declaring the split constant `a` when `ε ≥ 0`.
    pub fn cubic(a: f64, eps: f64, dimension: usize, nodes: usize) -> Self {
        Self {
            reaction: Arc::new(move |_, u| a * u + eps * u * u * u),
            reaction_u: Arc::new(move |_, u| a + 3.0 * eps * u * u),
            split: (eps >= 0.0).then_some(a),
            dimension,
            nodes,
            domain: (0.0, 1.0),
            sample_range: 1.0,
        }
    }
}

/// 3-point (1D) or 5-point (2D) Dirichlet Laplacian on interior nodes.
#[derive(Debug, Clone, Copy)]
struct Stencil {
    nx: usize,
    ny: usize,
    inv_h2: f64,
}

impl Stencil {
    fn len(&self) -> usize {
        self.nx * self.ny
    }

    /// `-Δ_h w`
    fn apply(&self, w: &DVector<f64>) -> DVector<f64> {
        let (nx, ny) = (self.nx, self.ny);
        let two_d = ny > 1;
        let centre = if two_d { 4.0 } else { 2.0 };
        DVector::from_fn(self.len(), |k, _| {
            let (i, j) = (k % nx, k / nx);
            let mut acc = centre * w[k];
            if i > 0 {
                acc -= w[k - 1];
            }
            if i + 1 < nx {
                acc -= w[k + 1];
            }
            if two_d {
                if j > 0 {
                    acc -= w[k - nx];
                }
                if j + 1 < ny {
                    acc -= w[k + nx];
                }
            }
            acc * self.inv_h2
        })
    }

    fn dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        let mut e = DVector::zeros(n);
        for k in 0..n {
            e[k] = 1.0;
            m.set_column(k, &self.apply(&e));
            e[k] = 0.0;
        }
        m
    }
}

#[derive(Clone)]
pub struct EllipticProblem {
    mesh: Arc<Mesh>,
    stencil: Stencil,
    laplacian: Option<Arc<DMatrix<f64>>>,
    reaction: PointFn,
    reaction_u: PointFn,
    points: Arc<Vec<Point>>,
    split: Option<f64>,
    dimension: usize,
}

impl fmt::Debug for EllipticProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EllipticProblem")
            .field("dimension", &self.dimension)
            .field("unknowns", &self.stencil.len())
            .field("split", &self.split)
            .finish_non_exhaustive()
    }
}

pub fn make_elliptic_problem(spec: EllipticProblemSpec) -> Result<EllipticProblem> {
    let axis = || {
        Axis::interior(spec.domain.0, spec.domain.1, spec.nodes)
            .map_err(|e| Error::InvalidSpec(e.to_string()))
    };
    let mesh = match spec.dimension {
        1 => Mesh::interval(axis()?),
        2 => Mesh::rectangle(axis()?, axis()?),
        d => return Err(Error::InvalidSpec(format!("dimension must be 1 or 2, got {d}"))),
    };
    let h = mesh.axis(0).spacing();
    let stencil = Stencil {
        nx: spec.nodes,
        ny: if spec.dimension == 2 { spec.nodes } else { 1 },
        inv_h2: 1.0 / (h * h),
    };
    let points: Vec<Point> = mesh.points().collect();

    for p in &points {
        let g0 = (spec.reaction)(*p, 0.0);
        if g0.abs() > 1e-14 {
            return Err(Error::InvalidSpec(format!("g(x, 0) = {g0} at x = ({}, {})", p.x, p.y)));
        }
    }
    if let Some(a) = spec.split {
        if !(a > 0.0) {
            return Err(Error::InvalidSpec(format!("split constant a must be positive, got {a}")));
        }
        let samples = [-1.0, -0.75, -0.5, -0.25, -0.1, 0.1, 0.25, 0.5, 0.75, 1.0];
        for p in &points {
            for s in samples {
                let u = s * spec.sample_range;
                let q = (spec.reaction)(*p, u) / u - a;
                if q < -1e-12 {
                    return Err(Error::InvalidSpec(format!(
                        "g(x,u)/u - a = {q:e} < 0 at u = {u}, x = ({}, {})",
                        p.x, p.y
                    )));
                }
            }
        }
    }

    let laplacian = (stencil.len() <= DENSE_LIMIT).then(|| Arc::new(stencil.dense()));
    Ok(EllipticProblem {
        mesh: Arc::new(mesh),
        stencil,
        laplacian,
        reaction: spec.reaction,
        reaction_u: spec.reaction_u,
        points: Arc::new(points),
        split: spec.split,
        dimension: spec.dimension,
    })
}

impl EllipticProblem {
    pub fn split(&self) -> Option<f64> {
        self.split
    }

    /// `-Δ_h w`
    pub fn negative_laplacian(&self, w: &DVector<f64>) -> DVector<f64> {
        self.stencil.apply(w)
    }

    /// `g(x,u)/u` per node with limit `g_u(x,0)`.
    pub fn reaction_ratio(&self, u: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(u.len(), |k, _| {
            let p = self.points[k];
            removable_ratio(
                u[k],
                RATIO_SWITCH,
                || (self.reaction)(p, u[k]) / u[k],
                || (self.reaction_u)(p, 0.0),
            )
        })
    }

    fn reaction_slope(&self, u: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(u.len(), |k, _| (self.reaction_u)(self.points[k], u[k]))
    }

    /// `-Δ_h + diag(c)`; symmetric positive definite when `c ≥ 0`.
    fn shifted(&self, c: DVector<f64>) -> LinearOperator {
        let spd = c.iter().all(|v| *v >= 0.0);
        let op = match &self.laplacian {
            Some(lap) => {
                let mut m = lap.as_ref().clone();
                for (k, v) in c.iter().enumerate() {
                    m[(k, k)] += v;
                }
                LinearOperator::from_dense(m)
            }
            None => {
                let stencil = self.stencil;
                LinearOperator::from_action(stencil.len(), move |w| {
                    stencil.apply(w) + c.component_mul(w)
                })
                .assume_symmetric()
            }
        };
        if spd {
            op.assume_positive_definite()
        } else {
            op
        }
    }
}

impl Problem for EllipticProblem {
    fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    fn norm_kind(&self) -> NormKind {
        NormKind::DiscreteL2
    }

    fn info(&self) -> ProblemInfo {
        let mut parameters = vec![
            ("dimension".into(), self.dimension as f64),
            ("nodes_per_axis".into(), self.stencil.nx as f64),
        ];
        if let Some(a) = self.split {
            parameters.push(("split_a".into(), a));
        }
        ProblemInfo { family: ProblemFamily::Elliptic, parameters }
    }

    fn evaluate(&self, u: &DVector<f64>) -> DVector<f64> {
        let reaction = DVector::from_fn(u.len(), |k, _| (self.reaction)(self.points[k], u[k]));
        self.stencil.apply(u) + reaction
    }

    fn derivative_action(&self, u: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        self.stencil.apply(w) + self.reaction_slope(u).component_mul(w)
    }

    fn derivative_operator(&self, u: &DVector<f64>) -> LinearOperator {
        self.shifted(self.reaction_slope(u))
    }

    fn closed_form_linearization(&self, u: &DVector<f64>) -> Option<LinearOperator> {
        Some(self.shifted(self.reaction_ratio(u)))
    }
}
