//! Quasilinear heat equation `u_t = ∇·[a(u)∇u] + f`, `u(·,0) = u_0`, `u = 0`
//! on the boundary, in the integrated (Volterra) form
//!
//! `A(u) = u(x,t) - ∫_0^t ∇·[a(u)∇u] dτ = u_0(x) + ∫_0^t f dτ`.
//!
//! Space uses the conservative flux `ā_{i+1/2} (u_{i+1} - u_i) / h²` with
//! face-averaged diffusivity; time uses trapezoid weights on the full
//! space-time grid, so consecutive rows differ by a Crank–Nicolson step.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::DENSE_LIMIT;
use crate::error::{Error, Result};
use crate::linearizer::{parabolic_coefficients, Diffusivity, DiffusivityRatio};
use crate::mesh::{Axis, Mesh};
use crate::operator::LinearOperator;
use crate::problem::{Problem, ProblemFamily, ProblemInfo};
use crate::state::NormKind;

#[derive(Clone)]
pub struct ParabolicProblemSpec {
    pub diffusivity: Diffusivity,
    /// `(c, m)` with `0 < c ≤ a ≤ m` and `|a'|, |a''| ≤ m` on the sample range.
    pub bounds: (f64, f64),
    pub domain: (f64, f64),
    pub final_time: f64,
    /// Interior space nodes.
    pub space_nodes: usize,
    /// Time nodes including `t = 0` and `t = T`.
    pub time_nodes: usize,
    pub initial: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Diffusivity bounds are checked for `|u| ≤ sample_range`.
    pub sample_range: f64,
}

impl fmt::Debug for ParabolicProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParabolicProblemSpec")
            .field("bounds", &self.bounds)
            .field("domain", &self.domain)
            .field("final_time", &self.final_time)
            .field("space_nodes", &self.space_nodes)
            .field("time_nodes", &self.time_nodes)
            .finish_non_exhaustive()
    }
}

/// Tridiagonal matrix acting on one time slice.
#[derive(Debug, Clone)]
struct Tridiagonal {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl Tridiagonal {
    fn zeros(n: usize) -> Self {
        Self { lower: vec![0.0; n], diag: vec![0.0; n], upper: vec![0.0; n] }
    }

    fn apply(&self, w: &[f64], out: &mut [f64]) {
        let n = w.len();
        for i in 0..n {
            let mut acc = self.diag[i] * w[i];
            if i > 0 {
                acc += self.lower[i] * w[i - 1];
            }
            if i + 1 < n {
                acc += self.upper[i] * w[i + 1];
            }
            out[i] = acc;
        }
    }

    fn apply_transpose(&self, w: &[f64], out: &mut [f64]) {
        let n = w.len();
        for i in 0..n {
            let mut acc = self.diag[i] * w[i];
            if i > 0 {
                acc += self.upper[i - 1] * w[i - 1];
            }
            if i + 1 < n {
                acc += self.lower[i + 1] * w[i + 1];
            }
            out[i] = acc;
        }
    }

    fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.diag.len();
        (0..n).flat_map(move |i| {
            let mut row = vec![(i, i, self.diag[i])];
            if i > 0 {
                row.push((i, i - 1, self.lower[i]));
            }
            if i + 1 < n {
                row.push((i, i + 1, self.upper[i]));
            }
            row
        })
    }
}

#[derive(Clone)]
pub struct ParabolicProblem {
    mesh: Arc<Mesh>,
    a: Diffusivity,
    nx: usize,
    nt: usize,
    h: f64,
    dt: f64,
    domain: (f64, f64),
    final_time: f64,
    initial: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for ParabolicProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParabolicProblem")
            .field("nx", &self.nx)
            .field("nt", &self.nt)
            .field("h", &self.h)
            .field("dt", &self.dt)
            .finish_non_exhaustive()
    }
}

pub fn make_parabolic_problem(spec: ParabolicProblemSpec) -> Result<ParabolicProblem> {
    let invalid = |e: Error| Error::InvalidSpec(e.to_string());
    if !(spec.final_time.is_finite() && spec.final_time > 0.0) {
        return Err(Error::InvalidSpec(format!("final time must be positive, got {}", spec.final_time)));
    }
    let space = Axis::interior(spec.domain.0, spec.domain.1, spec.space_nodes).map_err(invalid)?;
    let time = Axis::closed(0.0, spec.final_time, spec.time_nodes).map_err(invalid)?;

    let (c, m) = spec.bounds;
    if !(c > 0.0 && m >= c) {
        return Err(Error::InvalidSpec(format!("need 0 < c <= m, got c = {c}, m = {m}")));
    }
    let a = &spec.diffusivity;
    for k in 0..=40 {
        let u = spec.sample_range * (k as f64 / 20.0 - 1.0);
        let (av, dav, ddav) = (a.a(u), a.da(u), a.dda(u));
        if !(c <= av && av <= m) || dav.abs() > m || ddav.abs() > m {
            return Err(Error::InvalidSpec(format!(
                "diffusivity bounds violated at u = {u}: a = {av}, a' = {dav}, a'' = {ddav}"
            )));
        }
        let step = 1e-4;
        let slope = (a.gamma(u + step) - a.gamma(u - step)) / (2.0 * step);
        if (slope - av).abs() > 1e-8 * (1.0 + av.abs()) {
            return Err(Error::InvalidSpec(format!("γ'(u) = {slope} differs from a(u) = {av} at u = {u}")));
        }
    }
    if a.gamma(0.0).abs() > 1e-14 {
        return Err(Error::InvalidSpec(format!("γ(0) = {} must vanish", a.gamma(0.0))));
    }

    let (h, dt) = (space.spacing(), time.spacing());
    Ok(ParabolicProblem {
        mesh: Arc::new(Mesh::space_time(space, time)),
        a: spec.diffusivity,
        nx: spec.space_nodes,
        nt: spec.time_nodes,
        h,
        dt,
        domain: spec.domain,
        final_time: spec.final_time,
        initial: spec.initial,
    })
}

impl ParabolicProblem {
    pub fn space_nodes(&self) -> usize {
        self.nx
    }

    pub fn time_nodes(&self) -> usize {
        self.nt
    }

    pub fn space_step(&self) -> f64 {
        self.h
    }

    pub fn time_step(&self) -> f64 {
        self.dt
    }

    pub fn diffusivity(&self) -> &Diffusivity {
        &self.a
    }

    /// Trapezoid weight of time node `k` in `∫_0^{t_n}`.
    fn volterra_weight(&self, n: usize, k: usize) -> f64 {
        if n == 0 || k > n {
            0.0
        } else if k == 0 || k == n {
            0.5 * self.dt
        } else {
            self.dt
        }
    }

    fn slice<'a>(&self, u: &'a DVector<f64>, n: usize) -> &'a [f64] {
        &u.as_slice()[n * self.nx..(n + 1) * self.nx]
    }

    /// Slice values with the zero Dirichlet nodes attached at both ends.
    fn extended(&self, slice: &[f64]) -> Vec<f64> {
        let mut ext = Vec::with_capacity(self.nx + 2);
        ext.push(0.0);
        ext.extend_from_slice(slice);
        ext.push(0.0);
        ext
    }

    /// `∇_h·[ā ∇_h u]` on one slice.
    pub fn flux_divergence(&self, slice: &[f64]) -> DVector<f64> {
        let ext = self.extended(slice);
        let inv_h2 = 1.0 / (self.h * self.h);
        let flux: Vec<f64> = ext
            .windows(2)
            .map(|p| 0.5 * (self.a.a(p[0]) + self.a.a(p[1])) * (p[1] - p[0]))
            .collect();
        DVector::from_fn(self.nx, |i, _| (flux[i + 1] - flux[i]) * inv_h2)
    }

    /// Linearized face fluxes `κ̄ (w_{i+1} - w_i) + d (α(u_i) w_i + α(u_{i+1}) w_{i+1}) / 2`,
    /// differenced over faces. With `κ = a, α = a'` this is the exact
    /// derivative of [`Self::flux_divergence`]; with `κ = γ/u`,
    /// `α = a/u - γ/u²` it is its integral along `t u`, `t ∈ [0, 1]`.
    fn face_operator(&self, slice: &[f64], kappa: impl Fn(f64) -> f64, alpha: impl Fn(f64) -> f64) -> Tridiagonal {
        let ext = self.extended(slice);
        let inv_h2 = 1.0 / (self.h * self.h);
        let kappa_ext: Vec<f64> = ext.iter().map(|&v| kappa(v)).collect();
        let alpha_ext: Vec<f64> = ext.iter().map(|&v| alpha(v)).collect();
        // d G_f / d w_f and d G_f / d w_{f+1} for faces f = 0..=nx
        let (left, right): (Vec<f64>, Vec<f64>) = (0..=self.nx)
            .map(|f| {
                let k = 0.5 * (kappa_ext[f] + kappa_ext[f + 1]);
                let d = ext[f + 1] - ext[f];
                (-k + 0.5 * d * alpha_ext[f], k + 0.5 * d * alpha_ext[f + 1])
            })
            .unzip();
        let mut t = Tridiagonal::zeros(self.nx);
        for i in 0..self.nx {
            let e = i + 1;
            t.diag[i] = (left[e] - right[e - 1]) * inv_h2;
            t.upper[i] = right[e] * inv_h2;
            t.lower[i] = -left[e - 1] * inv_h2;
        }
        t
    }

    fn derivative_slices(&self, u: &DVector<f64>) -> Vec<Tridiagonal> {
        (0..self.nt)
            .map(|n| self.face_operator(self.slice(u, n), |v| self.a.a(v), |v| self.a.da(v)))
            .collect()
    }

    fn closed_form_slices(&self, u: &DVector<f64>) -> Vec<Tridiagonal> {
        (0..self.nt)
            .map(|n| {
                self.face_operator(
                    self.slice(u, n),
                    |v| self.a.ratio(DiffusivityRatio::Mean, v),
                    |v| self.a.ratio(DiffusivityRatio::FirstMoment, v),
                )
            })
            .collect()
    }

    /// Closed-form space operator on one slice using the expanded
    /// four-coefficient form with central differences. Agrees with the
    /// conservative closed form to `O(h²)` for smooth states.
    pub fn expanded_space_operator(&self, slice: &[f64]) -> DMatrix<f64> {
        let ext = self.extended(slice);
        let (h, nx) = (self.h, self.nx);
        let inv_h2 = 1.0 / (h * h);
        let mut m = DMatrix::zeros(nx, nx);
        let flux: Vec<f64> = ext.iter().map(|&v| self.a.ratio(DiffusivityRatio::Mean, v)).collect();
        for i in 0..nx {
            let e = i + 1;
            let c = parabolic_coefficients(&self.a, ext[e]);
            let (fl, fr) = (0.5 * (flux[e - 1] + flux[e]), 0.5 * (flux[e] + flux[e + 1]));
            let lap_u = (ext[e + 1] - 2.0 * ext[e] + ext[e - 1]) * inv_h2;
            let grad_u = (ext[e + 1] - ext[e - 1]) / (2.0 * h);
            m[(i, i)] += -(fl + fr) * inv_h2 + c.w * lap_u + c.grad2 * grad_u * grad_u;
            if i > 0 {
                m[(i, i - 1)] += fl * inv_h2 - c.grad * grad_u / (2.0 * h);
            }
            if i + 1 < nx {
                m[(i, i + 1)] += fr * inv_h2 + c.grad * grad_u / (2.0 * h);
            }
        }
        m
    }

    /// `w - Σ_k c_{n,k} S_k w_k` for per-slice operators `S_k`.
    fn volterra_apply(&self, slices: &[Tridiagonal], w: &DVector<f64>) -> DVector<f64> {
        let nx = self.nx;
        let mut out = w.clone();
        let mut applied = vec![0.0; nx * self.nt];
        for (k, s) in slices.iter().enumerate() {
            s.apply(self.slice(w, k), &mut applied[k * nx..(k + 1) * nx]);
        }
        for n in 1..self.nt {
            for k in 0..=n {
                let c = self.volterra_weight(n, k);
                for i in 0..nx {
                    out[n * nx + i] -= c * applied[k * nx + i];
                }
            }
        }
        out
    }

    fn volterra_apply_adjoint(&self, slices: &[Tridiagonal], z: &DVector<f64>) -> DVector<f64> {
        let nx = self.nx;
        let mut out = z.clone();
        let mut gathered = vec![0.0; nx];
        let mut applied = vec![0.0; nx];
        for (k, s) in slices.iter().enumerate() {
            gathered.iter_mut().for_each(|g| *g = 0.0);
            for n in k.max(1)..self.nt {
                let c = self.volterra_weight(n, k);
                for i in 0..nx {
                    gathered[i] += c * z[n * nx + i];
                }
            }
            s.apply_transpose(&gathered, &mut applied);
            for i in 0..nx {
                out[k * nx + i] -= applied[i];
            }
        }
        out
    }

    fn volterra_operator(&self, slices: Vec<Tridiagonal>) -> LinearOperator {
        let dim = self.mesh.len();
        if dim <= DENSE_LIMIT {
            let nx = self.nx;
            let mut m = DMatrix::identity(dim, dim);
            for (k, s) in slices.iter().enumerate() {
                for n in k.max(1)..self.nt {
                    let c = self.volterra_weight(n, k);
                    for (i, j, v) in s.entries() {
                        m[(n * nx + i, k * nx + j)] -= c * v;
                    }
                }
            }
            return LinearOperator::from_dense(m);
        }
        let slices = Arc::new(slices);
        let (fwd, bwd) = (slices.clone(), slices);
        let (p1, p2) = (self.clone(), self.clone());
        LinearOperator::from_action(dim, move |w| p1.volterra_apply(&fwd, w))
            .with_adjoint(move |z| p2.volterra_apply_adjoint(&bwd, z))
    }

    /// `u_0(x) + ∫_0^t f(x, τ) dτ` with the same trapezoid weights as the operator.
    pub fn right_hand_side(&self, source: impl Fn(f64, f64) -> f64) -> DVector<f64> {
        let x = self.mesh.axis(0).coords();
        let t = self.mesh.axis(1).coords();
        let nx = self.nx;
        DVector::from_fn(self.mesh.len(), |idx, _| {
            let (i, n) = (idx % nx, idx / nx);
            let integral: f64 = (0..=n).map(|k| self.volterra_weight(n, k) * source(x[i], t[k])).sum();
            (self.initial)(x[i]) + integral
        })
    }
}

impl Problem for ParabolicProblem {
    fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    fn norm_kind(&self) -> NormKind {
        NormKind::DiscreteL2
    }

    fn info(&self) -> ProblemInfo {
        ProblemInfo {
            family: ProblemFamily::Parabolic,
            parameters: vec![
                ("space_nodes".into(), self.nx as f64),
                ("time_nodes".into(), self.nt as f64),
                ("x_lo".into(), self.domain.0),
                ("x_hi".into(), self.domain.1),
                ("final_time".into(), self.final_time),
            ],
        }
    }

    fn evaluate(&self, u: &DVector<f64>) -> DVector<f64> {
        let nx = self.nx;
        let fluxes: Vec<DVector<f64>> =
            (0..self.nt).map(|k| self.flux_divergence(self.slice(u, k))).collect();
        let mut out = u.clone();
        for n in 1..self.nt {
            for (k, b) in fluxes.iter().enumerate().take(n + 1) {
                let c = self.volterra_weight(n, k);
                for i in 0..nx {
                    out[n * nx + i] -= c * b[i];
                }
            }
        }
        out
    }

    fn derivative_action(&self, u: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        self.volterra_apply(&self.derivative_slices(u), w)
    }

    fn derivative_operator(&self, u: &DVector<f64>) -> LinearOperator {
        self.volterra_operator(self.derivative_slices(u))
    }

    fn closed_form_linearization(&self, u: &DVector<f64>) -> Option<LinearOperator> {
        Some(self.volterra_operator(self.closed_form_slices(u)))
    }
}
