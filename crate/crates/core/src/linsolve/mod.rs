//! Linear solves `L w = f` and operator-norm estimates.

mod krylov;

use nalgebra::{DMatrix, DVector, LU};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::LinearOperator;
use crate::state::{NormKind, StateVector};

/// Seed for the random start vectors of power iterations.
pub const NORM_SEED: u64 = 0x5EED;
pub const DEFAULT_POWER_ITERATIONS: usize = 200;
/// Relative pivot size below which a dense factorization is declared singular.
pub const SINGULAR_PIVOT: f64 = 1e-14;
/// Largest operator that is assembled densely when only an action is available.
pub const DENSE_ASSEMBLY_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    /// Dense LU when a dense realization exists, otherwise CG for SPD operators
    /// and GMRES for the rest.
    #[default]
    Auto,
    DenseLu,
    ConjugateGradient,
    Gmres,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub method: SolveMethod,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub restart: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { method: SolveMethod::Auto, tolerance: 1e-12, max_iterations: 5000, restart: 30 }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "solver tolerance must lie in (0, 1), got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 || self.restart == 0 {
            return Err(Error::InvalidArgument(
                "solver iteration limits must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// A reusable solver for one operator: an LU factorization or a Krylov setup.
pub enum Factorization {
    Dense { lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>, matrix: DMatrix<f64> },
    Krylov { op: LinearOperator, opts: SolveOptions },
}

impl Factorization {
    pub fn new(op: &LinearOperator, opts: &SolveOptions) -> Result<Self> {
        opts.validate()?;
        let use_dense = match opts.method {
            SolveMethod::DenseLu => true,
            SolveMethod::Auto => op.dense().is_some(),
            SolveMethod::ConjugateGradient | SolveMethod::Gmres => false,
        };
        if opts.method == SolveMethod::ConjugateGradient && !op.is_positive_definite() {
            return Err(Error::InvalidArgument(
                "conjugate gradients requires a symmetric positive definite operator".into(),
            ));
        }
        if !use_dense {
            return Ok(Self::Krylov { op: op.clone(), opts: *opts });
        }
        if op.dense().is_none() && op.dim() > DENSE_ASSEMBLY_LIMIT {
            return Err(Error::Unsupported(format!(
                "dense LU for a matrix-free operator of dimension {} exceeds {}",
                op.dim(),
                DENSE_ASSEMBLY_LIMIT
            )));
        }
        let matrix = op.to_dense();
        let scale = matrix.amax();
        let lu = matrix.clone().lu();
        let min_pivot = (0..matrix.nrows())
            .map(|i| lu.u()[(i, i)].abs())
            .fold(f64::INFINITY, f64::min);
        if !(min_pivot > SINGULAR_PIVOT * scale) {
            return Err(Error::SingularOperator { residual: 1.0 });
        }
        Ok(Self::Dense { lu, matrix })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Dense { matrix, .. } => matrix.nrows(),
            Self::Krylov { op, .. } => op.dim(),
        }
    }

    pub fn solve(&self, f: &DVector<f64>) -> Result<DVector<f64>> {
        if f.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: f.len() });
        }
        let f_norm = f.norm();
        if f_norm == 0.0 {
            return Ok(DVector::zeros(f.len()));
        }
        match self {
            Self::Dense { lu, matrix } => {
                let mut w = lu.solve(f).ok_or(Error::SingularOperator { residual: 1.0 })?;
                // one step of iterative refinement
                let r = f - matrix * &w;
                if let Some(dw) = lu.solve(&r) {
                    w += dw;
                }
                let residual = (f - matrix * &w).norm() / f_norm;
                if !residual.is_finite() || residual > 1e-8 {
                    return Err(Error::SingularOperator { residual });
                }
                Ok(w)
            }
            Self::Krylov { op, opts } => {
                if op.is_positive_definite() && opts.method != SolveMethod::Gmres {
                    krylov::conjugate_gradient(op, f, opts.tolerance, opts.max_iterations)
                } else {
                    krylov::gmres(op, f, opts.tolerance, opts.max_iterations, opts.restart)
                }
            }
        }
    }
}

/// Solve `L w = f`.
pub fn solve(op: &LinearOperator, f: &StateVector, opts: &SolveOptions) -> Result<StateVector> {
    if op.dim() != f.len() {
        return Err(Error::Dimension { expected: op.dim(), found: f.len() });
    }
    let w = Factorization::new(op, opts)?.solve(f.values())?;
    f.with_values(w).map_err(|_| Error::SingularOperator { residual: f64::NAN })
}

/// Solve on raw values.
pub fn solve_values(
    op: &LinearOperator,
    f: &DVector<f64>,
    opts: &SolveOptions,
) -> Result<DVector<f64>> {
    Factorization::new(op, opts)?.solve(f)
}

fn random_unit(dim: usize, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
    let n: f64 = v.norm();
    v / n
}

fn max_row_sum(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|row| row.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Power iteration for the top eigenvalue of a symmetric positive
/// semidefinite map given by `normal`; returns `sqrt` of it, estimated as
/// `||forward(v)||` at the final unit vector.
fn power_iteration(
    dim: usize,
    iterations: usize,
    forward: impl Fn(&DVector<f64>) -> Result<DVector<f64>>,
    normal: impl Fn(&DVector<f64>) -> Result<DVector<f64>>,
) -> Result<f64> {
    let mut v = random_unit(dim, NORM_SEED);
    let mut estimate = forward(&v)?.norm();
    for _ in 0..iterations {
        let next = normal(&v)?;
        let n = next.norm();
        if n == 0.0 || !n.is_finite() {
            return Ok(if n == 0.0 { 0.0 } else { f64::INFINITY });
        }
        v = next / n;
        let updated = forward(&v)?.norm();
        let converged = (updated - estimate).abs() <= 1e-15 * updated;
        estimate = updated;
        if converged {
            break;
        }
    }
    Ok(estimate)
}

/// Operator norm induced by `norm`.
///
/// Sup norm: the exact maximum absolute row sum of the dense realization.
/// Discrete L²: power iteration on `LᵀL`. The uniform cell weight cancels,
/// so this is the spectral norm.
pub fn estimate_operator_norm(op: &LinearOperator, norm: NormKind, iterations: usize) -> Result<f64> {
    match norm {
        NormKind::Sup => op.dense().map(max_row_sum).ok_or_else(|| {
            Error::Unsupported("sup-norm operator norm needs a dense realization".into())
        }),
        NormKind::DiscreteL2 => {
            if !op.has_adjoint() {
                return Err(Error::Unsupported(
                    "spectral norm estimation needs the adjoint action".into(),
                ));
            }
            power_iteration(
                op.dim(),
                iterations,
                |v| Ok(op.apply(v)),
                |v| Ok(op.apply_adjoint(&op.apply(v)).expect("adjoint checked")),
            )
        }
    }
}

/// `||L^{-1}||` in the norm's induced operator norm.
pub fn estimate_inverse_norm(op: &LinearOperator, norm: NormKind, opts: &SolveOptions) -> Result<f64> {
    match norm {
        NormKind::Sup => {
            let fact = Factorization::new(op, &SolveOptions { method: SolveMethod::DenseLu, ..*opts })?;
            let Factorization::Dense { lu, .. } = &fact else { unreachable!() };
            let inverse = lu.try_inverse().ok_or(Error::SingularOperator { residual: 1.0 })?;
            Ok(max_row_sum(&inverse))
        }
        NormKind::DiscreteL2 => {
            let adjoint = op.adjoint().ok_or_else(|| {
                Error::Unsupported("inverse norm estimation needs the adjoint action".into())
            })?;
            let forward = Factorization::new(op, opts)?;
            let backward = Factorization::new(&adjoint, opts)?;
            power_iteration(
                op.dim(),
                10 * DEFAULT_POWER_ITERATIONS,
                |v| forward.solve(v),
                |v| backward.solve(&forward.solve(v)?),
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh;
    use rand::Rng;
    use std::sync::Arc;

    fn state(values: Vec<f64>) -> StateVector {
        let n = values.len();
        let mesh = Arc::new(Mesh::dirichlet_interval(0.0, 1.0, n).unwrap());
        StateVector::from_vec(mesh, NormKind::DiscreteL2, values).unwrap()
    }

    fn random_matrix(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))
    }

    /// Symmetric positive definite tridiagonal `-Δ_h + 1` on `n` interior nodes.
    fn shifted_laplacian(n: usize) -> DMatrix<f64> {
        let h = 1.0 / (n as f64 + 1.0);
        DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => 2.0 / (h * h) + 1.0,
            1 => -1.0 / (h * h),
            _ => 0.0,
        })
    }

    #[test]
    fn identity_and_diagonal_solves() {
        let f = state(vec![2.0, 4.0, 6.0, 8.0, 10.0]);
        let w = solve(&LinearOperator::identity(5), &f, &SolveOptions::default()).unwrap();
        assert_eq!(w.values(), f.values());
        let two = LinearOperator::from_dense(DMatrix::identity(5, 5) * 2.0);
        let w = solve(&two, &f, &SolveOptions::default()).unwrap();
        for (i, v) in w.values().iter().enumerate() {
            assert!((v - (i + 1) as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut m = DMatrix::identity(4, 4);
        m[(2, 2)] = 0.0;
        let err = solve(&LinearOperator::from_dense(m), &state(vec![1.0; 4]), &SolveOptions::default());
        assert!(matches!(err, Err(Error::SingularOperator { .. })));
    }

    #[test]
    fn dimension_mismatch() {
        let err = solve(&LinearOperator::identity(3), &state(vec![1.0; 4]), &SolveOptions::default());
        assert!(matches!(err, Err(Error::Dimension { .. })));
    }

    #[test]
    fn krylov_methods_match_lu() {
        let n = 40;
        let spd = shifted_laplacian(n);
        let nonsym = &spd + random_matrix(n, 9) * 5.0;
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let f = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        for (matrix, method) in [
            (spd.clone(), SolveMethod::ConjugateGradient),
            (spd, SolveMethod::Gmres),
            (nonsym, SolveMethod::Gmres),
        ] {
            let exact = matrix.clone().lu().solve(&f).unwrap();
            let m2 = matrix.clone();
            let mut op = LinearOperator::from_action(n, move |w| &m2 * w);
            if method == SolveMethod::ConjugateGradient {
                op = op.assume_positive_definite();
            }
            let opts = SolveOptions { method, ..Default::default() };
            let w = solve_values(&op, &f, &opts).unwrap();
            assert!((&matrix * &w - &f).norm() <= 1e-11 * f.norm(), "{method:?}");
            assert!((w - &exact).norm() <= 1e-8 * exact.norm(), "{method:?}");
        }
    }

    #[test]
    fn gmres_reports_singular_system() {
        let n = 6;
        let mut m = DMatrix::<f64>::identity(n, n);
        m[(0, 0)] = 0.0;
        let op = LinearOperator::from_action(n, move |w| &m * w);
        let f = DVector::from_element(n, 1.0);
        let opts = SolveOptions { method: SolveMethod::Gmres, ..Default::default() };
        assert!(matches!(solve_values(&op, &f, &opts), Err(Error::SingularOperator { .. })));
    }

    #[test]
    fn cg_requires_definiteness_flag() {
        let op = LinearOperator::from_dense(shifted_laplacian(5));
        let opts = SolveOptions { method: SolveMethod::ConjugateGradient, ..Default::default() };
        assert!(matches!(Factorization::new(&op, &opts), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn discrete_eigenfunction_solve() {
        // (-Δ_h + 1) w = (π² + 1) sin(πx): the discrete solution is
        // (π² + 1)/(λ_h + 1) sin(πx) with λ_h = 4/h² sin²(πh/2).
        let n = 32;
        let h = 1.0 / (n as f64 + 1.0);
        let pi = std::f64::consts::PI;
        let x: Vec<f64> = (1..=n).map(|i| i as f64 * h).collect();
        let f = state(x.iter().map(|x| (pi * pi + 1.0) * (pi * x).sin()).collect());
        let w = solve(&LinearOperator::from_dense(shifted_laplacian(n)), &f, &SolveOptions::default())
            .unwrap();
        let lambda = 4.0 / (h * h) * (pi * h / 2.0).sin().powi(2);
        let factor = (pi * pi + 1.0) / (lambda + 1.0);
        let mut max_err: f64 = 0.0;
        for (i, xi) in x.iter().enumerate() {
            let discrete = factor * (pi * xi).sin();
            assert!((w.values()[i] - discrete).abs() < 1e-12);
            max_err = max_err.max((w.values()[i] - (pi * xi).sin()).abs());
        }
        assert!(max_err <= h * h, "error {max_err} vs h² {}", h * h);
    }

    #[test]
    fn round_trip_recovers_state() {
        let n = 25;
        let m = random_matrix(n, 11) + DMatrix::identity(n, n) * 10.0;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let w0 = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let f = &m * &w0;
        for method in [SolveMethod::DenseLu, SolveMethod::Gmres] {
            let op = LinearOperator::from_dense(m.clone());
            let w = solve_values(&op, &f, &SolveOptions { method, ..Default::default() }).unwrap();
            assert!((w - &w0).norm() <= 1e-10 * w0.norm());
        }
    }

    #[test]
    fn operator_norm_of_diagonal_and_zero() {
        let d = LinearOperator::from_dense(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0])));
        let est = estimate_operator_norm(&d, NormKind::DiscreteL2, DEFAULT_POWER_ITERATIONS).unwrap();
        assert!((est - 3.0).abs() <= 1e-3);
        let zero = LinearOperator::from_dense(DMatrix::zeros(4, 4));
        assert_eq!(estimate_operator_norm(&zero, NormKind::DiscreteL2, 20).unwrap(), 0.0);
        assert_eq!(estimate_operator_norm(&zero, NormKind::Sup, 20).unwrap(), 0.0);
    }

    #[test]
    fn sup_norm_requires_dense() {
        let op = LinearOperator::from_action(3, |w| w.clone());
        assert!(matches!(estimate_operator_norm(&op, NormKind::Sup, 10), Err(Error::Unsupported(_))));
    }

    #[test]
    fn norms_match_svd_oracle() {
        let m = random_matrix(20, 13);
        let sv = m.clone().singular_values();
        let (smax, smin) = (sv.max(), sv.min());
        let op = LinearOperator::from_dense(m.clone());
        let est = estimate_operator_norm(&op, NormKind::DiscreteL2, DEFAULT_POWER_ITERATIONS).unwrap();
        assert!((est - smax).abs() <= 1e-3 * smax, "{est} vs {smax}");

        // well-conditioned random SPD
        let spd = &m * m.transpose() + DMatrix::identity(20, 20) * 0.5;
        let sv = spd.clone().singular_values();
        let inv = estimate_inverse_norm(&LinearOperator::from_dense(spd), NormKind::DiscreteL2, &SolveOptions::default()).unwrap();
        assert!((inv * sv.min() - 1.0).abs() <= 1e-3, "{inv} vs {}", 1.0 / sv.min());
        let _ = smin;
    }

    #[test]
    fn inverse_norm_of_diagonal() {
        let d = LinearOperator::from_dense(DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 4.0])));
        for kind in [NormKind::Sup, NormKind::DiscreteL2] {
            let est = estimate_inverse_norm(&d, kind, &SolveOptions::default()).unwrap();
            assert!((est - 0.5).abs() <= 1e-3);
        }
    }

    #[test]
    fn shifted_laplacian_inverse_below_reciprocal_shift() {
        let n = 30;
        let h = 1.0 / (n as f64 + 1.0);
        let lambda = 4.0 / (h * h) * (std::f64::consts::PI * h / 2.0).sin().powi(2);
        let est = estimate_inverse_norm(&LinearOperator::from_dense(shifted_laplacian(n)), NormKind::DiscreteL2, &SolveOptions::default()).unwrap();
        assert!((est - 1.0 / (lambda + 1.0)).abs() <= 1e-3 * est);
        assert!(est < 1.0);
    }
}
