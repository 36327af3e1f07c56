use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operator::LinearOperator;

/// Conjugate gradients for symmetric positive definite operators, from `x = 0`.
pub(crate) fn conjugate_gradient(
    op: &LinearOperator,
    b: &DVector<f64>,
    tol: f64,
    max_iterations: usize,
) -> Result<DVector<f64>> {
    let b_norm = b.norm();
    let mut x = DVector::zeros(b.len());
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = r.norm_squared();
    for _ in 0..max_iterations {
        if rr.sqrt() <= tol * b_norm {
            return Ok(x);
        }
        let ap = op.apply(&p);
        let curvature = p.dot(&ap);
        if !(curvature > 0.0) {
            return Err(Error::SingularOperator { residual: rr.sqrt() / b_norm });
        }
        let alpha = rr / curvature;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        let rr_next = r.norm_squared();
        p = &r + &p * (rr_next / rr);
        rr = rr_next;
    }
    let residual = (b - op.apply(&x)).norm() / b_norm;
    if residual <= tol {
        Ok(x)
    } else {
        Err(Error::SingularOperator { residual })
    }
}

/// Restarted GMRES with modified Gram–Schmidt and Givens rotations, from `x = 0`.
pub(crate) fn gmres(
    op: &LinearOperator,
    b: &DVector<f64>,
    tol: f64,
    max_iterations: usize,
    restart: usize,
) -> Result<DVector<f64>> {
    let n = b.len();
    let m = restart.clamp(1, n.max(1));
    let b_norm = b.norm();
    let target = tol * b_norm;
    let mut x = DVector::zeros(n);
    let mut r = b.clone();
    let mut beta = b_norm;
    let mut total = 0;

    while beta > target {
        if total >= max_iterations {
            return Err(Error::SingularOperator { residual: beta / b_norm });
        }
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(m + 1);
        basis.push(&r / beta);
        let mut h = DMatrix::<f64>::zeros(m + 1, m);
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = DVector::<f64>::zeros(m + 1);
        g[0] = beta;
        let mut k = 0;

        for j in 0..m {
            let mut w = op.apply(&basis[j]);
            for (i, v) in basis.iter().enumerate() {
                let hij = w.dot(v);
                h[(i, j)] = hij;
                w.axpy(-hij, v, 1.0);
            }
            let h_next = w.norm();
            h[(j + 1, j)] = h_next;
            for i in 0..j {
                let (a, c) = (h[(i, j)], h[(i + 1, j)]);
                h[(i, j)] = cs[i] * a + sn[i] * c;
                h[(i + 1, j)] = -sn[i] * a + cs[i] * c;
            }
            let (a, c) = (h[(j, j)], h[(j + 1, j)]);
            let rho = a.hypot(c);
            if rho == 0.0 {
                return Err(Error::SingularOperator { residual: beta / b_norm });
            }
            cs[j] = a / rho;
            sn[j] = c / rho;
            h[(j, j)] = rho;
            h[(j + 1, j)] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            total += 1;
            k = j + 1;
            if g[j + 1].abs() <= target || total >= max_iterations || h_next <= 1e-300 {
                break;
            }
            basis.push(w / h_next);
        }

        // back substitution on the k x k upper triangle
        let mut y = DVector::<f64>::zeros(k);
        for i in (0..k).rev() {
            let mut acc = g[i];
            for l in i + 1..k {
                acc -= h[(i, l)] * y[l];
            }
            y[i] = acc / h[(i, i)];
        }
        for (i, v) in basis.iter().take(k).enumerate() {
            x.axpy(y[i], v, 1.0);
        }
        r = b - op.apply(&x);
        let beta_next = r.norm();
        if beta_next > target && beta_next >= beta * (1.0 - 1e-10) {
            return Err(Error::SingularOperator { residual: beta_next / b_norm });
        }
        beta = beta_next;
    }
    Ok(x)
}
