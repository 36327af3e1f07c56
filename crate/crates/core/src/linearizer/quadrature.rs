use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss–Legendre rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

pub const DEFAULT_QUADRATURE_NODES: usize = 8;

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::gauss_legendre(DEFAULT_QUADRATURE_NODES).expect("default rule is valid")
    }
}

impl QuadratureRule {
    /// `m`-point Gauss–Legendre rule, exact for polynomials of degree `2m - 1`.
    ///
    /// Roots of `P_m` are found by Newton's method from the Chebyshev-like
    /// initial guesses `cos(pi (i + 3/4) / (m + 1/2))`.
    pub fn gauss_legendre(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("quadrature needs at least one node".into()));
        }
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let mf = m as f64;
        for i in 0..m.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(m, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // map [-1, 1] -> [0, 1]
            nodes[i] = 0.5 * (1.0 - x);
            nodes[m - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[m - 1 - i] = 0.5 * w;
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// `∫_0^1 f(t) dt`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.iter().map(|(t, w)| w * f(t)).sum()
    }
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if m == 0 { 1.0 } else { p1 };
    let dp = if m == 0 { 0.0 } else { m as f64 * (x * p1 - p0) / (x * x - 1.0) };
    (p, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one() {
        for m in 1..=24 {
            let rule = QuadratureRule::gauss_legendre(m).unwrap();
            let sum: f64 = rule.weights().iter().sum();
            assert!((sum - 1.0).abs() <= 1e-14, "m={m}: sum={sum}");
            assert!(rule.nodes().iter().all(|&t| t > 0.0 && t < 1.0));
            assert!(rule.nodes().windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn exact_on_monomials_up_to_degree_2m_minus_1() {
        for m in 1..=16 {
            let rule = QuadratureRule::gauss_legendre(m).unwrap();
            for j in 0..(2 * m) {
                let exact = 1.0 / (j as f64 + 1.0);
                let approx = rule.integrate(|t| t.powi(j as i32));
                assert!((approx - exact).abs() <= 1e-13, "m={m} j={j}: {approx} vs {exact}");
            }
        }
    }

    #[test]
    fn two_point_rule_nodes() {
        let rule = QuadratureRule::gauss_legendre(2).unwrap();
        let d = 0.5 / 3f64.sqrt();
        assert!((rule.nodes()[0] - (0.5 - d)).abs() < 1e-15);
        assert!((rule.weights()[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_nodes_rejected() {
        assert!(QuadratureRule::gauss_legendre(0).is_err());
    }
}
