//! Ratio coefficients with removable singularities at `u = 0`.
//!
//! Each ratio is a difference quotient whose numerator vanishes at zero to
//! the same order as its denominator. Away from zero the literal quotient is
//! returned; inside the switch threshold the Taylor limit is used instead.

use std::fmt;
use std::sync::Arc;

use super::quadrature::QuadratureRule;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Switch threshold for first- and second-order ratios.
pub const RATIO_SWITCH: f64 = 1e-7;

/// Switch threshold for the cubic ratio `(a'u^2 - 2ua + 2γ)/u^3`, whose literal
/// form loses about `eps/u^2` to cancellation.
pub const CUBIC_RATIO_SWITCH: f64 = 1e-3;

/// Literal `numerator() / denominator` outside `[-eps, eps]`, `limit()` inside.
pub fn removable_ratio(
    u: f64,
    eps: f64,
    literal: impl FnOnce() -> f64,
    limit: impl FnOnce() -> f64,
) -> f64 {
    if u.abs() > eps {
        literal()
    } else {
        limit()
    }
}

/// A scalar nonlinearity `g` with `g(0) = 0` and its derivative.
#[derive(Clone)]
pub struct Nonlinearity {
    value: ScalarFn,
    derivative: ScalarFn,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity").finish_non_exhaustive()
    }
}

impl Nonlinearity {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { value: Arc::new(value), derivative: Arc::new(derivative) }
    }

    pub fn value(&self, u: f64) -> f64 {
        (self.value)(u)
    }

    pub fn derivative(&self, u: f64) -> f64 {
        (self.derivative)(u)
    }

    /// `g(u)/u`, with limit `g'(0)`.
    pub fn over_u(&self, u: f64) -> f64 {
        removable_ratio(u, RATIO_SWITCH, || self.value(u) / u, || self.derivative(0.0))
    }
}

/// Which diffusivity ratio to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffusivityRatio {
    /// `(a(u) - a(0))/u -> a'(0)`
    Increment,
    /// `γ(u)/u -> a(0)`
    Mean,
    /// `(u a(u) - γ(u))/u^2 -> a'(0)/2`
    FirstMoment,
    /// `(a'(u) u^2 - 2u a(u) + 2γ(u))/u^3 -> a''(0)/3`
    SecondMoment,
}

/// A diffusivity `a(u)` with derivatives and antiderivative `γ(u) = ∫_0^u a`.
#[derive(Clone)]
pub struct Diffusivity {
    a: ScalarFn,
    da: ScalarFn,
    dda: ScalarFn,
    gamma: ScalarFn,
    gamma_supplied: bool,
}

impl fmt::Debug for Diffusivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Diffusivity")
            .field("gamma_supplied", &self.gamma_supplied)
            .finish_non_exhaustive()
    }
}

impl Diffusivity {
    /// When `gamma` is `None` it is computed by adaptive Simpson quadrature of `a`.
    pub fn new(a: ScalarFn, da: ScalarFn, dda: ScalarFn, gamma: Option<ScalarFn>) -> Self {
        let gamma_supplied = gamma.is_some();
        let gamma = gamma.unwrap_or_else(|| {
            let a = a.clone();
            Arc::new(move |u: f64| adaptive_simpson(&*a, 0.0, u, 1e-13, 40))
        });
        Self { a, da, dda, gamma, gamma_supplied }
    }

    /// Constant diffusivity `a(u) = value`.
    pub fn constant(value: f64) -> Self {
        Self::new(
            Arc::new(move |_| value),
            Arc::new(|_| 0.0),
            Arc::new(|_| 0.0),
            Some(Arc::new(move |u| value * u)),
        )
    }

    pub fn a(&self, u: f64) -> f64 {
        (self.a)(u)
    }

    pub fn da(&self, u: f64) -> f64 {
        (self.da)(u)
    }

    pub fn dda(&self, u: f64) -> f64 {
        (self.dda)(u)
    }

    pub fn gamma(&self, u: f64) -> f64 {
        (self.gamma)(u)
    }

    pub fn gamma_supplied(&self) -> bool {
        self.gamma_supplied
    }

    pub fn ratio(&self, which: DiffusivityRatio, u: f64) -> f64 {
        match which {
            DiffusivityRatio::Increment => removable_ratio(
                u,
                RATIO_SWITCH,
                || (self.a(u) - self.a(0.0)) / u,
                || self.da(0.0),
            ),
            DiffusivityRatio::Mean => {
                removable_ratio(u, RATIO_SWITCH, || self.gamma(u) / u, || self.a(0.0))
            }
            DiffusivityRatio::FirstMoment => removable_ratio(
                u,
                RATIO_SWITCH,
                || (u * self.a(u) - self.gamma(u)) / (u * u),
                || 0.5 * self.da(0.0),
            ),
            DiffusivityRatio::SecondMoment => removable_ratio(
                u,
                CUBIC_RATIO_SWITCH,
                || (self.da(u) * u * u - 2.0 * u * self.a(u) + 2.0 * self.gamma(u)) / (u * u * u),
                // ∫_0^1 t^2 a''(tu) dt, equal to a''(0)/3 at u = 0
                || {
                    let rule = QuadratureRule::default();
                    rule.integrate(|t| t * t * self.dda(t * u))
                },
            ),
        }
    }
}

/// The pointwise coefficients of the expanded space-time linearization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolicCoefficients {
    /// `(a(u) - a(0))/u`, the flux-increment ratio.
    pub lap: f64,
    /// `a(u)/u - γ(u)/u^2`, multiplying `(Δu) w`.
    pub w: f64,
    /// `a(u)/u - γ(u)/u^2`, multiplying `∇u·∇w`.
    pub grad: f64,
    /// `a'(u)/u - 2a(u)/u^2 + 2γ(u)/u^3`, multiplying `|∇u|^2 w`.
    pub grad2: f64,
    /// `γ(u)/u`, the averaged diffusivity in the flux term `∇·[(γ(u)/u) ∇w]`.
    pub flux: f64,
}

pub fn parabolic_coefficients(a: &Diffusivity, u: f64) -> ParabolicCoefficients {
    let first = a.ratio(DiffusivityRatio::FirstMoment, u);
    ParabolicCoefficients {
        lap: a.ratio(DiffusivityRatio::Increment, u),
        w: first,
        grad: first,
        grad2: a.ratio(DiffusivityRatio::SecondMoment, u),
        flux: a.ratio(DiffusivityRatio::Mean, u),
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64, depth: u32) -> f64 {
    if lo == hi {
        return 0.0;
    }
    let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
    let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, lo, hi, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (lo + hi);
    let (lm, rm) = (0.5 * (lo + mid), 0.5 * (mid + hi));
    let (flm, frm) = (f(lm), f(rm));
    let left = (mid - lo) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (hi - mid) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, lo, mid, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, mid, hi, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic() -> Diffusivity {
        // a(u) = 1 + u + u^2
        Diffusivity::new(
            Arc::new(|u| 1.0 + u + u * u),
            Arc::new(|u| 1.0 + 2.0 * u),
            Arc::new(|_| 2.0),
            Some(Arc::new(|u| u + u * u / 2.0 + u * u * u / 3.0)),
        )
    }

    fn linear() -> Diffusivity {
        // a(u) = 1 + u
        Diffusivity::new(
            Arc::new(|u| 1.0 + u),
            Arc::new(|_| 1.0),
            Arc::new(|_| 0.0),
            Some(Arc::new(|u| u + u * u / 2.0)),
        )
    }

    #[test]
    fn taylor_limits_near_zero() {
        let a = quadratic();
        assert!((a.ratio(DiffusivityRatio::FirstMoment, 1e-10) - 0.5).abs() <= 1e-6);
        assert!((a.ratio(DiffusivityRatio::SecondMoment, 1e-10) - 2.0 / 3.0).abs() <= 1e-6);
        assert!((a.ratio(DiffusivityRatio::Increment, 0.0) - 1.0).abs() <= 1e-15);
        assert!((a.ratio(DiffusivityRatio::Mean, 0.0) - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn g_over_u_literal_and_limit() {
        let g = Nonlinearity::new(|u| u * u * u, |u| 3.0 * u * u);
        assert_eq!(g.over_u(2.0), 4.0);
        assert_eq!(g.over_u(0.0), 0.0);
    }

    #[test]
    fn hand_evaluated_coefficients_for_linear_diffusivity() {
        let c = parabolic_coefficients(&linear(), 2.0);
        assert!((c.lap - 1.0).abs() < 1e-15);
        assert!((c.w - 0.5).abs() < 1e-15);
        assert!((c.grad - 0.5).abs() < 1e-15);
        assert!(c.grad2.abs() < 1e-15);
        assert!((c.flux - 2.0).abs() < 1e-15);

        let c0 = parabolic_coefficients(&linear(), 1e-12);
        assert!((c0.w - 0.5).abs() < 1e-12);
        assert!(c0.grad2.abs() < 1e-12);
    }

    #[test]
    fn constant_diffusivity_has_vanishing_coefficients() {
        let a = Diffusivity::constant(2.5);
        for u in [-3.0, -1e-9, 0.0, 1e-5, 0.7, 40.0] {
            let c = parabolic_coefficients(&a, u);
            assert_eq!((c.lap, c.w, c.grad, c.grad2), (0.0, 0.0, 0.0, 0.0), "u={u}");
            assert!((c.flux - 2.5).abs() < 1e-15);
        }
    }

    #[test]
    fn continuous_across_switch() {
        // a(u) = exp(u) has nonzero Taylor terms of every order
        let a = Diffusivity::new(
            Arc::new(f64::exp),
            Arc::new(f64::exp),
            Arc::new(f64::exp),
            Some(Arc::new(|u: f64| u.exp_m1())),
        );
        let g = Nonlinearity::new(|u: f64| u.sin() + u * u, |u: f64| u.cos() + 2.0 * u);
        let within = |f: &dyn Fn(f64) -> f64, eps: f64| {
            for sign in [1.0, -1.0] {
                let jump = (f(sign * 1.001 * eps) - f(sign * 0.999 * eps)).abs();
                assert!(jump <= 1e-6, "jump {jump} at eps {eps}");
            }
        };
        within(&|u| g.over_u(u), RATIO_SWITCH);
        for which in [DiffusivityRatio::Increment, DiffusivityRatio::Mean, DiffusivityRatio::FirstMoment] {
            within(&|u| a.ratio(which, u), RATIO_SWITCH);
        }
        within(&|u| a.ratio(DiffusivityRatio::SecondMoment, u), CUBIC_RATIO_SWITCH);
    }

    #[test]
    fn simpson_fallback_matches_exact_antiderivative() {
        let a = Diffusivity::new(
            Arc::new(|u| 1.0 + u * u),
            Arc::new(|u| 2.0 * u),
            Arc::new(|_| 2.0),
            None,
        );
        for u in [-1.5, -0.2, 0.0, 0.3, 2.0] {
            let exact = u + u * u * u / 3.0;
            assert!((a.gamma(u) - exact).abs() < 1e-12);
        }
        assert!(!a.gamma_supplied());
    }
}
