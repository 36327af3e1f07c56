//! Sampled estimates of the constants behind the convergence and
//! invertibility conditions, and the verdicts they imply.
//!
//! Every supremum over the ball `B_R` is replaced by a maximum over a fixed,
//! seeded sample set, so all estimates are lower bounds of the true
//! constants and all verdicts are empirical.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iterate::{feasible_q_interval, FeasibleQ};
use crate::linearizer::Linearizer;
use crate::linsolve::{
    estimate_inverse_norm, estimate_operator_norm, Factorization, SolveOptions,
    DEFAULT_POWER_ITERATIONS, NORM_SEED,
};
use crate::operator::LinearOperator;
use crate::problem::{check_on_mesh, Problem};
use crate::state::{NormKind, StateVector};

/// Above this size the Lipschitz estimate uses probe vectors instead of dense inverses.
pub const EXACT_LIPSCHITZ_LIMIT: usize = 512;
pub const PROBE_VECTORS: usize = 20;
/// Pairs closer than this (relative to `R`) are redrawn.
pub const DEGENERATE_PAIR: f64 = 1e-12;
/// Samples used by the derivative-based cross-check of `q`.
pub const DERIVATIVE_CHECK_SAMPLES: usize = 5;
/// Sample radii as fractions of `R`, used cyclically. The small fractions keep
/// the neighbourhood of the origin represented when `R` is large.
const RADIUS_FRACTIONS: [f64; 8] = [1.0, 0.5, 0.75, 0.25, 0.125, 0.375, 0.0625, 0.625];
/// Offset of the partner state in a close pair, as a fraction of `R`.
const CLOSE_PAIR_OFFSET: f64 = 0.125;

/// Maps `f` over `0..n` on scoped threads, returning results in index order.
pub(crate) fn parallel_map<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let workers = std::thread::available_parallelism().map_or(1, |w| w.get()).min(n.max(1));
    if workers <= 1 {
        return (0..n).map(f).collect();
    }
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    std::thread::scope(|scope| {
        let f = &f;
        let handles: Vec<_> = (0..workers)
            .map(|w| scope.spawn(move || (w..n).step_by(workers).map(|k| (k, f(k))).collect::<Vec<_>>()))
            .collect();
        for h in handles {
            for (k, v) in h.join().expect("worker panicked") {
                slots[k] = Some(v);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("every index computed")).collect()
}

fn max_of(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    values.into_iter().try_fold(0.0, |acc: f64, v| Ok(acc.max(v?)))
}

fn random_direction(problem: &dyn Problem, rng: &mut ChaCha8Rng) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(problem.dim(), |_, _| StandardNormal.sample(rng));
        let n = problem.norm(&v);
        if n > 0.0 {
            return v / n;
        }
    }
}

/// `count` states in `B_R`: Gaussian directions scaled to the radii
/// `R, R/2, 3R/4, R/4, R/8, 3R/8, R/16, 5R/8` in turn. Directions depend only on `seed`, so samples for different `R` are
/// rescalings of each other.
pub fn sample_ball(problem: &dyn Problem, radius: f64, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| random_direction(problem, &mut rng) * (radius * RADIUS_FRACTIONS[k % RADIUS_FRACTIONS.len()]))
        .collect()
}

/// `p`, an estimate of `‖A'(0)^{-1}‖`.
pub fn estimate_p(problem: &dyn Problem, opts: &SolveOptions) -> Result<f64> {
    let a0 = problem.derivative_operator(&DVector::zeros(problem.dim()));
    estimate_inverse_norm(&a0, problem.norm_kind(), opts)
}

/// `s`, the largest `‖A'(tu) - A'(0)‖` over `n_samples` states in `B_R` and
/// `t ∈ {0, 1/(n_t - 1), ..., 1}`.
pub fn estimate_s(problem: &dyn Problem, radius: f64, n_samples: usize, n_t: usize, seed: u64) -> Result<f64> {
    if n_samples == 0 || n_t < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 1 sample and 2 time points, got {n_samples} and {n_t}"
        )));
    }
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be nonnegative, got {radius}")));
    }
    let a0 = problem.derivative_operator(&DVector::zeros(problem.dim()));
    let samples = sample_ball(problem, radius, n_samples, seed);
    let per_sample = parallel_map(samples.len(), |k| {
        max_of((1..n_t).map(|j| {
            let t = j as f64 / (n_t - 1) as f64;
            let diff = problem.derivative_operator(&(&samples[k] * t)).difference(&a0)?;
            estimate_operator_norm(&diff, problem.norm_kind(), DEFAULT_POWER_ITERATIONS)
        }))
    });
    max_of(per_sample)
}

/// Neumann-series verdict from `p` and `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvertibilityVerdict {
    pub p: f64,
    pub s: f64,
    pub ps: f64,
    /// `p / (1 - ps)`; `None` stands for an infinite bound.
    pub inverse_bound: Option<f64>,
    pub holds: bool,
}

pub fn certify_invertibility(p: f64, s: f64) -> Result<InvertibilityVerdict> {
    if !(p >= 0.0 && s >= 0.0) {
        return Err(Error::InvalidArgument(format!("p and s must be nonnegative, got {p} and {s}")));
    }
    let ps = p * s;
    let holds = ps < 1.0;
    Ok(InvertibilityVerdict { p, s, ps, inverse_bound: holds.then(|| p / (1.0 - ps)), holds })
}

/// `‖left^{-1} middle right^{-1}‖`.
fn sandwich_norm(
    left: &LinearOperator,
    middle: &LinearOperator,
    right: &LinearOperator,
    norm: NormKind,
    opts: &SolveOptions,
) -> Result<f64> {
    let dim = left.dim();
    if let (true, Some(l), Some(m), Some(r)) = (dim <= EXACT_LIPSCHITZ_LIMIT, left.dense(), middle.dense(), right.dense()) {
        let inv = |a: &DMatrix<f64>, op: &LinearOperator| -> Result<DMatrix<f64>> {
            Factorization::new(op, opts)?;
            a.clone().lu().try_inverse().ok_or(Error::SingularOperator { residual: 1.0 })
        };
        let product = inv(l, left)? * m * inv(r, right)?;
        return Ok(match norm {
            NormKind::Sup => product
                .row_iter()
                .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
                .fold(0.0, f64::max),
            NormKind::DiscreteL2 => product.singular_values().max(),
        });
    }

    let fl = Factorization::new(left, opts)?;
    let fr = Factorization::new(right, opts)?;
    let nan = || DVector::from_element(dim, f64::NAN);
    let apply = |w: &DVector<f64>| -> DVector<f64> {
        fr.solve(w).and_then(|x| fl.solve(&middle.apply(&x))).unwrap_or_else(|_| nan())
    };
    let estimate = match norm {
        NormKind::DiscreteL2 => {
            let (la, ma, ra) = match (left.adjoint(), middle.adjoint(), right.adjoint()) {
                (Some(a), Some(b), Some(c)) => (a, b, c),
                _ => return Err(Error::Unsupported("Lipschitz estimate needs adjoint actions".into())),
            };
            let fla = Factorization::new(&la, opts)?;
            let fra = Factorization::new(&ra, opts)?;
            let mut rng = ChaCha8Rng::seed_from_u64(NORM_SEED);
            let mut v: DVector<f64> = DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
            v /= v.norm();
            let mut estimate = 0.0;
            for _ in 0..PROBE_VECTORS {
                let y = apply(&v);
                estimate = y.norm();
                let z = fla
                    .solve(&y)
                    .and_then(|x| fra.solve(&ma.apply(&x)))
                    .unwrap_or_else(|_| nan());
                let n = z.norm();
                if !(n > 0.0 && n.is_finite()) {
                    break;
                }
                v = z / n;
            }
            estimate
        }
        NormKind::Sup => {
            // Rademacher probes give a lower bound of the induced sup norm.
            let mut rng = ChaCha8Rng::seed_from_u64(NORM_SEED);
            (0..PROBE_VECTORS)
                .map(|_| {
                    let z = DVector::from_fn(dim, |_, _| if rng.random::<bool>() { 1.0 } else { -1.0 });
                    apply(&z).amax()
                })
                .fold(0.0, f64::max)
        }
    };
    if estimate.is_finite() {
        Ok(estimate)
    } else {
        Err(Error::SingularOperator { residual: f64::NAN })
    }
}

/// `‖L(u)^{-1} - L(v)^{-1}‖ / ‖u - v‖` through
/// `L(u)^{-1} - L(v)^{-1} = L(u)^{-1} (L(v) - L(u)) L(v)^{-1}`;
/// `None` when `u` and `v` are too close to give a meaningful ratio.
pub fn lipschitz_ratio(
    problem: &dyn Problem,
    linearizer: &Linearizer,
    u: &DVector<f64>,
    v: &DVector<f64>,
    opts: &SolveOptions,
) -> Result<Option<f64>> {
    let distance = problem.norm(&(u - v));
    let scale = problem.norm(u).max(problem.norm(v)).max(1.0);
    if distance <= DEGENERATE_PAIR * scale {
        return Ok(None);
    }
    let lu = linearizer.build(problem, u)?;
    let lv = linearizer.build(problem, v)?;
    let diff = lv.difference(&lu)?;
    Ok(Some(sandwich_norm(&lu, &diff, &lv, problem.norm_kind(), opts)? / distance))
}

/// Sampled Lipschitz constant of `u ↦ L(u)^{-1}` on `B_R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    pub q: f64,
    pub pairs: usize,
    /// Largest `max_i |u_i|` over all sampled states.
    pub max_amplitude: f64,
}

pub fn estimate_lipschitz_q(
    problem: &dyn Problem,
    radius: f64,
    n_pairs: usize,
    linearizer: &Linearizer,
    opts: &SolveOptions,
    seed: u64,
) -> Result<LipschitzEstimate> {
    if n_pairs == 0 {
        return Err(Error::InvalidArgument("need at least one sample pair".into()));
    }
    // Two states per pair. Every second pair replaces the partner by a nearby
    // state, so chords short enough to see the local slope are included. The
    // partner of a degenerate pair is redrawn.
    let mut pool = sample_ball(problem, radius, 2 * n_pairs, seed.wrapping_add(1)).into_iter();
    let mut spare = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    let mut pairs = Vec::with_capacity(n_pairs);
    while pairs.len() < n_pairs {
        let u = pool.next().expect("pool has two states per pair");
        let mut v = pool.next().expect("pool has two states per pair");
        if pairs.len() % 2 == 1 {
            v = &u + random_direction(problem, &mut spare) * (CLOSE_PAIR_OFFSET * radius);
            let n = problem.norm(&v);
            if n > radius {
                v *= radius / n;
            }
        }
        for _ in 0..100 {
            let scale = problem.norm(&u).max(problem.norm(&v)).max(1.0);
            if problem.norm(&(&u - &v)) > DEGENERATE_PAIR * scale {
                break;
            }
            let fraction = RADIUS_FRACTIONS[spare.random_range(0..RADIUS_FRACTIONS.len())];
            v = random_direction(problem, &mut spare) * (radius * fraction);
        }
        pairs.push((u, v));
    }
    let max_amplitude = pairs.iter().flat_map(|(u, v)| [u.amax(), v.amax()]).fold(0.0, f64::max);
    let ratios = parallel_map(pairs.len(), |k| {
        let (u, v) = &pairs[k];
        match lipschitz_ratio(problem, linearizer, u, v, opts) {
            Err(e) if e.is_singular() => Err(Error::SingularSample {
                sample: k,
                residual: match e {
                    Error::SingularOperator { residual } => residual,
                    _ => f64::NAN,
                },
            }),
            other => other.map(|r| r.unwrap_or(0.0)),
        }
    });
    Ok(LipschitzEstimate { q: max_of(ratios)?, pairs: n_pairs, max_amplitude })
}

/// Cross-check of `q` from the derivative of `L^{-1}`:
/// the largest `‖L(u)^{-1} [∂_h L(u)] L(u)^{-1}‖` over a few samples and unit
/// directions `h`, with `∂_h L` by central differences.
pub fn derivative_q_check(
    problem: &dyn Problem,
    radius: f64,
    linearizer: &Linearizer,
    opts: &SolveOptions,
    seed: u64,
) -> Result<f64> {
    let samples = sample_ball(problem, radius, DERIVATIVE_CHECK_SAMPLES, seed.wrapping_add(3));
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(4));
    let directions: Vec<DVector<f64>> =
        (0..samples.len()).map(|_| random_direction(problem, &mut rng)).collect();
    max_of(parallel_map(samples.len(), |k| {
        let (u, h) = (&samples[k], &directions[k]);
        let eps = 1e-5 * (1.0 + problem.norm(u));
        let plus = linearizer.build(problem, &(u + h * eps))?;
        let minus = linearizer.build(problem, &(u - h * eps))?;
        let slope = LinearOperator::linear_combination(vec![
            (0.5 / eps, plus),
            (-0.5 / eps, minus),
        ])?;
        let lu = linearizer.build(problem, u)?;
        sandwich_norm(&lu, &slope, &lu, problem.norm_kind(), opts)
    }))
}

/// Contraction verdict for a ball of radius `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionVerdict {
    /// `Q = q ‖f‖`.
    pub contraction_q: f64,
    /// `‖L(u_0)^{-1} f - u_0‖`.
    pub first_step: f64,
    /// `‖u_0‖ + ‖L(u_0)^{-1} f - u_0‖ / (1 - Q)`; `None` when `Q ≥ 1`.
    pub s_radius: Option<f64>,
    pub radius: f64,
    pub holds: bool,
}

pub fn check_theorem11(
    q: f64,
    f: &StateVector,
    u0: &StateVector,
    l0: &LinearOperator,
    radius: f64,
    opts: &SolveOptions,
) -> Result<ContractionVerdict> {
    if !(q.is_finite() && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("q = {q} and R = {radius} must be finite")));
    }
    if !(radius > u0.norm()) {
        return Err(Error::InvalidArgument(format!("R = {radius} must exceed ‖u0‖ = {}", u0.norm())));
    }
    if !u0.same_mesh(f) {
        return Err(Error::Dimension { expected: f.len(), found: u0.len() });
    }
    let contraction_q = q * f.norm();
    let w1 = Factorization::new(l0, opts)?.solve(f.values())?;
    let first_step = f.norm_kind().of((w1 - u0.values()).as_slice(), f.mesh().cell_volume());
    let s_radius = (contraction_q < 1.0).then(|| u0.norm() + first_step / (1.0 - contraction_q));
    let holds = s_radius.is_some_and(|s| s <= radius);
    Ok(ContractionVerdict { contraction_q, first_step, s_radius, radius, holds })
}

#[derive(Debug, Clone)]
pub struct CertifyOptions {
    pub radius: f64,
    pub samples: usize,
    pub pairs: usize,
    pub time_points: usize,
    pub seed: u64,
    pub linearizer: Linearizer,
    pub solve: SolveOptions,
    pub derivative_check: bool,
}

impl CertifyOptions {
    pub fn with_radius(radius: f64) -> Self {
        Self {
            radius,
            samples: 20,
            pairs: 10,
            time_points: 5,
            seed: NORM_SEED,
            linearizer: Linearizer::default(),
            solve: SolveOptions::default(),
            derivative_check: true,
        }
    }
}

/// How each constant was obtained.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimationTags {
    pub p: String,
    pub s: String,
    pub q: String,
    pub verdicts: String,
}

/// Estimated constants and the verdicts they support. All verdicts are
/// empirical: the sampled constants are lower bounds of the true suprema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub p: f64,
    pub s: f64,
    pub ps: f64,
    /// `p / (1 - ps)`; `null` stands for an infinite bound.
    pub inverse_bound: Option<f64>,
    pub q: f64,
    pub q_derivative_check: Option<f64>,
    pub contraction_q: f64,
    pub radius: f64,
    pub s_radius: Option<f64>,
    pub first_step: f64,
    pub feasible_q: Option<FeasibleQ>,
    pub rhs_norm: f64,
    pub max_sample_amplitude: f64,
    pub samples: usize,
    pub pairs: usize,
    pub time_points: usize,
    pub seed: u64,
    pub norm: NormKind,
    pub invertibility_verified: bool,
    pub contraction_verified: bool,
    pub estimation: EstimationTags,
}

impl Certificate {
    pub fn all_verified(&self) -> bool {
        self.invertibility_verified && self.contraction_verified
    }
}

/// Runs every estimate for `A(u) = f` started from `u0`.
pub fn certify(problem: &dyn Problem, f: &StateVector, u0: &StateVector, opts: &CertifyOptions) -> Result<Certificate> {
    check_on_mesh(problem, f)?;
    check_on_mesh(problem, u0)?;
    let p = estimate_p(problem, &opts.solve)?;
    let s = estimate_s(problem, opts.radius, opts.samples, opts.time_points, opts.seed)?;
    let inv = certify_invertibility(p, s)?;
    let lip = estimate_lipschitz_q(problem, opts.radius, opts.pairs, &opts.linearizer, &opts.solve, opts.seed)?;
    let q_derivative_check = if opts.derivative_check {
        Some(derivative_q_check(problem, opts.radius, &opts.linearizer, &opts.solve, opts.seed)?)
    } else {
        None
    };
    let l0 = opts.linearizer.build(problem, u0.values())?;
    let verdict = check_theorem11(lip.q, f, u0, &l0, opts.radius, &opts.solve)?;
    let feasible_q = if f.norm() > 0.0 {
        Some(feasible_q_interval(u0, f, opts.radius, &l0, &opts.solve)?)
    } else {
        None
    };
    let norm = problem.norm_kind();
    let exact_norm = match norm {
        NormKind::Sup => "exact maximum row sum of the dense inverse",
        NormKind::DiscreteL2 => "inverse power iteration",
    };
    Ok(Certificate {
        p,
        s,
        ps: inv.ps,
        inverse_bound: inv.inverse_bound,
        q: lip.q,
        q_derivative_check,
        contraction_q: verdict.contraction_q,
        radius: opts.radius,
        s_radius: verdict.s_radius,
        first_step: verdict.first_step,
        feasible_q,
        rhs_norm: f.norm(),
        max_sample_amplitude: lip.max_amplitude,
        samples: opts.samples,
        pairs: opts.pairs,
        time_points: opts.time_points,
        seed: opts.seed,
        norm,
        invertibility_verified: inv.holds,
        contraction_verified: verdict.holds,
        estimation: EstimationTags {
            p: exact_norm.into(),
            s: "sampled lower bound over the ball".into(),
            q: "sampled lower bound over pairs in the ball, resolvent identity".into(),
            verdicts: "empirical, not a proof".into(),
        },
    })
}
