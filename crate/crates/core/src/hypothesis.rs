//! The two tests as decision procedures and type II error evaluators.
//!
//! HH: Hotelling's T² on `n` heterodyne outcomes, `F = (ν/μ)T²/(n−1)` with
//! `μ = 2m`, `ν = n − 2m`, compared against the central `F_{μ,ν}` critical
//! point. SI: the randomized spectral test built on `T̂_inv`, evaluated in
//! closed form for pure states, through the law of `Y²` for `n = 2`, and
//! through the Fock oracle otherwise.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::distributions::{
    beta_function, critical_point, noncentral_f_cdf, noncentral_f_pdf, si_integral_scaled,
    y_distribution, NoncentralFParams, DEFAULT_TAIL_TOL,
};
use crate::error::{Error, Result};
use crate::level::solve_level;
use crate::linalg::CVector;
use crate::phase_space::{
    cholesky_with_jitter, draw_normal, kappa, moments, GaussianSpec, SqueezeParam,
};
use crate::rng::{stream_id, stream_rng, BLOCK_SIZE};
use crate::scalar::Real;
use crate::special::integrate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    Hh,
    Si,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestSpec<T: Real> {
    pub m: usize,
    pub n: usize,
    pub mixture: T,
    pub alpha: T,
    pub kind: TestKind,
}

impl<T: Real> TestSpec<T> {
    pub fn new(m: usize, n: usize, mixture: T, alpha: T, kind: TestKind) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("mode count must be ≥ 1".into()));
        }
        if !(alpha >= T::zero() && alpha <= T::one()) {
            return Err(Error::InvalidLevel {
                alpha: alpha.to_f64_lossy(),
                range: "[0, 1]",
            });
        }
        if !(mixture >= T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "mixture must be ≥ 0, got {mixture}"
            )));
        }
        match kind {
            TestKind::Hh if n < 2 * m + 1 => Err(Error::UndefinedTest(format!(
                "HH needs n ≥ 2m+1, got n={n}, m={m}"
            ))),
            TestKind::Si if n < 2 => {
                Err(Error::UndefinedTest(format!("SI needs n ≥ 2, got n={n}")))
            }
            _ => Ok(Self {
                m,
                n,
                mixture,
                alpha,
                kind,
            }),
        }
    }

    pub fn hh(m: usize, n: usize, mixture: T, alpha: T) -> Result<Self> {
        Self::new(m, n, mixture, alpha, TestKind::Hh)
    }

    pub fn si(m: usize, n: usize, mixture: T, alpha: T) -> Result<Self> {
        Self::new(m, n, mixture, alpha, TestKind::Si)
    }

    /// `μ = 2m`.
    pub fn mu_dof(&self) -> T {
        T::from_usize_lossy(2 * self.m)
    }

    /// `ν = n − 2m`.
    pub fn nu_dof(&self) -> T {
        T::from_usize_lossy(self.n) - self.mu_dof()
    }

    fn require(&self, kind: TestKind) -> Result<()> {
        // HH validity is stricter, so re-check rather than trust the tag
        Self::new(self.m, self.n, self.mixture, self.alpha, kind).map(|_| ())
    }
}

/// `F_HH = (n−1)^{−1}(ν/μ)T²` with `T² = n X̄ᵀ Σ̄⁻¹ X̄` and `Σ̄` the sample
/// covariance with divisor `n−1`.
pub fn hotelling_f<T: Real>(samples: &[DVector<T>]) -> Result<T> {
    let n = samples.len();
    let dim = samples.first().map(|s| s.len()).unwrap_or(0);
    if dim == 0 || n < dim + 1 {
        return Err(Error::UndefinedTest(format!(
            "Hotelling statistic needs n ≥ dim+1, got n={n}, dim={dim}"
        )));
    }
    if samples.iter().any(|s| s.len() != dim) {
        return Err(Error::InvalidArgument("samples differ in dimension".into()));
    }
    let nf = T::from_usize_lossy(n);
    let mean = samples.iter().fold(DVector::zeros(dim), |acc, s| acc + s) / nf;
    let mut cov = DMatrix::<T>::zeros(dim, dim);
    for s in samples {
        let c = s - &mean;
        cov += &c * c.transpose();
    }
    cov /= nf - T::one();
    let chol = cov.clone().cholesky().ok_or(Error::SingularCovariance)?;
    let l = chol.l();
    let diag: Vec<T> = (0..dim).map(|i| l[(i, i)]).collect();
    let largest = diag.iter().fold(T::zero(), |a, &x| a.max(x));
    let smallest = diag.iter().fold(T::max_value().unwrap(), |a, &x| a.min(x));
    if !(smallest > T::lit(1e-7) * largest) {
        return Err(Error::SingularCovariance);
    }
    let t2 = nf * mean.dot(&chol.solve(&mean));
    let mu = T::from_usize_lossy(dim);
    let nu = nf - mu;
    Ok(nu / mu * t2 / (nf - T::one()))
}

/// Acceptance threshold of the HH test; `None` for the degenerate levels.
fn hh_threshold<T: Real>(spec: &TestSpec<T>) -> Result<Option<T>> {
    if spec.alpha == T::zero() || spec.alpha == T::one() {
        return Ok(None);
    }
    critical_point(spec.alpha, spec.mu_dof(), spec.nu_dof()).map(Some)
}

/// `β[T^HH_α] = P(F_{μ,ν;λ} ≤ c)` with `λ = n·κ(θ, η, N)`.
pub fn hh_type2_analytic<T: Real>(
    theta: &CVector<T>,
    eta: &SqueezeParam<T>,
    spec: &TestSpec<T>,
) -> Result<T> {
    spec.require(TestKind::Hh)?;
    let lambda = T::from_usize_lossy(spec.n) * kappa(theta, eta, spec.mixture)?;
    hh_type2_from_lambda(lambda, spec)
}

/// `P(F_{μ,ν;λ} ≤ c)` for a given noncentrality.
pub fn hh_type2_from_lambda<T: Real>(lambda: T, spec: &TestSpec<T>) -> Result<T> {
    spec.require(TestKind::Hh)?;
    if spec.alpha == T::zero() {
        return Ok(T::one());
    }
    if spec.alpha == T::one() {
        return Ok(T::zero());
    }
    let c = critical_point(spec.alpha, spec.mu_dof(), spec.nu_dof())?;
    let params = NoncentralFParams::new(spec.mu_dof(), spec.nu_dof(), lambda)?;
    Ok(noncentral_f_cdf(c, &params))
}

/// `δ = (μ+ν) ∫₀^c f/(μf+ν) p₀(f) df` for the small-λ expansion of β_HH.
pub fn hh_delta<T: Real>(alpha: T, mu_dof: T, nu_dof: T) -> Result<T> {
    let c = critical_point(alpha, mu_dof, nu_dof)?;
    let central = NoncentralFParams::central(mu_dof, nu_dof)?;
    let integral = integrate(
        |f: T| {
            if f <= T::zero() {
                T::zero()
            } else {
                f / (mu_dof * f + nu_dof) * noncentral_f_pdf(f, &central).unwrap_or(T::zero())
            }
        },
        T::zero(),
        c,
        T::lit(1e-12),
        T::lit(1e-15),
    )?;
    Ok((mu_dof + nu_dof) * integral)
}

/// Replicates for a default Monte Carlo run; agreement is judged at 4 stderr.
pub const DEFAULT_REPS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate<T: Real> {
    pub estimate: T,
    /// Binomial standard error `√(p(1−p)/reps)`.
    pub stderr: T,
    pub reps: usize,
}

/// Acceptance frequency of `{F_HH ≤ c}` over simulated heterodyne data.
///
/// Replicates are drawn in blocks of [`BLOCK_SIZE`]; block `b` uses stream
/// `stream_id(experiment, b)`, so the estimate depends only on
/// `(seed, experiment, reps)`.
pub fn hh_type2_montecarlo<T>(
    theta: &CVector<T>,
    eta: &SqueezeParam<T>,
    spec: &TestSpec<T>,
    reps: usize,
    seed: u64,
    experiment: u32,
) -> Result<MonteCarloEstimate<T>>
where
    T: Real,
    StandardNormal: Distribution<T>,
{
    spec.require(TestKind::Hh)?;
    if reps == 0 {
        return Err(Error::InvalidArgument("replicate count must be ≥ 1".into()));
    }
    let threshold = hh_threshold(spec)?;
    let state = GaussianSpec::new(theta.clone(), eta.clone(), spec.mixture)?;
    let mom = moments(&state);
    let chol = cholesky_with_jitter(&mom.sigma)?;
    let blocks = reps.div_ceil(BLOCK_SIZE);
    let accepted: usize = (0..blocks)
        .into_par_iter()
        .map(|b| -> Result<usize> {
            let mut rng = stream_rng(seed, stream_id(experiment, b as u32));
            let count = BLOCK_SIZE.min(reps - b * BLOCK_SIZE);
            let mut hits = 0;
            for _ in 0..count {
                let samples = draw_normal(&mom.mu, &chol, spec.n, &mut rng);
                let accept = match threshold {
                    Some(c) => hotelling_f(&samples)? <= c,
                    None => spec.alpha == T::zero(),
                };
                hits += usize::from(accept);
            }
            Ok(hits)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    let r = T::from_usize_lossy(reps);
    let p = T::from_usize_lossy(accepted) / r;
    Ok(MonteCarloEstimate {
        estimate: p,
        stderr: (p * (T::one() - p) / r).sqrt(),
        reps,
    })
}

/// Pure-state closed form
/// `β = (1−α) e^{−n‖θ‖²} ∫₀^π e^{n‖θ‖² cos φ} sin^{n−2}φ dφ / B((n−1)/2, ½)`.
pub fn si_type2_closed<T: Real>(theta_norm: T, spec: &TestSpec<T>) -> Result<T> {
    spec.require(TestKind::Si)?;
    if spec.mixture != T::zero() {
        return Err(Error::Unsupported(
            "closed-form SI error is available only for pure states (N = 0)".into(),
        ));
    }
    let n = spec.n;
    let z = T::from_usize_lossy(n) * theta_norm * theta_norm;
    let b = beta_function(T::from_usize_lossy(n - 1) * T::lit(0.5), T::lit(0.5))?;
    Ok((T::one() - spec.alpha) * si_integral_scaled(z, n)? / b)
}

/// SI type II error for `n = 2` through the law of `X = Y²`.
pub fn si_type2_n2<T: Real>(theta_norm: T, m: usize, mixture: T, alpha: T) -> Result<T> {
    TestSpec::si(m, 2, mixture, alpha)?;
    let tol = T::lit(DEFAULT_TAIL_TOL);
    let null = y_distribution(m, T::zero(), mixture, tol)?.push_forward(|y| y * y);
    let alt = y_distribution(m, theta_norm, mixture, tol)?.push_forward(|y| y * y);
    let sol = solve_level(&null, alpha)?;
    Ok(sol.acceptance(&alt))
}

/// Step sizes of the small-θ Richardson extrapolation.
pub const SLOPE_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// Quadratic coefficient of `1−α−β(θ)` at `θ → 0`, from `g(θ) = (1−α−β)/θ²`
/// at [`SLOPE_STEPS`] with two rounds of Richardson extrapolation.
pub fn richardson_slope<T: Real>(alpha: T, beta: impl Fn(T) -> Result<T>) -> Result<T> {
    let g = |h: f64| -> Result<T> {
        let h = T::lit(h);
        Ok((T::one() - alpha - beta(h)?) / (h * h))
    };
    let (g1, g2, g3) = (g(SLOPE_STEPS[0])?, g(SLOPE_STEPS[1])?, g(SLOPE_STEPS[2])?);
    // g(h) = c₀ + c₁h² + c₂h⁴ + …, steps halve so h² shrinks by 4
    let three = T::lit(3.0);
    let four = T::lit(4.0);
    let r1 = (four * g2 - g1) / three;
    let r2 = (four * g3 - g2) / three;
    Ok((T::lit(16.0) * r2 - r1) / T::lit(15.0))
}

/// Small-θ slope of the SI test for pure states (should equal `(1−α)n`).
pub fn si_small_theta_slope<T: Real>(spec: &TestSpec<T>) -> Result<T> {
    spec.require(TestKind::Si)?;
    if spec.mixture != T::zero() {
        return Err(Error::Unsupported(
            "small-θ slope is defined for N = 0".into(),
        ));
    }
    richardson_slope(spec.alpha, |t| si_type2_closed(t, spec))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingPoint<T: Real> {
    pub theta: T,
    pub beta_si: T,
    pub beta_hh: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingReport<T: Real> {
    /// Smallest grid point with `β_SI < β_HH`.
    pub small: Option<CrossingPoint<T>>,
    /// Largest grid point with `β_SI > β_HH`.
    pub large: Option<CrossingPoint<T>>,
    pub curve: Vec<CrossingPoint<T>>,
}

impl<T: Real> CrossingReport<T> {
    pub fn witnesses(&self) -> Result<(T, T)> {
        match (&self.small, &self.large) {
            (Some(s), Some(l)) => Ok((s.theta, l.theta)),
            _ => Err(Error::NoConvergence(format!(
                "no crossing witness on this grid (small: {}, large: {})",
                self.small.is_some(),
                self.large.is_some()
            ))),
        }
    }
}

/// Scans `theta_grid` for both orderings of the SI and HH type II errors at
/// `m = 1, n = 3, N = 0, η = 0`.
pub fn crossing_check<T: Real>(alpha: T, theta_grid: &[T]) -> Result<CrossingReport<T>> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::InvalidLevel {
            alpha: alpha.to_f64_lossy(),
            range: "(0, 1)",
        });
    }
    let si = TestSpec::si(1, 3, T::zero(), alpha)?;
    let hh = TestSpec::hh(1, 3, T::zero(), alpha)?;
    let eta = SqueezeParam::zero(1);
    let curve = theta_grid
        .par_iter()
        .map(|&th| -> Result<CrossingPoint<T>> {
            let theta = CVector::from_element(1, crate::scalar::creal(th));
            Ok(CrossingPoint {
                theta: th,
                beta_si: si_type2_closed(th.magnitude(), &si)?,
                beta_hh: hh_type2_analytic(&theta, &eta, &hh)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    // ties within rounding are not witnesses
    let margin = T::lit(1e-12);
    let small = curve
        .iter()
        .find(|p| p.beta_si + margin < p.beta_hh)
        .cloned();
    let large = curve
        .iter()
        .rev()
        .find(|p| p.beta_si > p.beta_hh + margin)
        .cloned();
    Ok(CrossingReport {
        small,
        large,
        curve,
    })
}
