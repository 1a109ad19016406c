//! Noncentral F law `F_{μ,ν;λ}` as a Poisson mixture of central (beta) terms.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::{ln_beta, ln_gamma, reg_inc_beta};

const REL_STOP: f64 = 1e-16;
const ABS_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoncentralFParams<T: Real> {
    pub mu_dof: T,
    pub nu_dof: T,
    pub lambda: T,
}

impl<T: Real> NoncentralFParams<T> {
    pub fn new(mu_dof: T, nu_dof: T, lambda: T) -> Result<Self> {
        if !(mu_dof >= T::one() && nu_dof >= T::one() && lambda >= T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "noncentral F needs μ ≥ 1, ν ≥ 1, λ ≥ 0; got ({mu_dof}, {nu_dof}, {lambda})"
            )));
        }
        Ok(Self {
            mu_dof,
            nu_dof,
            lambda,
        })
    }

    pub fn central(mu_dof: T, nu_dof: T) -> Result<Self> {
        Self::new(mu_dof, nu_dof, T::zero())
    }
}

/// `ln` of the Poisson(`half`) weight at `k`.
fn ln_poisson<T: Real>(half: T, k: usize) -> T {
    let kf = T::from_usize_lossy(k);
    if half == T::zero() {
        return if k == 0 {
            T::zero()
        } else {
            -T::max_value().unwrap()
        };
    }
    -half + kf * half.ln() - ln_gamma(kf + T::one())
}

/// Sums a Poisson(`half`) mixture `Σ_k term(k)` walking outward from the mode.
///
/// `term(k)` returns `(weight_k, weight_k·g_k)`. Upward the remainder is
/// bounded geometrically by the last term once `k > 2·half`. Downward the
/// remainder is bounded by the Poisson weights when `g ≤ 1`; otherwise every
/// term down to zero is summed.
fn poisson_mixture<T: Real>(
    half: T,
    g_at_most_one: bool,
    mut term: impl FnMut(usize) -> (T, T),
) -> T {
    let rel = T::lit(REL_STOP);
    let floor = T::lit(ABS_FLOOR);
    let mode = half.floor().to_usize().unwrap_or(0);
    let two_half = half + half;
    let mut sum = T::zero();
    let mut k = mode;
    loop {
        let (_, t) = term(k);
        sum += t;
        let r = half / T::from_usize_lossy(k + 2);
        if T::from_usize_lossy(k) > two_half && r < T::one() {
            let bound = t * r / (T::one() - r);
            if bound <= rel * sum || bound < floor {
                break;
            }
        }
        k += 1;
    }
    let mut k = mode;
    while k > 0 {
        k -= 1;
        let (w, t) = term(k);
        sum += t;
        if g_at_most_one {
            let r = T::from_usize_lossy(k) / half;
            let bound = w * r / (T::one() - r);
            if bound <= rel * sum || bound < floor {
                break;
            }
        }
    }
    sum
}

pub fn noncentral_f_pdf<T: Real>(f: T, params: &NoncentralFParams<T>) -> Result<T> {
    if !(f > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "density argument must be positive, got {f}"
        )));
    }
    let half = T::lit(0.5);
    let (mu, nu) = (params.mu_dof, params.nu_dof);
    let lam2 = params.lambda * half;
    let ratio = mu / nu;
    let log_base = |k: T| -> T {
        let a = mu * half + k;
        a * ratio.ln() + (a - T::one()) * f.ln()
            - (a + nu * half) * (ratio * f).ln_1p()
            - ln_beta(a, nu * half)
    };
    if lam2 == T::zero() {
        return Ok(log_base(T::zero()).exp());
    }
    Ok(poisson_mixture(lam2, false, |k| {
        let lw = ln_poisson(lam2, k);
        (lw.exp(), (lw + log_base(T::from_usize_lossy(k))).exp())
    }))
}

/// `P(F ≤ c)`; `c = +∞` gives 1.
pub fn noncentral_f_cdf<T: Real>(c: T, params: &NoncentralFParams<T>) -> T {
    if !(c > T::zero()) {
        return T::zero();
    }
    if !c.is_finite() {
        return T::one();
    }
    let half = T::lit(0.5);
    let (mu, nu) = (params.mu_dof, params.nu_dof);
    let x = mu * c / (mu * c + nu);
    let lam2 = params.lambda * half;
    if lam2 == T::zero() {
        return reg_inc_beta(mu * half, nu * half, x);
    }
    let value = poisson_mixture(lam2, true, |k| {
        let w = ln_poisson(lam2, k).exp();
        if w == T::zero() {
            (w, w)
        } else {
            (
                w,
                w * reg_inc_beta(mu * half + T::from_usize_lossy(k), nu * half, x),
            )
        }
    });
    value.min(T::one()).max(T::zero())
}

/// Upper-α point `c` of the central `F_{μ,ν}`: `∫_c^∞ p₀ = α`.
pub fn critical_point<T: Real>(alpha: T, mu_dof: T, nu_dof: T) -> Result<T> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::InvalidLevel {
            alpha: alpha.to_f64_lossy(),
            range: "(0, 1) (α = 0 would need c = ∞, α = 1 gives c = 0)",
        });
    }
    NoncentralFParams::central(mu_dof, nu_dof)?;
    let half = T::lit(0.5);
    let (a, b) = (mu_dof * half, nu_dof * half);
    let target = T::one() - alpha;
    // bisect on the beta scale x = μc/(μc+ν), where the cdf is I_x(μ/2, ν/2)
    let (mut lo, mut hi) = (T::zero(), T::one());
    for _ in 0..200 {
        let mid = half * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = reg_inc_beta(a, b, mid);
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = half * (lo + hi);
    let c = nu_dof * x / (mu_dof * (T::one() - x));
    let residual = (reg_inc_beta(a, b, x) - target).magnitude();
    if residual > T::lit(1e-10) {
        return Err(Error::NoConvergence(format!(
            "critical point residual {residual:e} above 1e-10"
        )));
    }
    Ok(c)
}
