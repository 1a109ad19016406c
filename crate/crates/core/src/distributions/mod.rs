//! Distributions used by the two tests: noncentral F, Poisson, negative
//! binomial, the compound law of `Y`, and the angular integral of the SI test.

mod integer;
mod noncentral_f;

pub use integer::{
    cf_invert, neg_binomial, neg_binomial_cf, poisson, y_char_function, y_distribution,
    DiscreteLaw, IntegerDistribution, DEFAULT_TAIL_TOL,
};
pub use noncentral_f::{critical_point, noncentral_f_cdf, noncentral_f_pdf, NoncentralFParams};

pub use crate::special::beta_function;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::integrate;

/// `e^{−z} ∫₀^π e^{z cos φ} sin^{n−2} φ dφ`, finite for large `z`.
pub fn si_integral_scaled<T: Real>(z: T, n: usize) -> Result<T> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "angular integral needs n ≥ 2, got {n}"
        )));
    }
    if !z.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "argument must be finite, got {z}"
        )));
    }
    let power = (n - 2) as i32;
    let f = move |phi: T| (z * (phi.cos() - T::one())).exp() * phi.sin().powi(power);
    let rel = T::lit(1e-13);
    let pi = T::pi();
    // for large z the mass sits in a window of width ~1/√z at φ = 0
    let split = if z > T::lit(100.0) {
        (T::lit(12.0) / z.sqrt()).min(pi)
    } else {
        pi
    };
    let head = integrate(f, T::zero(), split, rel, T::zero())?;
    let tail = if split < pi {
        integrate(f, split, pi, rel, head * rel)?
    } else {
        T::zero()
    };
    Ok(head + tail)
}

/// `∫₀^π e^{z cos φ} sin^{n−2} φ dφ`.
pub fn si_integral<T: Real>(z: T, n: usize) -> Result<T> {
    Ok(si_integral_scaled(z, n)? * z.exp())
}
