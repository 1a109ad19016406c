//! Phase-space description of squeezed Gaussian states: the real symplectic
//! matrix `G_η`, heterodyne means and covariances, the characteristic function
//! of the Wigner distribution and the noncentrality functional.

mod text;

pub use text::{
    format_complex, parse_complex, parse_gaussian_spec, parse_squeeze_param, write_gaussian_spec,
    write_squeeze_param,
};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{expm_real, max_norm, CMatrix, CVector};
use crate::scalar::{cexp, cplx, Cplx, Real};

/// Violations of anti-hermiticity / symmetry below this are accepted as is.
pub const SQUEEZE_EXACT_TOL: f64 = 1e-12;
/// Violations below this (and above [`SQUEEZE_EXACT_TOL`]) are symmetrized with a warning.
pub const SQUEEZE_REPAIR_TOL: f64 = 1e-9;

/// Squeezing parameter `η`: an anti-hermitian part `A` and a symmetric part `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezeParam<T: Real> {
    a: CMatrix<T>,
    s: CMatrix<T>,
}

impl<T: Real> SqueezeParam<T> {
    pub fn new(a: CMatrix<T>, s: CMatrix<T>) -> Result<Self> {
        let m = a.nrows();
        if a.ncols() != m || s.nrows() != m || s.ncols() != m || m == 0 {
            return Err(Error::MalformedSqueeze(format!(
                "A is {}x{}, S is {}x{}; both must be the same nonempty square size",
                a.nrows(),
                a.ncols(),
                s.nrows(),
                s.ncols()
            )));
        }
        let anti = max_norm(&(&a + a.adjoint()));
        let sym = max_norm(&(&s - s.transpose()));
        let worst = anti.max(sym);
        if worst <= T::lit(SQUEEZE_EXACT_TOL) {
            return Ok(Self { a, s });
        }
        if worst <= T::lit(SQUEEZE_REPAIR_TOL) {
            log::warn!("squeezing parameter off by {worst:e}; symmetrizing");
            let half = T::lit(0.5);
            let a = (&a - a.adjoint()).map(|z| z * half);
            let s = (&s + s.transpose()).map(|z| z * half);
            return Ok(Self { a, s });
        }
        Err(Error::MalformedSqueeze(format!(
            "‖A + A*‖ = {anti:e}, ‖S − Sᵀ‖ = {sym:e}"
        )))
    }

    pub fn zero(m: usize) -> Self {
        Self {
            a: CMatrix::zeros(m, m),
            s: CMatrix::zeros(m, m),
        }
    }

    /// Pure symmetric squeezing `A = 0`, `S = ln(r)·I`, which makes
    /// `G_η = diag(r·I, I/r)`.
    pub fn r_family(m: usize, r: T) -> Result<Self> {
        if !(r > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "squeezing ratio must be positive, got {r}"
            )));
        }
        let s = CMatrix::from_diagonal_element(m, m, cplx(r.ln(), T::zero()));
        Ok(Self {
            a: CMatrix::zeros(m, m),
            s,
        })
    }

    /// `A = 0`, `S = I`: the single-mode matrix `[[0, 1], [1, 0]]` of the
    /// comparison plot, extended mode-wise.
    pub fn swap_l(m: usize) -> Self {
        Self {
            a: CMatrix::zeros(m, m),
            s: CMatrix::identity(m, m),
        }
    }

    pub fn modes(&self) -> usize {
        self.a.nrows()
    }

    pub fn anti_hermitian(&self) -> &CMatrix<T> {
        &self.a
    }

    pub fn symmetric(&self) -> &CMatrix<T> {
        &self.s
    }

    /// Largest entry modulus over both blocks.
    pub fn max_abs(&self) -> T {
        max_norm(&self.a).max(max_norm(&self.s))
    }
}

/// One copy of the state `ρ_{θ,η,N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSpec<T: Real> {
    pub theta: CVector<T>,
    pub eta: SqueezeParam<T>,
    pub mixture: T,
}

impl<T: Real> GaussianSpec<T> {
    pub fn new(theta: CVector<T>, eta: SqueezeParam<T>, mixture: T) -> Result<Self> {
        if theta.len() != eta.modes() {
            return Err(Error::InvalidArgument(format!(
                "θ has {} modes but η has {}",
                theta.len(),
                eta.modes()
            )));
        }
        if !(mixture >= T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "mixture must be ≥ 0, got {mixture}"
            )));
        }
        Ok(Self {
            theta,
            eta,
            mixture,
        })
    }

    pub fn modes(&self) -> usize {
        self.theta.len()
    }
}

/// Heterodyne mean `G_η μ_θ` and covariance `Σ_{η,N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceMoments<T: Real> {
    pub mu: DVector<T>,
    pub sigma: DMatrix<T>,
}

/// Stacks real and imaginary parts: `(Re θ; Im θ)`.
pub fn mu_theta<T: Real>(theta: &CVector<T>) -> DVector<T> {
    let m = theta.len();
    DVector::from_fn(
        2 * m,
        |i, _| if i < m { theta[i].re } else { theta[i - m].im },
    )
}

/// `G_η = exp([[Re A + Re S, −Im A + Im S], [Im A + Im S, Re A − Re S]])`.
pub fn g_matrix<T: Real>(eta: &SqueezeParam<T>) -> DMatrix<T> {
    let m = eta.modes();
    let (a, s) = (&eta.a, &eta.s);
    let gen = DMatrix::from_fn(2 * m, 2 * m, |r, c| {
        let (i, j) = (r % m, c % m);
        match (r < m, c < m) {
            (true, true) => a[(i, j)].re + s[(i, j)].re,
            (true, false) => -a[(i, j)].im + s[(i, j)].im,
            (false, true) => a[(i, j)].im + s[(i, j)].im,
            (false, false) => a[(i, j)].re - s[(i, j)].re,
        }
    });
    expm_real(&gen)
}

pub fn moments<T: Real>(spec: &GaussianSpec<T>) -> PhaseSpaceMoments<T> {
    let g = g_matrix(&spec.eta);
    let mu = &g * mu_theta(&spec.theta);
    let two_m = g.nrows();
    let quarter = T::lit(0.25);
    let scale = (T::lit(2.0) * spec.mixture + T::one()) * quarter;
    let mut sigma = (&g * g.transpose()) * scale + DMatrix::identity(two_m, two_m) * quarter;
    // exact symmetry
    let sym = (&sigma + sigma.transpose()) * T::lit(0.5);
    sigma.copy_from(&sym);
    PhaseSpaceMoments { mu, sigma }
}

/// Characteristic function of the Wigner distribution,
/// `Tr[ρ exp(−i(uᵀq̂ + vᵀp̂))]`.
pub fn fourier_wigner<T: Real>(
    spec: &GaussianSpec<T>,
    u: &DVector<T>,
    v: &DVector<T>,
) -> Result<Cplx<T>> {
    let m = spec.modes();
    if u.len() != m || v.len() != m {
        return Err(Error::InvalidArgument(format!(
            "u and v must have {m} entries, got {} and {}",
            u.len(),
            v.len()
        )));
    }
    let g = g_matrix(&spec.eta);
    let w = DVector::from_fn(2 * m, |i, _| if i < m { u[i] } else { v[i - m] });
    let gw = g.transpose() * &w;
    let quad = gw.dot(&gw);
    let lin = gw.dot(&mu_theta(&spec.theta));
    let scale = (T::lit(2.0) * spec.mixture + T::one()) * T::lit(0.25);
    Ok(cexp(cplx(-scale * quad, -T::lit(2.0).sqrt() * lin)))
}

/// Lower Cholesky factor, retrying once with a `1e-12` diagonal jitter.
pub fn cholesky_with_jitter<T: Real>(sigma: &DMatrix<T>) -> Result<DMatrix<T>> {
    if let Some(ch) = sigma.clone().cholesky() {
        return Ok(ch.l());
    }
    let n = sigma.nrows();
    let jittered = sigma + DMatrix::identity(n, n) * T::lit(1e-12);
    jittered
        .cholesky()
        .map(|ch| ch.l())
        .ok_or_else(|| Error::InvalidArgument("covariance is not positive definite".into()))
}

/// Draws `count` i.i.d. heterodyne outcomes from `Normal(μ_{θ,η}, Σ_{η,N})`.
pub fn heterodyne_sample<T, R>(
    spec: &GaussianSpec<T>,
    count: usize,
    rng: &mut R,
) -> Result<Vec<DVector<T>>>
where
    T: Real,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be ≥ 1".into()));
    }
    let mom = moments(spec);
    let chol = cholesky_with_jitter(&mom.sigma)?;
    Ok(draw_normal(&mom.mu, &chol, count, rng))
}

pub fn draw_normal<T, R>(
    mu: &DVector<T>,
    chol: &DMatrix<T>,
    count: usize,
    rng: &mut R,
) -> Vec<DVector<T>>
where
    T: Real,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    let dim = mu.len();
    (0..count)
        .map(|_| {
            let z = DVector::<T>::from_fn(dim, |_, _| StandardNormal.sample(rng));
            mu + chol * z
        })
        .collect()
}

/// Noncentrality functional `κ = μᵀ Σ⁻¹ μ` for one copy.
pub fn kappa<T: Real>(theta: &CVector<T>, eta: &SqueezeParam<T>, mixture: T) -> Result<T> {
    let spec = GaussianSpec::new(theta.clone(), eta.clone(), mixture)?;
    let mom = moments(&spec);
    let chol = mom
        .sigma
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidArgument("covariance is not positive definite".into()))?;
    let solved = chol.solve(&mom.mu);
    Ok(mom.mu.dot(&solved).max(T::zero()))
}

/// Orthogonal `R = R_{n−1}⋯R_1` with `R_k` the rotation by `arctan √k` in
/// the `(k, k+1)` plane; maps `1ₙ` to `√n eₙ`.
pub fn rotation_matrix_r<T: Real>(n: usize) -> Result<DMatrix<T>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "rotation needs n ≥ 2, got {n}"
        )));
    }
    let mut r = DMatrix::<T>::identity(n, n);
    for k in 1..n {
        let kf = T::from_usize_lossy(k);
        let norm = (kf + T::one()).sqrt();
        let c = T::one() / norm;
        let s = kf.sqrt() / norm;
        let mut rk = DMatrix::<T>::identity(n, n);
        rk[(k - 1, k - 1)] = c;
        rk[(k - 1, k)] = -s;
        rk[(k, k - 1)] = s;
        rk[(k, k)] = c;
        r = rk * r;
    }
    Ok(r)
}
