//! Single-mode building blocks.

use super::{FockConfig, TruncatedOperator, TruncatedState};
use crate::error::{Error, Result};
use crate::linalg::{expm, CMatrix, CVector};
use crate::scalar::{cabs, cexp, cplx, creal, Cplx, Real};
use crate::special::ln_factorial;

/// Truncated annihilator: `(k, k+1)` entry `√(k+1)`.
pub fn annihilation<T: Real>(d: usize) -> Result<TruncatedOperator<T>> {
    let config = FockConfig::single_mode(d)?;
    Ok(TruncatedOperator {
        config,
        entries: annihilation_matrix(d),
    })
}

pub(crate) fn annihilation_matrix<T: Real>(d: usize) -> CMatrix<T> {
    let mut a = CMatrix::zeros(d, d);
    for k in 0..d.saturating_sub(1) {
        a[(k, k + 1)] = creal(T::from_usize_lossy(k + 1).sqrt());
    }
    a
}

pub fn number_operator<T: Real>(d: usize) -> Result<TruncatedOperator<T>> {
    let config = FockConfig::single_mode(d)?;
    let entries =
        CMatrix::from_diagonal(&CVector::from_fn(d, |k, _| creal(T::from_usize_lossy(k))));
    Ok(TruncatedOperator { config, entries })
}

/// First `d` Fock amplitudes `e^{−|θ|²/2} θ^k/√k!` and the tail mass
/// `1 − Σ|entries|²`.
pub fn coherent_vector<T: Real>(theta: Cplx<T>, d: usize) -> (CVector<T>, T) {
    let r2 = theta.norm_sqr();
    let mut v = CVector::<T>::zeros(d);
    if d == 0 {
        return (v, T::one());
    }
    let r = cabs(theta);
    let phase = if r > T::zero() {
        theta / r
    } else {
        creal(T::one())
    };
    let half = T::lit(0.5);
    let mut ph = creal(T::one());
    let mut norm = T::zero();
    for k in 0..d {
        let kf = T::from_usize_lossy(k);
        let modulus = if r == T::zero() {
            if k == 0 {
                T::one()
            } else {
                T::zero()
            }
        } else {
            (-half * r2 + kf * r.ln() - half * ln_factorial::<T>(k)).exp()
        };
        v[k] = ph * modulus;
        norm += modulus * modulus;
        ph *= phase;
    }
    (v, (T::one() - norm).max(T::zero()))
}

/// `D̂_θ = exp(θa* − θ̄a)` from the truncated generator.
pub fn displacement<T: Real>(theta: Cplx<T>, d: usize) -> Result<TruncatedOperator<T>> {
    let config = FockConfig::single_mode(d)?;
    let a = annihilation_matrix::<T>(d);
    let gen = a.adjoint() * theta - &a * theta.conj();
    Ok(TruncatedOperator {
        config,
        entries: expm(&gen),
    })
}

/// Columns `D̂_θ|l⟩`, `l = 0..cols`, computed on a working cutoff `work` from
/// `D̂_θ|l⟩ = (a* − θ̄)D̂_θ|l−1⟩/√l`.
fn displaced_number_states<T: Real>(theta: Cplx<T>, cols: usize, work: usize) -> Vec<CVector<T>> {
    let (first, _) = coherent_vector(theta, work);
    let mut out = Vec::with_capacity(cols);
    out.push(first);
    for l in 1..cols {
        let prev = &out[l - 1];
        let scale = T::one() / T::from_usize_lossy(l).sqrt();
        let next = CVector::from_fn(work, |k, _| {
            let raised = if k == 0 {
                creal(T::zero())
            } else {
                prev[k - 1] * T::from_usize_lossy(k).sqrt()
            };
            (raised - prev[k] * theta.conj()) * scale
        });
        out.push(next);
    }
    out
}

/// `ρ_{θ,N} = D̂_θ ρ_{0,N} D̂_θ*` with `ρ_{0,N} = Σ_l N^l/(N+1)^{l+1} |l⟩⟨l|`,
/// restricted to the first `d` Fock states. Matrix elements are exact; the
/// state's `truncation_loss` is `1 − trace`.
pub fn thermal_coherent_state<T: Real>(
    theta: Cplx<T>,
    mixture: T,
    d: usize,
) -> Result<TruncatedState<T>> {
    let config = FockConfig::single_mode(d)?;
    let entries = thermal_coherent_matrix(theta, mixture, d)?;
    let trace = entries.trace().re;
    Ok(TruncatedState {
        config,
        entries,
        truncation_loss: (T::one() - trace).max(T::zero()),
    })
}

pub(crate) fn thermal_coherent_matrix<T: Real>(
    theta: Cplx<T>,
    mixture: T,
    d: usize,
) -> Result<CMatrix<T>> {
    if !(mixture >= T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "mixture must be ≥ 0, got {mixture}"
        )));
    }
    if d < 2 {
        return Err(Error::CutoffTooSmall(d));
    }
    if mixture == T::zero() {
        let (v, _) = coherent_vector(theta, d);
        return Ok(&v * v.adjoint());
    }
    let q = mixture / (mixture + T::one());
    // thermal weights until the geometric tail q^{L} drops below 1e-17
    let cols = ((T::lit(1e-17).ln() / q.ln()).ceil().to_usize().unwrap_or(1)).max(1);
    let r = cabs(theta);
    let spread = (r * r + T::lit(12.0) * r + T::lit(40.0))
        .ceil()
        .to_usize()
        .unwrap_or(40);
    let work = d + cols + spread;
    let columns = displaced_number_states(theta, cols, work);
    let mut rho = CMatrix::<T>::zeros(d, d);
    let mut g = T::one() / (mixture + T::one());
    for col in &columns {
        let v = col.rows(0, d);
        let va = v.adjoint();
        rho += (v * va).map(|z| z * g);
        g *= q;
    }
    Ok(rho)
}

/// `⟨θ|η⟩ = exp(−|θ|²/2 − |η|²/2 + θ̄η)`.
pub fn coherent_overlap<T: Real>(theta: Cplx<T>, eta: Cplx<T>) -> Cplx<T> {
    let half = T::lit(0.5);
    cexp(theta.conj() * eta - cplx(half * (theta.norm_sqr() + eta.norm_sqr()), T::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_norm;

    fn c(re: f64, im: f64) -> Cplx<f64> {
        cplx(re, im)
    }

    #[test]
    fn annihilation_entries() {
        let a = annihilation::<f64>(2).unwrap().entries;
        assert_eq!(
            a,
            CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)])
        );
        let a3 = annihilation::<f64>(3).unwrap().entries;
        assert_eq!(a3[(1, 2)].re, 2f64.sqrt());
        assert!(annihilation::<f64>(1).is_err());
        // [a, a*] = I below the edge
        let d = 7;
        let a = annihilation::<f64>(d).unwrap().entries;
        let comm = &a * a.adjoint() - a.adjoint() * &a;
        for k in 0..d - 1 {
            for l in 0..d - 1 {
                let want = if k == l { 1.0 } else { 0.0 };
                assert!((comm[(k, l)] - c(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn coherent_vectors() {
        let (v, tail) = coherent_vector(c(0.0, 0.0), 5);
        assert_eq!(v[0], c(1.0, 0.0));
        assert_eq!(tail, 0.0);
        let (_, tail) = coherent_vector(c(1.0, 0.0), 40);
        assert!(tail < 1e-12);
        let (t, _) = coherent_vector(c(0.3, -0.4), 40);
        let (e, _) = coherent_vector(c(-0.5, 0.2), 40);
        let ip = t.dotc(&e);
        assert!((ip - coherent_overlap(c(0.3, -0.4), c(-0.5, 0.2))).norm() < 1e-14);
    }

    #[test]
    fn displacement_matches_coherent_vector() {
        let d = 40;
        for &th in &[c(0.0, 0.0), c(1.0, 0.0), c(0.3, -0.8), c(-0.6, 0.6)] {
            let dmat = displacement(th, d).unwrap().entries;
            let (v, _) = coherent_vector(th, d);
            let col = dmat.column(0).into_owned();
            assert!((col - v).iter().all(|z| z.norm() < 1e-8));
            let back = displacement(-th, d).unwrap().entries;
            let prod = &dmat * &back;
            let interior = prod.view((0, 0), (20, 20)).into_owned();
            assert!(max_norm(&(interior - CMatrix::identity(20, 20))) < 1e-8);
        }
    }

    #[test]
    fn thermal_states() {
        let rho = thermal_coherent_state(c(0.0, 0.0), 1.0, 30).unwrap();
        for k in 0..30 {
            assert!((rho.entries[(k, k)].re - 0.5f64.powi(k as i32 + 1)).abs() < 1e-15);
        }
        let vac = thermal_coherent_state(c(0.0, 0.0), 0.0, 4).unwrap();
        assert_eq!(vac.entries[(0, 0)], c(1.0, 0.0));
        assert_eq!(vac.trace(), 1.0);
        let st = thermal_coherent_state(c(0.5, 0.0), 0.3, 40).unwrap();
        assert!(st.trace() >= 1.0 - 1e-8);
        assert!(thermal_coherent_state(c(0.5, 0.0), -0.1, 40).is_err());
    }

    #[test]
    fn thermal_state_agrees_with_displaced_operator() {
        let d = 60;
        let th = c(0.7, -0.4);
        let n_mix = 0.5;
        let exact = thermal_coherent_state(th, n_mix, d).unwrap().entries;
        let disp = displacement(th, 90).unwrap().entries;
        let mut thermal = CMatrix::<f64>::zeros(90, 90);
        for k in 0..90 {
            thermal[(k, k)] = c(n_mix.powi(k as i32) / (n_mix + 1.0).powi(k as i32 + 1), 0.0);
        }
        let via_expm = &disp * thermal * disp.adjoint();
        let diff = exact.view((0, 0), (20, 20)).into_owned()
            - via_expm.view((0, 0), (20, 20)).into_owned();
        assert!(max_norm(&diff) < 1e-10);
    }
}
