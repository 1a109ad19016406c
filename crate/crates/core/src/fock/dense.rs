//! Dense constructions on the full `d^{mn}` truncated space.

use super::single::{annihilation_matrix, thermal_coherent_matrix};
use super::{FockConfig, TruncatedOperator, TruncatedState, CLUSTER_TOL};
use crate::distributions::DiscreteLaw;
use crate::error::{Error, Result};
use crate::linalg::{cluster_sorted, expm, hermitian_eigen, kron, CMatrix, CVector};
use crate::phase_space::SqueezeParam;
use crate::scalar::{creal, Real};

/// `I ⊗ … ⊗ single ⊗ … ⊗ I` acting on mode `p`.
pub fn mode_operator<T: Real>(
    config: FockConfig,
    p: usize,
    single: &CMatrix<T>,
) -> Result<CMatrix<T>> {
    config.require_dense()?;
    let modes = config.modes();
    if p >= modes {
        return Err(Error::IndexOutOfRange(format!("mode {p} of {modes}")));
    }
    let d = config.d;
    let left = d.pow(p as u32);
    let right = d.pow((modes - 1 - p) as u32);
    let out = kron(&CMatrix::identity(left, left), single);
    Ok(kron(&out, &CMatrix::identity(right, right)))
}

fn annihilators<T: Real>(config: FockConfig) -> Result<Vec<CMatrix<T>>> {
    let a = annihilation_matrix::<T>(config.d);
    (0..config.modes())
        .map(|p| mode_operator(config, p, &a))
        .collect()
}

/// Number-conserving quadratic form `Σ c_{pq} a*_p a_q`.
fn passive_dense<T: Real>(
    config: FockConfig,
    coeff: impl Fn(usize, usize) -> T,
    imaginary: bool,
) -> Result<CMatrix<T>> {
    let dim = config.require_dense()?;
    let a = annihilators::<T>(config)?;
    let mut out = CMatrix::<T>::zeros(dim, dim);
    for p in 0..a.len() {
        for q in 0..a.len() {
            let c = coeff(p, q);
            if c != T::zero() {
                let z = if imaginary {
                    crate::scalar::cplx(T::zero(), c)
                } else {
                    creal(c)
                };
                out += (a[p].adjoint() * &a[q]).map(|e| e * z);
            }
        }
    }
    Ok(out)
}

/// `ŝ_η` summed over the `n` copies.
pub fn squeeze_generator<T: Real>(
    eta: &SqueezeParam<T>,
    config: FockConfig,
) -> Result<TruncatedOperator<T>> {
    if eta.modes() != config.m {
        return Err(Error::InvalidArgument(format!(
            "η has {} modes, config has m={}",
            eta.modes(),
            config.m
        )));
    }
    let dim = config.require_dense()?;
    let a = annihilators::<T>(config)?;
    let (am, sm) = (eta.anti_hermitian(), eta.symmetric());
    let half = T::lit(0.5);
    let mut gen = CMatrix::<T>::zeros(dim, dim);
    for j in 1..=config.n {
        for i in 1..=config.m {
            for l in 1..=config.m {
                let p = config.mode_index(i, j)?;
                let q = config.mode_index(l, j)?;
                let (aa, ss) = (am[(i - 1, l - 1)], sm[(i - 1, l - 1)]);
                let ap_dag = a[p].adjoint();
                if aa != creal(T::zero()) {
                    gen += (&ap_dag * &a[q]).map(|e| e * aa);
                }
                if ss != creal(T::zero()) {
                    gen += (&ap_dag * a[q].adjoint()).map(|e| e * ss * half);
                    gen -= (&a[p] * &a[q]).map(|e| e * ss.conj() * half);
                }
            }
        }
    }
    Ok(TruncatedOperator {
        config,
        entries: gen,
    })
}

/// `Ŝ_η^{⊗n} = exp(Σ ŝ_η)`.
pub fn squeeze<T: Real>(eta: &SqueezeParam<T>, config: FockConfig) -> Result<TruncatedOperator<T>> {
    let gen = squeeze_generator(eta, config)?;
    Ok(TruncatedOperator {
        config,
        entries: expm(&gen.entries),
    })
}

/// `v̂_{j,k} = Σ_i (a*_{i,k} a_{i,j} − a*_{i,j} a_{i,k})`.
pub fn v_operator<T: Real>(j: usize, k: usize, config: FockConfig) -> Result<TruncatedOperator<T>> {
    config.check_copy(j)?;
    config.check_copy(k)?;
    let m = config.m;
    let entries = passive_dense(
        config,
        |p, q| {
            if j == k || p % m != q % m {
                return T::zero();
            }
            let (cp, cq) = (p / m + 1, q / m + 1);
            if cp == k && cq == j {
                T::one()
            } else if cp == j && cq == k {
                -T::one()
            } else {
                T::zero()
            }
        },
        false,
    )?;
    Ok(TruncatedOperator { config, entries })
}

/// `d̂_{j,k} = i Σ_i (a*_{i,j} a_{i,j} − a*_{i,k} a_{i,k})`.
pub fn d_operator<T: Real>(j: usize, k: usize, config: FockConfig) -> Result<TruncatedOperator<T>> {
    config.check_copy(j)?;
    config.check_copy(k)?;
    let m = config.m;
    let entries = passive_dense(
        config,
        |p, q| {
            if p != q || j == k {
                return T::zero();
            }
            let c = p / m + 1;
            if c == j {
                T::one()
            } else if c == k {
                -T::one()
            } else {
                T::zero()
            }
        },
        true,
    )?;
    Ok(TruncatedOperator { config, entries })
}

/// `R̂ = R̂_{n−1} ⋯ R̂_1` with `R̂_k = exp(arctan(√k)·v̂_{k,k+1})`.
pub fn rotation_r<T: Real>(config: FockConfig) -> Result<TruncatedOperator<T>> {
    if config.n < 2 {
        return Err(Error::InvalidArgument(format!(
            "rotation needs n ≥ 2, got {}",
            config.n
        )));
    }
    let dim = config.require_dense()?;
    let mut r = CMatrix::<T>::identity(dim, dim);
    for k in 1..config.n {
        let angle = T::from_usize_lossy(k).sqrt().atan();
        let v = v_operator::<T>(k, k + 1, config)?.entries;
        r = expm(&v.map(|e| e * angle)) * r;
    }
    Ok(TruncatedOperator { config, entries: r })
}

/// `T̂_inv = Σ_{k<n} R̂* v̂_{k,n} v̂*_{k,n} R̂`.
pub fn t_inv_operator<T: Real>(config: FockConfig) -> Result<TruncatedOperator<T>> {
    let r = rotation_r::<T>(config)?.entries;
    let dim = config.dim();
    let mut t = CMatrix::<T>::zeros(dim, dim);
    for k in 1..config.n {
        let v = v_operator::<T>(k, config.n, config)?.entries;
        t += r.adjoint() * &v * v.adjoint() * &r;
    }
    Ok(TruncatedOperator { config, entries: t })
}

fn check_hermitian<T: Real>(op: &CMatrix<T>) -> Result<()> {
    let res = crate::linalg::hermitian_residual(op);
    if res > T::lit(1e-10) * (T::one() + crate::linalg::max_norm(op)) {
        return Err(Error::NotHermitian(res.to_f64_lossy()));
    }
    Ok(())
}

/// Projection onto the eigenspaces of `op` with eigenvalue `≤ t` (clusters
/// within [`CLUSTER_TOL`] are kept or dropped together).
pub fn spectral_projection<T: Real>(
    op: &TruncatedOperator<T>,
    t: T,
) -> Result<TruncatedOperator<T>> {
    check_hermitian(&op.entries)?;
    let (vals, vecs) = hermitian_eigen(&op.entries);
    let dim = vals.len();
    let mut proj = CMatrix::<T>::zeros(dim, dim);
    for (rep, members) in cluster_sorted(&vals, T::lit(CLUSTER_TOL)) {
        if rep <= t + T::lit(CLUSTER_TOL) {
            for i in members {
                let u = vecs.column(i);
                let ua = u.adjoint();
                proj += u * ua;
            }
        }
    }
    Ok(TruncatedOperator {
        config: op.config,
        entries: proj,
    })
}

/// Law of the outcome of measuring `obs` on `state`: cluster weights
/// `Tr[ρ Π_λ]`; the deficit from 1 is the state's missing trace.
pub fn spectral_measure<T: Real>(
    state: &TruncatedState<T>,
    obs: &TruncatedOperator<T>,
) -> Result<DiscreteLaw<T>> {
    check_hermitian(&obs.entries)?;
    let (vals, vecs) = hermitian_eigen(&obs.entries);
    let atoms: Vec<(T, T)> = cluster_sorted(&vals, T::lit(CLUSTER_TOL))
        .into_iter()
        .map(|(rep, members)| {
            let w = members.iter().fold(T::zero(), |acc, &i| {
                let u: CVector<T> = vecs.column(i).into_owned();
                acc + u.dotc(&(&state.entries * &u)).re
            });
            (rep, w)
        })
        .collect();
    let total = atoms.iter().fold(T::zero(), |a, &(_, w)| a + w);
    Ok(DiscreteLaw::from_atoms(
        atoms,
        (T::one() - total).max(T::zero()),
    ))
}

/// `ρ_{θ,N}^{⊗n}` with `θ ∈ C^m`: mode `a_{i,j}` carries `ρ_{θ_i,N}`.
pub fn product_state<T: Real>(
    config: FockConfig,
    theta: &CVector<T>,
    mixture: T,
) -> Result<TruncatedState<T>> {
    config.require_dense()?;
    if theta.len() != config.m {
        return Err(Error::InvalidArgument(format!(
            "θ has {} entries, config has m={}",
            theta.len(),
            config.m
        )));
    }
    let singles: Vec<CMatrix<T>> = theta
        .iter()
        .map(|&th| thermal_coherent_matrix(th, mixture, config.d))
        .collect::<Result<_>>()?;
    let mut rho = CMatrix::<T>::from_element(1, 1, creal(T::one()));
    for p in 0..config.modes() {
        rho = kron(&rho, &singles[p % config.m]);
    }
    let trace = rho.trace().re;
    Ok(TruncatedState {
        config,
        entries: rho,
        truncation_loss: (T::one() - trace).max(T::zero()),
    })
}

/// Diagonal projector on basis vectors with total photon number `≤ max_total`.
pub fn number_projector<T: Real>(
    config: FockConfig,
    max_total: usize,
) -> Result<TruncatedOperator<T>> {
    let dim = config.require_dense()?;
    let d = config.d;
    let diag = CVector::from_fn(dim, |idx, _| {
        let (mut x, mut total) = (idx, 0);
        while x > 0 {
            total += x % d;
            x /= d;
        }
        if total <= max_total {
            creal(T::one())
        } else {
            creal(T::zero())
        }
    });
    Ok(TruncatedOperator {
        config,
        entries: CMatrix::from_diagonal(&diag),
    })
}
