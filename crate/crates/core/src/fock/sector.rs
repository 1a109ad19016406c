//! Photon-number sectors and block-diagonal operators.
//!
//! Every number-conserving operator is block diagonal in the total photon
//! number. Only sectors with total `≤ d−1` are kept: all their basis vectors
//! lie inside the cutoff, so operators built here agree with the untruncated
//! ones on these blocks.

use std::collections::HashMap;

use rayon::prelude::*;

use super::single::thermal_coherent_matrix;
use super::{FockConfig, TruncatedOperator, CLUSTER_TOL};
use crate::distributions::DiscreteLaw;
use crate::error::{Error, Result};
use nalgebra::DMatrix;

use crate::linalg::{
    cluster_sorted, expm, expm_real, hermitian_eigen, hermitian_residual, max_norm,
    symmetric_eigen, CMatrix, CVector,
};
use crate::scalar::{creal, Cplx, Real};

#[derive(Debug, Clone)]
pub struct SectorBasis {
    config: FockConfig,
    states: Vec<Vec<Vec<u16>>>,
    lookup: Vec<HashMap<Vec<u16>, usize>>,
}

fn compositions(total: usize, parts: usize, prefix: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
    if parts == 1 {
        prefix.push(total as u16);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    // descending first entry gives lexicographically decreasing order
    for first in (0..=total).rev() {
        prefix.push(first as u16);
        compositions(total - first, parts - 1, prefix, out);
        prefix.pop();
    }
}

impl SectorBasis {
    pub fn new(config: FockConfig) -> Result<Self> {
        let modes = config.modes();
        let mut states = Vec::with_capacity(config.d);
        let mut count = 0usize;
        for total in 0..config.d {
            let mut sector = Vec::new();
            compositions(total, modes, &mut Vec::with_capacity(modes), &mut sector);
            count += sector.len();
            if count > config.budget {
                return Err(Error::BudgetExceeded {
                    dim: count,
                    budget: config.budget,
                });
            }
            states.push(sector);
        }
        let lookup = states
            .iter()
            .map(|s| {
                s.iter()
                    .enumerate()
                    .map(|(i, occ)| (occ.clone(), i))
                    .collect()
            })
            .collect();
        Ok(Self {
            config,
            states,
            lookup,
        })
    }

    pub fn config(&self) -> FockConfig {
        self.config
    }

    /// Number of complete sectors (`d`).
    pub fn sector_count(&self) -> usize {
        self.states.len()
    }

    pub fn sector_dim(&self, total: usize) -> usize {
        self.states[total].len()
    }

    pub fn occupations(&self, total: usize) -> &[Vec<u16>] {
        &self.states[total]
    }

    /// Position of `occ` in the dense basis.
    pub fn dense_index(&self, occ: &[u16]) -> usize {
        occ.iter()
            .fold(0, |acc, &n| acc * self.config.d + n as usize)
    }

    fn position(&self, total: usize, occ: &[u16]) -> Option<usize> {
        self.lookup[total].get(occ).copied()
    }
}

/// Operator stored as one dense block per complete sector.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator<T: Real> {
    pub config: FockConfig,
    pub blocks: Vec<CMatrix<T>>,
}

impl<T: Real> BlockOperator<T> {
    pub fn zeros(basis: &SectorBasis) -> Self {
        Self {
            config: basis.config,
            blocks: (0..basis.sector_count())
                .map(|s| CMatrix::zeros(basis.sector_dim(s), basis.sector_dim(s)))
                .collect(),
        }
    }

    pub fn identity(basis: &SectorBasis) -> Self {
        Self {
            config: basis.config,
            blocks: (0..basis.sector_count())
                .map(|s| CMatrix::identity(basis.sector_dim(s), basis.sector_dim(s)))
                .collect(),
        }
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(&CMatrix<T>, &CMatrix<T>) -> CMatrix<T> + Sync + Send,
    ) -> Self {
        Self {
            config: self.config,
            blocks: self
                .blocks
                .par_iter()
                .zip(other.blocks.par_iter())
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn map_blocks(&self, f: impl Fn(&CMatrix<T>) -> CMatrix<T> + Sync + Send) -> Self {
        Self {
            config: self.config,
            blocks: self.blocks.par_iter().map(f).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, z: Cplx<T>) -> Self {
        self.map_blocks(|a| a.map(|e| e * z))
    }

    pub fn adjoint(&self) -> Self {
        self.map_blocks(|a| a.adjoint())
    }

    pub fn expm(&self) -> Self {
        self.map_blocks(expm)
    }

    pub fn max_norm(&self) -> T {
        self.blocks
            .iter()
            .fold(T::zero(), |acc, b| acc.max(max_norm(b)))
    }

    pub fn hermitian_residual(&self) -> T {
        self.blocks
            .iter()
            .fold(T::zero(), |acc, b| acc.max(hermitian_residual(b)))
    }

    /// `Σ_s Tr[self_s · other_s]`.
    pub fn trace_product(&self, other: &Self) -> Cplx<T> {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .fold(creal(T::zero()), |acc, (a, b)| acc + (a * b).trace())
    }

    pub fn trace(&self) -> T {
        self.blocks
            .iter()
            .fold(T::zero(), |acc, b| acc + b.trace().re)
    }

    /// Embeds into the dense space; sectors beyond the cutoff edge are zero.
    pub fn to_dense(&self, basis: &SectorBasis) -> Result<TruncatedOperator<T>> {
        let dim = self.config.require_dense()?;
        let mut out = CMatrix::zeros(dim, dim);
        for (s, block) in self.blocks.iter().enumerate() {
            let idx: Vec<usize> = basis
                .occupations(s)
                .iter()
                .map(|o| basis.dense_index(o))
                .collect();
            for (r, &ir) in idx.iter().enumerate() {
                for (c, &ic) in idx.iter().enumerate() {
                    out[(ir, ic)] = block[(r, c)];
                }
            }
        }
        TruncatedOperator::new(self.config, out)
    }

    /// Restricts a dense operator to the complete sectors.
    pub fn from_dense(basis: &SectorBasis, op: &TruncatedOperator<T>) -> Self {
        let blocks = (0..basis.sector_count())
            .map(|s| {
                let idx: Vec<usize> = basis
                    .occupations(s)
                    .iter()
                    .map(|o| basis.dense_index(o))
                    .collect();
                CMatrix::from_fn(idx.len(), idx.len(), |r, c| op.entries[(idx[r], idx[c])])
            })
            .collect();
        Self {
            config: basis.config,
            blocks,
        }
    }

    /// `⟨ψ|A|ψ⟩` for a vector given per sector.
    pub fn expect_vector(&self, psi: &[CVector<T>]) -> Cplx<T> {
        self.blocks
            .iter()
            .zip(psi)
            .fold(creal(T::zero()), |acc, (a, v)| acc + v.dotc(&(a * v)))
    }
}

/// `Σ_{p,q} c_{pq} a*_p a_q` restricted to the complete sectors.
pub fn passive_block<T: Real>(basis: &SectorBasis, coeff: &CMatrix<T>) -> Result<BlockOperator<T>> {
    let modes = basis.config.modes();
    if coeff.nrows() != modes || coeff.ncols() != modes {
        return Err(Error::InvalidArgument(format!(
            "coefficient matrix must be {modes}x{modes}"
        )));
    }
    let nonzero: Vec<(usize, usize, Cplx<T>)> = (0..modes)
        .flat_map(|p| (0..modes).map(move |q| (p, q)))
        .filter_map(|(p, q)| {
            let c = coeff[(p, q)];
            (c != creal(T::zero())).then_some((p, q, c))
        })
        .collect();
    let blocks = (0..basis.sector_count())
        .into_par_iter()
        .map(|s| {
            let occs = basis.occupations(s);
            let mut block = CMatrix::<T>::zeros(occs.len(), occs.len());
            for (col, occ) in occs.iter().enumerate() {
                for &(p, q, c) in &nonzero {
                    let nq = occ[q] as usize;
                    if nq == 0 {
                        continue;
                    }
                    let mut next = occ.clone();
                    next[q] -= 1;
                    next[p] += 1;
                    let amp =
                        (T::from_usize_lossy(nq) * T::from_usize_lossy(next[p] as usize)).sqrt();
                    let row = basis
                        .position(s, &next)
                        .expect("number-conserving move stays in sector");
                    block[(row, col)] += c * amp;
                }
            }
            block
        })
        .collect();
    Ok(BlockOperator {
        config: basis.config,
        blocks,
    })
}

/// Coefficients of `v̂_B = Σ_i Σ_{j,k} B_{jk} a*_{i,j} a_{i,k}` (`B` is `n×n`).
pub fn copy_mixing_coefficients<T: Real>(config: FockConfig, b: &CMatrix<T>) -> CMatrix<T> {
    let m = config.m;
    CMatrix::from_fn(config.modes(), config.modes(), |p, q| {
        if p % m == q % m {
            b[(p / m, q / m)]
        } else {
            creal(T::zero())
        }
    })
}

/// Coefficients of `û_A = Σ_j Σ_{i,l} A_{il} a*_{i,j} a_{l,j}` (`A` is `m×m`).
pub fn mode_mixing_coefficients<T: Real>(config: FockConfig, a: &CMatrix<T>) -> CMatrix<T> {
    let m = config.m;
    CMatrix::from_fn(config.modes(), config.modes(), |p, q| {
        if p / m == q / m {
            a[(p % m, q % m)]
        } else {
            creal(T::zero())
        }
    })
}

/// `J_{j,k}`: `−1` at `(j,k)`, `+1` at `(k,j)` (1-based), zero when `j = k`.
pub fn j_matrix<T: Real>(n: usize, j: usize, k: usize) -> CMatrix<T> {
    let mut out = CMatrix::zeros(n, n);
    if j != k {
        out[(j - 1, k - 1)] = creal(-T::one());
        out[(k - 1, j - 1)] = creal(T::one());
    }
    out
}

/// `K_{j,k} = i·diag(e_j − e_k)`.
pub fn k_matrix<T: Real>(n: usize, j: usize, k: usize) -> CMatrix<T> {
    let mut out = CMatrix::zeros(n, n);
    if j != k {
        out[(j - 1, j - 1)] = crate::scalar::cplx(T::zero(), T::one());
        out[(k - 1, k - 1)] = crate::scalar::cplx(T::zero(), -T::one());
    }
    out
}

/// Blocks of `v̂_{j,k}`.
pub fn v_block<T: Real>(basis: &SectorBasis, j: usize, k: usize) -> Result<BlockOperator<T>> {
    let cfg = basis.config;
    cfg.check_copy(j)?;
    cfg.check_copy(k)?;
    v_block_from(basis, &j_matrix::<T>(cfg.n, j, k))
}

/// Blocks of `v̂_B` for an `n×n` matrix `B`.
pub(crate) fn v_block_from<T: Real>(
    basis: &SectorBasis,
    b: &CMatrix<T>,
) -> Result<BlockOperator<T>> {
    passive_block(basis, &copy_mixing_coefficients(basis.config, b))
}

/// Blocks of `R̂ = R̂_{n−1} ⋯ R̂_1`.
pub fn rotation_r_blocks<T: Real>(basis: &SectorBasis) -> Result<BlockOperator<T>> {
    let n = basis.config.n;
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "rotation needs n ≥ 2, got {n}"
        )));
    }
    let mut r = BlockOperator::identity(basis);
    for k in 1..n {
        let angle = T::from_usize_lossy(k).sqrt().atan();
        let step = v_block::<T>(basis, k, k + 1)?.scale(creal(angle)).expm();
        r = step.mul(&r);
    }
    Ok(r)
}

fn real_blocks<T: Real>(op: &BlockOperator<T>) -> Vec<DMatrix<T>> {
    op.blocks.iter().map(|b| b.map(|z| z.re)).collect()
}

fn is_real<T: Real>(op: &BlockOperator<T>) -> bool {
    op.blocks
        .iter()
        .all(|b| b.iter().all(|z| z.im == T::zero()))
}

/// Blocks of `T̂_inv = Σ_{k<n} R̂* v̂_{k,n} v̂*_{k,n} R̂`.
///
/// Every factor has real matrix elements in the number basis, so the
/// product is formed in real arithmetic as `Σ Mₖᵀ Mₖ` with `Mₖ = v̂ₖₙᵀ R̂`.
pub fn t_inv_blocks<T: Real>(basis: &SectorBasis) -> Result<BlockOperator<T>> {
    let n = basis.config.n;
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "T_inv needs n ≥ 2, got {n}"
        )));
    }
    let mut r: Vec<DMatrix<T>> = (0..basis.sector_count())
        .map(|s| DMatrix::identity(basis.sector_dim(s), basis.sector_dim(s)))
        .collect();
    for k in 1..n {
        let angle = T::from_usize_lossy(k).sqrt().atan();
        let v = real_blocks(&v_block::<T>(basis, k, k + 1)?);
        r = r
            .par_iter()
            .zip(v.par_iter())
            .map(|(r, v)| expm_real(&v.scale(angle)) * r)
            .collect();
    }
    let vs: Vec<Vec<DMatrix<T>>> = (1..n)
        .map(|k| v_block::<T>(basis, k, n).map(|v| real_blocks(&v)))
        .collect::<Result<_>>()?;
    let blocks = (0..basis.sector_count())
        .into_par_iter()
        .map(|s| {
            let dim = basis.sector_dim(s);
            let mut t = DMatrix::<T>::zeros(dim, dim);
            for v in &vs {
                let m = v[s].transpose() * &r[s];
                t += m.transpose() * m;
            }
            let t = (&t + t.transpose()).scale(T::lit(0.5));
            t.map(creal)
        })
        .collect();
    Ok(BlockOperator {
        config: basis.config,
        blocks,
    })
}

/// Complete-sector blocks of `⊗_p ρ_p`, one single-mode density matrix per
/// mode (each at least `d × d`).
pub fn product_blocks_from_modes<T: Real>(
    basis: &SectorBasis,
    singles: &[CMatrix<T>],
) -> Result<BlockOperator<T>> {
    if singles.len() != basis.config.modes() {
        return Err(Error::InvalidArgument(format!(
            "need {} single-mode states, got {}",
            basis.config.modes(),
            singles.len()
        )));
    }
    let blocks = (0..basis.sector_count())
        .into_par_iter()
        .map(|s| {
            let occs = basis.occupations(s);
            CMatrix::from_fn(occs.len(), occs.len(), |r, c| {
                occs[r]
                    .iter()
                    .zip(&occs[c])
                    .zip(singles)
                    .fold(creal(T::one()), |acc, ((&a, &b), rho)| {
                        acc * rho[(a as usize, b as usize)]
                    })
            })
        })
        .collect();
    Ok(BlockOperator {
        config: basis.config,
        blocks,
    })
}

/// Complete-sector blocks of `ρ_{θ,N}^{⊗n}` (mode `a_{i,j}` carries `θ_i`).
pub fn product_state_blocks<T: Real>(
    basis: &SectorBasis,
    theta: &CVector<T>,
    mixture: T,
) -> Result<BlockOperator<T>> {
    let cfg = basis.config;
    if theta.len() != cfg.m {
        return Err(Error::InvalidArgument(format!(
            "θ has {} entries, m = {}",
            theta.len(),
            cfg.m
        )));
    }
    let singles: Vec<CMatrix<T>> = theta
        .iter()
        .map(|&th| thermal_coherent_matrix(th, mixture, cfg.d))
        .collect::<Result<_>>()?;
    let per_mode: Vec<CMatrix<T>> = (0..cfg.modes())
        .map(|p| singles[p % cfg.m].clone())
        .collect();
    product_blocks_from_modes(basis, &per_mode)
}

/// Per-sector pieces of the product vector `⊗_p ψ_p`.
pub fn product_vector_blocks<T: Real>(
    basis: &SectorBasis,
    singles: &[CVector<T>],
) -> Vec<CVector<T>> {
    (0..basis.sector_count())
        .map(|s| {
            let occs = basis.occupations(s);
            CVector::from_fn(occs.len(), |r, _| {
                occs[r]
                    .iter()
                    .zip(singles)
                    .fold(creal(T::one()), |acc, (&n, psi)| acc * psi[n as usize])
            })
        })
        .collect()
}

/// Per-block eigen-decomposition of a hermitian block operator.
pub(crate) struct BlockEigen<T: Real> {
    pub config: FockConfig,
    pub values: Vec<Vec<T>>,
    pub vectors: Vec<CMatrix<T>>,
    /// Real eigenvectors, kept when every block was real symmetric.
    real_vectors: Option<Vec<DMatrix<T>>>,
}

pub(crate) fn block_eigen<T: Real>(op: &BlockOperator<T>) -> Result<BlockEigen<T>> {
    let res = op.hermitian_residual();
    if res > T::lit(1e-10) * (T::one() + op.max_norm()) {
        return Err(Error::NotHermitian(res.to_f64_lossy()));
    }
    if is_real(op) {
        let (values, real): (Vec<_>, Vec<_>) =
            real_blocks(op).par_iter().map(symmetric_eigen).unzip();
        return Ok(BlockEigen {
            config: op.config,
            values,
            vectors: real.iter().map(|u| u.map(creal)).collect(),
            real_vectors: Some(real),
        });
    }
    let (values, vectors) = op.blocks.par_iter().map(hermitian_eigen).unzip();
    Ok(BlockEigen {
        config: op.config,
        values,
        vectors,
        real_vectors: None,
    })
}

impl<T: Real> BlockEigen<T> {
    /// `⟨u|ρ|u⟩` for every eigenvector, tagged with its eigenvalue.
    fn weighted(&self, state: &BlockOperator<T>) -> Vec<(T, T)> {
        let mut out = Vec::new();
        if let Some(real) = &self.real_vectors {
            // for real u, ⟨u|ρ|u⟩ = uᵀ Re(ρ) u
            for (s, (vals, u)) in self.values.iter().zip(real).enumerate() {
                let rho_u = state.blocks[s].map(|z| z.re) * u;
                for (i, &lam) in vals.iter().enumerate() {
                    out.push((lam, u.column(i).dot(&rho_u.column(i))));
                }
            }
            return out;
        }
        for (s, (vals, vecs)) in self.values.iter().zip(&self.vectors).enumerate() {
            let rho_u = &state.blocks[s] * vecs;
            for (i, &lam) in vals.iter().enumerate() {
                let w = vecs.column(i).dotc(&rho_u.column(i)).re;
                out.push((lam, w));
            }
        }
        out
    }

    /// Shared cluster representatives, then one law per state.
    pub fn laws(&self, states: &[&BlockOperator<T>]) -> Vec<DiscreteLaw<T>> {
        let mut all: Vec<T> = self.values.iter().flatten().copied().collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let reps: Vec<T> = cluster_sorted(&all, T::lit(CLUSTER_TOL))
            .into_iter()
            .map(|c| c.0)
            .collect();
        let nearest = |x: T| -> usize {
            let pos = reps.partition_point(|&r| r < x);
            let candidates = [pos.saturating_sub(1), pos.min(reps.len() - 1)];
            candidates
                .into_iter()
                .min_by(|&a, &b| {
                    (reps[a] - x)
                        .magnitude()
                        .partial_cmp(&(reps[b] - x).magnitude())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .expect("nonempty")
        };
        states
            .iter()
            .map(|state| {
                let mut mass = vec![T::zero(); reps.len()];
                for (lam, w) in self.weighted(state) {
                    mass[nearest(lam)] += w;
                }
                let total = mass.iter().fold(T::zero(), |a, &w| a + w);
                DiscreteLaw::from_atoms(
                    reps.iter().copied().zip(mass),
                    (T::one() - total).max(T::zero()),
                )
            })
            .collect()
    }

    pub fn projection(&self, t: T) -> BlockOperator<T> {
        let cut = t + T::lit(CLUSTER_TOL);
        let blocks = self
            .values
            .iter()
            .zip(&self.vectors)
            .map(|(vals, vecs)| {
                let dim = vals.len();
                let mut p = CMatrix::<T>::zeros(dim, dim);
                for (i, &lam) in vals.iter().enumerate() {
                    if lam <= cut {
                        let u = vecs.column(i);
                        let ua = u.adjoint();
                        p += u * ua;
                    }
                }
                p
            })
            .collect();
        BlockOperator {
            config: self.config,
            blocks,
        }
    }
}

/// Laws of the outcome of `obs` under each state, on shared eigenvalue
/// clusters (tolerance [`CLUSTER_TOL`]). Each law's deficit from 1 is the
/// state's mass outside the complete sectors.
pub fn spectral_laws<T: Real>(
    obs: &BlockOperator<T>,
    states: &[&BlockOperator<T>],
) -> Result<Vec<DiscreteLaw<T>>> {
    Ok(block_eigen(obs)?.laws(states))
}

/// Blockwise spectral projection on eigenvalues `≤ t`.
pub fn spectral_projection_blocks<T: Real>(
    obs: &BlockOperator<T>,
    t: T,
) -> Result<BlockOperator<T>> {
    Ok(block_eigen(obs)?.projection(t))
}
