//! Truncated Fock-space construction of the SI test's operators.
//!
//! Modes are indexed `p = (j−1)·m + (i−1)` for the annihilator `a_{i,j}` of
//! mode `i` in copy `j`; a basis vector `|n_0 … n_{M−1}⟩` sits at index
//! `Σ n_p d^{M−1−p}` (mode 0 most significant).
//!
//! Two representations are provided. [`TruncatedOperator`] is the literal dense
//! matrix on `d^{mn}` basis vectors, built from truncated annihilators, for
//! small configurations. [`BlockOperator`] keeps only the photon-number sectors
//! with total `≤ d−1`, where every basis vector is inside the cutoff and
//! number-conserving operators act exactly; the spectral oracles run there.

mod dense;
mod dump;
mod oracle;
mod sector;
mod single;

pub use dense::{
    d_operator, mode_operator, number_projector, product_state, rotation_r, spectral_measure,
    spectral_projection, squeeze, squeeze_generator, t_inv_operator, v_operator,
};
pub use dump::{dump_operator, dump_state, parse_dump};
pub use oracle::{rotation_average_oracle, si_type2_fock, SiFockOracle, SiFockResult};
pub use sector::{
    copy_mixing_coefficients, j_matrix, k_matrix, mode_mixing_coefficients, passive_block,
    product_blocks_from_modes, product_state_blocks, product_vector_blocks, rotation_r_blocks,
    spectral_laws, spectral_projection_blocks, t_inv_blocks, v_block, BlockOperator, SectorBasis,
};
pub use single::{
    annihilation, coherent_overlap, coherent_vector, displacement, number_operator,
    thermal_coherent_state,
};

use crate::distributions::{neg_binomial, IntegerDistribution};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_residual, max_norm, CMatrix};
use crate::scalar::Real;
use single::thermal_coherent_matrix;

/// Default limit on the size of any basis built from a config: `d^{mn}` for
/// dense operators, the number of retained states for sector blocks.
pub const DEFAULT_BUDGET: usize = 1 << 20;
/// Largest side for which dense matrices are actually materialized.
pub const DENSE_LIMIT: usize = 4096;
/// Absolute tolerance for merging eigenvalues into one spectral cluster.
pub const CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockConfig {
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub budget: usize,
}

impl FockConfig {
    pub fn new(m: usize, n: usize, d: usize) -> Result<Self> {
        Self::with_budget(m, n, d, DEFAULT_BUDGET)
    }

    pub fn with_budget(m: usize, n: usize, d: usize, budget: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::CutoffTooSmall(d));
        }
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument(format!(
                "need m, n ≥ 1, got m={m}, n={n}"
            )));
        }
        Ok(Self { m, n, d, budget })
    }

    pub fn single_mode(d: usize) -> Result<Self> {
        Self::new(1, 1, d)
    }

    pub fn modes(&self) -> usize {
        self.m * self.n
    }

    fn dim_checked(&self) -> Option<usize> {
        self.d.checked_pow(u32::try_from(self.modes()).ok()?)
    }

    /// `d^{mn}`, saturating at `usize::MAX`.
    pub fn dim(&self) -> usize {
        self.dim_checked().unwrap_or(usize::MAX)
    }

    /// Mode index of `a_{i,j}` (1-based `i ≤ m`, `j ≤ n`).
    pub fn mode_index(&self, i: usize, j: usize) -> Result<usize> {
        if !(1..=self.m).contains(&i) || !(1..=self.n).contains(&j) {
            return Err(Error::IndexOutOfRange(format!(
                "a_({i},{j}) with m={}, n={}",
                self.m, self.n
            )));
        }
        Ok((j - 1) * self.m + (i - 1))
    }

    pub(crate) fn check_copy(&self, j: usize) -> Result<()> {
        if (1..=self.n).contains(&j) {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange(format!(
                "copy index {j} outside 1..={}",
                self.n
            )))
        }
    }

    pub(crate) fn require_dense(&self) -> Result<usize> {
        let dim = self.dim();
        let budget = self.budget.min(DENSE_LIMIT);
        if dim > budget {
            return Err(Error::BudgetExceeded { dim, budget });
        }
        Ok(dim)
    }
}

/// Default truncation loss targeted by [`adaptive_cutoff`].
pub const DEFAULT_TRUNCATION: f64 = 1e-8;

/// Smallest cutoff `d` with `P(total photon number of ρ_{θ,N}^{⊗n} ≥ d) < eps`,
/// which bounds the mass lost by both the dense and the sector truncation.
///
/// The total count on `mn` modes has the law of one displaced thermal mode
/// with amplitude `√n‖θ‖` plus `mn−1` thermal modes.
pub fn adaptive_cutoff<T: Real>(
    m: usize,
    n: usize,
    theta_norm: T,
    mixture: T,
    eps: T,
) -> Result<usize> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "need m, n ≥ 1, got m={m}, n={n}"
        )));
    }
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::InvalidArgument(format!(
            "truncation target must lie in (0, 1), got {eps}"
        )));
    }
    let amp = theta_norm * T::from_usize_lossy(n).sqrt();
    let modes = T::from_usize_lossy(m * n);
    let mean = amp * amp + modes * mixture;
    let sd = (mean * (T::one() + mixture) + amp * amp * mixture).sqrt();
    let mut work = (mean + T::lit(12.0) * sd + T::lit(16.0))
        .ceil()
        .to_usize()
        .unwrap_or(usize::MAX);
    loop {
        let rho = thermal_coherent_matrix(crate::scalar::creal(amp), mixture, work)?;
        let pmf: Vec<T> = (0..work).map(|k| rho[(k, k)].re.max(T::zero())).collect();
        let mut law = IntegerDistribution::from_masses(0, pmf);
        if m * n > 1 && mixture > T::zero() {
            let p = mixture / (mixture + T::one());
            let rest = neg_binomial(T::from_usize_lossy(m * n - 1), p, eps * T::lit(1e-3))?;
            law = law.convolve(&rest);
        }
        let mut below = T::zero();
        for (k, w) in law.iter() {
            if T::one() - below < eps {
                return Ok(usize::try_from(k).unwrap_or(0).max(2));
            }
            below += w;
        }
        work = work
            .checked_mul(2)
            .ok_or_else(|| Error::NoConvergence("cutoff search overflowed".into()))?;
    }
}

/// Dense operator on the truncated space of a [`FockConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator<T: Real> {
    pub config: FockConfig,
    pub entries: CMatrix<T>,
}

impl<T: Real> TruncatedOperator<T> {
    pub fn new(config: FockConfig, entries: CMatrix<T>) -> Result<Self> {
        let dim = config.dim();
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::InvalidArgument(format!(
                "matrix is {}x{}, config needs side {dim}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { config, entries })
    }

    pub fn identity(config: FockConfig) -> Result<Self> {
        let dim = config.require_dense()?;
        Ok(Self {
            config,
            entries: CMatrix::identity(dim, dim),
        })
    }

    pub fn hermitian_residual(&self) -> T {
        hermitian_residual(&self.entries)
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermitian_residual() <= tol
    }

    pub fn adjoint(&self) -> Self {
        Self {
            config: self.config,
            entries: self.entries.adjoint(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            config: self.config,
            entries: &self.entries * &other.entries,
        }
    }

    /// `‖(U*U − I)·P‖_max` with `P` the projector on total photon number `≤ max_total`.
    pub fn unitarity_defect_below(&self, max_total: usize) -> T {
        let p = number_projector::<T>(self.config, max_total)
            .expect("an existing operator fits the dense limit")
            .entries;
        let dim = self.config.dim();
        let gram = self.entries.adjoint() * &self.entries - CMatrix::identity(dim, dim);
        max_norm(&(&p * gram * &p))
    }
}

/// Dense density operator with its truncation loss `1 − trace` bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedState<T: Real> {
    pub config: FockConfig,
    pub entries: CMatrix<T>,
    pub truncation_loss: T,
}

impl<T: Real> TruncatedState<T> {
    pub fn trace(&self) -> T {
        self.entries.trace().re
    }

    /// `Tr[ρ A]`.
    pub fn expect(&self, a: &TruncatedOperator<T>) -> crate::scalar::Cplx<T> {
        (&self.entries * &a.entries).trace()
    }

    /// `U ρ U*`.
    pub fn conjugate_by(&self, u: &TruncatedOperator<T>) -> Self {
        Self {
            config: self.config,
            entries: &u.entries * &self.entries * u.entries.adjoint(),
            truncation_loss: self.truncation_loss,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson_tail(mean: f64, d: usize) -> f64 {
        let mut term = (-mean).exp();
        let mut below = 0.0;
        for k in 0..d {
            below += term;
            term *= mean / (k + 1) as f64;
        }
        1.0 - below
    }

    #[test]
    fn pure_cutoff_is_poisson_quantile() {
        for &(n, r) in &[(2usize, 0.5f64), (3, 0.7), (1, 2.0)] {
            let d = adaptive_cutoff(1, n, r, 0.0, 1e-8).unwrap();
            let mean = n as f64 * r * r;
            assert!(poisson_tail(mean, d) < 1e-8);
            assert!(
                d == 2 || poisson_tail(mean, d - 1) >= 1e-8 - 1e-15,
                "n={n} r={r} d={d}"
            );
        }
    }

    #[test]
    fn thermal_cutoff_covers_geometric_tail() {
        // vacuum plus one thermal mode: P(total ≥ d) = q^d
        let (mix, eps) = (0.5f64, 1e-8);
        let d = adaptive_cutoff(1, 1, 0.0, mix, eps).unwrap();
        let q: f64 = mix / (1.0 + mix);
        assert!(q.powi(d as i32) < eps && q.powi(d as i32 - 1) >= eps);
        let wider = adaptive_cutoff(2, 3, 0.3, mix, eps).unwrap();
        assert!(wider > d);
    }

    #[test]
    fn budgets_apply_where_used() {
        let cfg = FockConfig::with_budget(1, 2, 10, 50).unwrap();
        assert!(matches!(
            cfg.require_dense(),
            Err(Error::BudgetExceeded {
                dim: 100,
                budget: 50
            })
        ));
        assert_eq!(FockConfig::new(4, 4, 40).unwrap().dim(), usize::MAX);
    }
}
