//! Type II error curves over a grid of `‖θ‖` and their CSV form.

use std::fmt::Write as _;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{adaptive_cutoff, FockConfig, SiFockOracle, DEFAULT_TRUNCATION};
use crate::hypothesis::{
    hh_type2_analytic, hh_type2_montecarlo, si_type2_closed, si_type2_n2, TestSpec,
};
use crate::linalg::CVector;
use crate::phase_space::SqueezeParam;
use crate::scalar::{cplx, Real};

/// Direction of `θ = ‖θ‖·e₁` or `θ = i‖θ‖·e₁` relative to the squeezing axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Real,
    Imaginary,
}

/// One HH column: a squeezing parameter, a θ orientation and a column label.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaColumn<T: Real> {
    pub label: String,
    pub eta: SqueezeParam<T>,
    pub orientation: Orientation,
}

impl<T: Real> EtaColumn<T> {
    /// `beta_hh_eta0`.
    pub fn zero(m: usize) -> Self {
        Self {
            label: "eta0".into(),
            eta: SqueezeParam::zero(m),
            orientation: Orientation::Real,
        }
    }

    /// `S = I`, `A = 0` with `θ` along the stretched (real) or squeezed
    /// (imaginary) quadrature.
    pub fn swap_l(m: usize, orientation: Orientation) -> Self {
        let label = match orientation {
            Orientation::Real => "etaL_real",
            Orientation::Imaginary => "etaL_imag",
        };
        Self {
            label: label.into(),
            eta: SqueezeParam::swap_l(m),
            orientation,
        }
    }

    fn theta(&self, norm: T) -> CVector<T> {
        let m = self.eta.modes();
        let mut v = CVector::zeros(m);
        v[0] = match self.orientation {
            Orientation::Real => cplx(norm, T::zero()),
            Orientation::Imaginary => cplx(T::zero(), norm),
        };
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec<T: Real> {
    pub m: usize,
    pub n: usize,
    pub mixture: T,
    pub alpha: T,
    pub theta_grid: Vec<T>,
    pub columns: Vec<EtaColumn<T>>,
    /// Monte Carlo replicates per point and column; 0 skips simulation.
    pub reps: usize,
    pub seed: u64,
}

/// Evenly spaced grid; a single point requires `min == max`.
pub fn linear_grid<T: Real>(min: T, max: T, steps: usize) -> Result<Vec<T>> {
    if steps == 0 {
        return Err(Error::InvalidArgument(
            "grid needs at least one point".into(),
        ));
    }
    if !(min >= T::zero() && max >= min) {
        return Err(Error::InvalidArgument(format!(
            "grid needs 0 ≤ min ≤ max, got [{min}, {max}]"
        )));
    }
    if steps == 1 {
        if min != max {
            return Err(Error::InvalidArgument(
                "a one-point grid needs min == max".into(),
            ));
        }
        return Ok(vec![min]);
    }
    let step = (max - min) / T::from_usize_lossy(steps - 1);
    Ok((0..steps)
        .map(|k| min + step * T::from_usize_lossy(k))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow<T: Real> {
    pub theta: T,
    pub beta_si: T,
    pub beta_hh: Vec<T>,
    /// `(estimate, stderr)` per column when simulated.
    pub monte_carlo: Vec<(T, T)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve<T: Real> {
    pub spec: CurveSpec<T>,
    pub rows: Vec<CurveRow<T>>,
}

/// Largest sector basis the curve will hand to the Fock oracle.
pub const SECTOR_BUDGET: usize = 20_000;

/// How the SI column is evaluated for a given spec.
enum SiMethod<T: Real> {
    Closed(TestSpec<T>),
    TwoCopies,
    Fock(SiFockOracle<T>),
    Unavailable,
}

impl<T: Real> SiMethod<T> {
    fn choose(spec: &CurveSpec<T>) -> Result<Self> {
        let si = TestSpec::si(spec.m, spec.n, spec.mixture, spec.alpha)?;
        if spec.mixture == T::zero() {
            return Ok(Self::Closed(si));
        }
        if spec.n == 2 {
            return Ok(Self::TwoCopies);
        }
        let top = spec.theta_grid.iter().fold(T::zero(), |a, &b| a.max(b));
        let d = adaptive_cutoff(
            spec.m,
            spec.n,
            top,
            spec.mixture,
            T::lit(DEFAULT_TRUNCATION),
        )?;
        match FockConfig::with_budget(spec.m, spec.n, d, SECTOR_BUDGET).and_then(SiFockOracle::new)
        {
            Ok(oracle) => Ok(Self::Fock(oracle)),
            Err(Error::BudgetExceeded { dim, budget }) => {
                log::warn!(
                    "SI column needs a Fock oracle with {dim} states (limit {budget}); writing NaN"
                );
                Ok(Self::Unavailable)
            }
            Err(e) => Err(e),
        }
    }

    fn beta(&self, spec: &CurveSpec<T>, norm: T) -> Result<T> {
        match self {
            Self::Closed(si) => si_type2_closed(norm, si),
            Self::TwoCopies => si_type2_n2(norm, spec.m, spec.mixture, spec.alpha),
            Self::Fock(oracle) => {
                let mut theta = CVector::zeros(spec.m);
                theta[0] = cplx(norm, T::zero());
                Ok(oracle.type2(&theta, spec.mixture, spec.alpha)?.beta)
            }
            Self::Unavailable => Ok(T::lit(f64::NAN)),
        }
    }
}

impl<T: Real> ErrorCurve<T>
where
    StandardNormal: Distribution<T>,
{
    /// Evaluates every grid point; points run in parallel and Monte Carlo
    /// column `k` at grid point `i` uses experiment id `i·columns + k`.
    pub fn compute(spec: CurveSpec<T>) -> Result<Self> {
        if spec.theta_grid.is_empty() {
            return Err(Error::InvalidArgument("empty θ grid".into()));
        }
        let si = SiMethod::choose(&spec)?;
        let hh = TestSpec::hh(spec.m, spec.n, spec.mixture, spec.alpha)?;
        for col in &spec.columns {
            if col.eta.modes() != spec.m {
                return Err(Error::InvalidArgument(format!(
                    "column {} has {} modes, expected {}",
                    col.label,
                    col.eta.modes(),
                    spec.m
                )));
            }
        }
        let ncols = spec.columns.len();
        let rows = spec
            .theta_grid
            .par_iter()
            .enumerate()
            .map(|(i, &norm)| -> Result<CurveRow<T>> {
                let beta_si = si.beta(&spec, norm)?;
                let mut beta_hh = Vec::with_capacity(ncols);
                let mut monte_carlo = Vec::new();
                for (k, col) in spec.columns.iter().enumerate() {
                    let theta = col.theta(norm);
                    beta_hh.push(hh_type2_analytic(&theta, &col.eta, &hh)?);
                    if spec.reps > 0 {
                        let exp_id = u32::try_from(i * ncols + k).map_err(|_| {
                            Error::InvalidArgument("grid too large for stream ids".into())
                        })?;
                        let mc = hh_type2_montecarlo(
                            &theta, &col.eta, &hh, spec.reps, spec.seed, exp_id,
                        )?;
                        monte_carlo.push((mc.estimate, mc.stderr));
                    }
                }
                Ok(CurveRow {
                    theta: norm,
                    beta_si,
                    beta_hh,
                    monte_carlo,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { spec, rows })
    }
}

impl<T: Real> ErrorCurve<T> {
    pub fn header(&self) -> Vec<String> {
        let mut cols = vec!["theta".to_string(), "beta_si".to_string()];
        cols.extend(
            self.spec
                .columns
                .iter()
                .map(|c| format!("beta_hh_{}", c.label)),
        );
        if self.spec.reps > 0 {
            for c in &self.spec.columns {
                cols.push(format!("mc_beta_hh_{}", c.label));
                cols.push(format!("mc_stderr_{}", c.label));
            }
        }
        cols
    }

    /// CSV with `# ` comment lines first, then the header and one row per
    /// grid point. Numbers use 17 significant digits.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "{}", self.header().join(","));
        let fmt = |x: T| format!("{:.16e}", x.to_f64_lossy());
        for row in &self.rows {
            let mut fields = vec![fmt(row.theta), fmt(row.beta_si)];
            fields.extend(row.beta_hh.iter().map(|&b| fmt(b)));
            for &(e, s) in &row.monte_carlo {
                fields.push(fmt(e));
                fields.push(fmt(s));
            }
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(grid: Vec<f64>, reps: usize) -> CurveSpec<f64> {
        CurveSpec {
            m: 1,
            n: 3,
            mixture: 0.0,
            alpha: 0.05,
            theta_grid: grid,
            columns: vec![
                EtaColumn::zero(1),
                EtaColumn::swap_l(1, Orientation::Real),
                EtaColumn::swap_l(1, Orientation::Imaginary),
            ],
            reps,
            seed: 3,
        }
    }

    #[test]
    fn grid_rules() {
        assert_eq!(linear_grid(0.0, 1.0, 3).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(linear_grid(0.0, 0.0, 1).unwrap(), vec![0.0]);
        assert!(linear_grid(0.0, 1.0, 1).is_err());
        assert!(linear_grid(1.0, 0.0, 3).is_err());
    }

    #[test]
    fn zero_grid_gives_one_minus_alpha() {
        let curve = ErrorCurve::compute(spec(vec![0.0], 0)).unwrap();
        let row = &curve.rows[0];
        assert!((row.beta_si - 0.95).abs() < 1e-12);
        for b in &row.beta_hh {
            assert!((b - 0.95).abs() < 1e-9);
        }
        let csv = curve.to_csv(&["seed = 3".into()]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# seed = 3");
        assert_eq!(
            lines[1],
            "theta,beta_si,beta_hh_eta0,beta_hh_etaL_real,beta_hh_etaL_imag"
        );
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn mixed_three_copy_curve_uses_fock_oracle() {
        let mut sp = spec(vec![0.0, 0.2], 0);
        sp.mixture = 0.1;
        sp.columns.truncate(1);
        let curve = ErrorCurve::compute(sp).unwrap();
        assert!((curve.rows[0].beta_si - 0.95).abs() < 1e-8);
        let b = curve.rows[1].beta_si;
        assert!(b < 0.95 && b > 0.5, "{b}");
    }

    #[test]
    fn orientations_differ_under_squeezing() {
        let curve = ErrorCurve::compute(spec(vec![0.5], 0)).unwrap();
        let b = &curve.rows[0].beta_hh;
        assert!((b[1] - b[2]).abs() > 1e-3);
    }

    #[test]
    fn simulated_columns_are_reproducible() {
        let a = ErrorCurve::compute(spec(vec![0.0, 0.5], 2000))
            .unwrap()
            .to_csv(&[]);
        let b = ErrorCurve::compute(spec(vec![0.0, 0.5], 2000))
            .unwrap()
            .to_csv(&[]);
        assert_eq!(a, b);
        assert!(a
            .lines()
            .next()
            .unwrap()
            .ends_with("mc_beta_hh_etaL_imag,mc_stderr_etaL_imag"));
    }

    proptest::proptest! {
        #[test]
        fn grids_hit_both_endpoints_in_order(min in 0.0..5.0f64, span in 0.0..10.0f64, steps in 2usize..200) {
            let g = linear_grid(min, min + span, steps).unwrap();
            proptest::prop_assert_eq!(g.len(), steps);
            proptest::prop_assert_eq!(g[0], min);
            proptest::prop_assert!((g[steps - 1] - (min + span)).abs() <= 1e-12 * (1.0 + span.abs() + min.abs()));
            proptest::prop_assert!(g.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
