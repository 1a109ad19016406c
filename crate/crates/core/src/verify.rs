//! Cross-check batteries run by `qhyp verify`.
//!
//! Every check compares two independent constructions and reports the
//! measured residual against its tolerance. Checks whose configuration does
//! not fit the Fock budget are reported as skipped, never as passed.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::distributions::{
    cf_invert, critical_point, noncentral_f_cdf, noncentral_f_pdf, si_integral_scaled,
    y_char_function, y_distribution, DiscreteLaw, IntegerDistribution, NoncentralFParams,
};
use crate::error::{Error, Result};
use crate::fock::{
    coherent_vector, number_projector, product_blocks_from_modes, product_state_blocks,
    product_vector_blocks, rotation_average_oracle, rotation_r_blocks, spectral_laws,
    spectral_projection_blocks, squeeze_generator, t_inv_blocks, thermal_coherent_state, v_block,
    v_operator, FockConfig, SectorBasis, SiFockOracle,
};
use crate::hypothesis::{
    crossing_check, hh_type2_analytic, hh_type2_montecarlo, si_type2_closed, si_type2_n2, TestSpec,
};
use crate::linalg::{max_norm, CMatrix, CVector};
use crate::phase_space::SqueezeParam;
use crate::rng::stream_rng;
use crate::scalar::{cis, cplx, creal};
use crate::special::{beta_function, integrate};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Fock,
    Distributions,
    Tests,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 4] = ["fock", "distributions", "tests", "all"];
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fock" => Ok(Self::Fock),
            "distributions" => Ok(Self::Distributions),
            "tests" => Ok(Self::Tests),
            "all" => Ok(Self::All),
            other => Err(Error::InvalidArgument(format!(
                "unknown suite `{other}`, expected one of {}",
                Self::NAMES.join(", ")
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Pass,
    Fail,
    /// Reason the check could not run.
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub outcome: Outcome,
}

impl CheckResult {
    pub fn failed(&self) -> bool {
        self.outcome == Outcome::Fail
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.outcome {
            Outcome::Skipped(why) => write!(f, "SKIP  {}  ({why})", self.name),
            o => write!(
                f,
                "{}  {}  residual={:.3e}  tol={:.1e}",
                if *o == Outcome::Pass { "PASS" } else { "FAIL" },
                self.name,
                self.residual,
                self.tolerance
            ),
        }
    }
}

fn check(
    name: impl Into<String>,
    tolerance: f64,
    run: impl FnOnce() -> Result<f64>,
) -> CheckResult {
    let name = name.into();
    match run() {
        Ok(residual) => CheckResult {
            outcome: if residual <= tolerance {
                Outcome::Pass
            } else {
                Outcome::Fail
            },
            name,
            residual,
            tolerance,
        },
        Err(Error::BudgetExceeded { dim, budget }) => {
            log::warn!("{name}: skipped, basis of {dim} exceeds budget {budget}");
            CheckResult {
                name,
                residual: f64::NAN,
                tolerance,
                outcome: Outcome::Skipped(format!("basis of {dim} exceeds budget {budget}")),
            }
        }
        Err(e) => {
            log::error!("{name}: {e}");
            CheckResult {
                name,
                residual: f64::NAN,
                tolerance,
                outcome: Outcome::Fail,
            }
        }
    }
}

pub fn run_suite(suite: Suite) -> Vec<CheckResult> {
    match suite {
        Suite::Fock => fock_suite(),
        Suite::Distributions => distributions_suite(),
        Suite::Tests => tests_suite(),
        Suite::All => {
            let mut all = fock_suite();
            all.extend(distributions_suite());
            all.extend(tests_suite());
            all
        }
    }
}

fn theta1(x: f64) -> CVector<f64> {
    CVector::from_vec(vec![creal(x)])
}

/// `Σ_y |p(y) − q(y)|` between an eigenvalue law on the integers and an
/// integer distribution.
fn lattice_distance(law: &DiscreteLaw<f64>, dist: &IntegerDistribution<f64>) -> f64 {
    let mut seen = 0.0;
    let mut diff = 0.0;
    for &(x, w) in law.atoms() {
        let y = x.round();
        if (x - y).abs() > 1e-6 {
            diff += w;
            continue;
        }
        let p = dist.prob(y as i64);
        diff += (w - p).abs();
        seen += p;
    }
    diff + (dist.total() - seen).abs()
}

pub fn fock_suite() -> Vec<CheckResult> {
    let mut out = Vec::new();
    for n in [2usize, 3] {
        let oracle = FockConfig::new(1, n, 30).and_then(SiFockOracle::<f64>::new);
        for th in [0.0, 0.3, 0.7] {
            out.push(check(
                format!("fock/si_vs_closed_form[n={n},theta={th}]"),
                1e-4,
                || {
                    let oracle = oracle.as_ref().map_err(Clone::clone)?;
                    let got = oracle.type2(&theta1(th), 0.0, 0.05)?.beta;
                    let want = si_type2_closed(th, &TestSpec::si(1, n, 0.0, 0.05)?)?;
                    Ok((got - want).abs())
                },
            ));
        }
    }
    out.push(check("fock/si_vs_y_law[N=0.5,n=2,theta=0.5]", 1e-4, || {
        let got = SiFockOracle::<f64>::new(FockConfig::new(1, 2, 40)?)?
            .type2(&theta1(0.5), 0.5, 0.05)?
            .beta;
        Ok((got - si_type2_n2(0.5, 1, 0.5, 0.05)?).abs())
    }));
    for (th, mix) in [(0.5, 0.0), (0.5, 0.5), (1.0, 1.0)] {
        out.push(check(
            format!("fock/v12_spectrum_vs_y_law[theta={th},N={mix}]"),
            1e-4,
            || {
                let basis = SectorBasis::new(FockConfig::new(1, 2, 40)?)?;
                let obs = v_block::<f64>(&basis, 1, 2)?.scale(cplx(0.0, -1.0));
                let theta = CVector::from_vec(vec![cis(std::f64::consts::FRAC_PI_4) * th]);
                let state = product_state_blocks(&basis, &theta, mix)?;
                let law = spectral_laws(&obs, &[&state])?.remove(0);
                Ok(lattice_distance(&law, &y_distribution(1, th, mix, 1e-14)?))
            },
        ));
    }
    for n in [2usize, 3] {
        out.push(check(
            format!("fock/k0_equals_rotation_average[n={n},d=8]"),
            1e-6,
            || {
                let cfg = FockConfig::new(1, n, 8)?;
                let basis = SectorBasis::new(cfg)?;
                let w = rotation_average_oracle::<f64>(cfg)?;
                let k0 = spectral_projection_blocks(&t_inv_blocks::<f64>(&basis)?, 0.0)?;
                Ok(k0.sub(&w).max_norm())
            },
        ));
        out.push(check(
            format!("fock/rotation_average_coherent_diagonal[n={n}]"),
            1e-5,
            || {
                let d = 14;
                let cfg = FockConfig::new(1, n, d)?;
                let basis = SectorBasis::new(cfg)?;
                let w = rotation_average_oracle::<f64>(cfg)?;
                let b = beta_function((n as f64 - 1.0) / 2.0, 0.5)?;
                let mut worst: f64 = 0.0;
                for r in [0.0, 0.3, 0.6] {
                    let (v, _) = coherent_vector(creal(r), d);
                    let got = w
                        .expect_vector(&product_vector_blocks(&basis, &vec![v; n]))
                        .re;
                    let want = si_integral_scaled(n as f64 * r * r, n)? / b;
                    worst = worst.max((got - want).abs());
                }
                Ok(worst)
            },
        ));
    }
    out.push(check(
        "fock/rotation_concentrates_product[n=3,theta=0.3,d=25]",
        1e-6,
        || {
            let cfg = FockConfig::new(1, 3, 25)?;
            let basis = SectorBasis::new(cfg)?;
            let r = rotation_r_blocks::<f64>(&basis)?;
            let rho = product_state_blocks(&basis, &theta1(0.3), 0.0)?;
            let moved = r.mul(&rho).mul(&r.adjoint());
            let vac = thermal_coherent_state(creal(0.0), 0.0, 25)?.entries;
            let last = thermal_coherent_state(creal(0.3 * 3f64.sqrt()), 0.0, 25)?.entries;
            let target = product_blocks_from_modes(&basis, &[vac.clone(), vac, last])?;
            // rank ≤ 2, so trace norm ≤ √2 · Frobenius
            let frob: f64 = moved
                .sub(&target)
                .blocks
                .iter()
                .map(|b| b.norm_squared())
                .sum::<f64>()
                .sqrt();
            Ok(frob * 2f64.sqrt())
        },
    ));
    out.push(check(
        "fock/squeeze_commutes_with_v12[20 draws,d=12]",
        1e-8,
        || {
            let cfg = FockConfig::new(1, 2, 12)?;
            let v = v_operator::<f64>(1, 2, cfg)?.entries;
            let p = number_projector::<f64>(cfg, cfg.d - 3)?.entries;
            let mut rng = stream_rng(7, 0);
            let mut worst: f64 = 0.0;
            for _ in 0..20 {
                let eta = random_squeeze(&mut rng)?;
                let g = squeeze_generator(&eta, cfg)?.entries;
                let comm = &v * &g - &g * &v;
                worst = worst.max(max_norm(&(&p * comm * &p)));
            }
            Ok(worst)
        },
    ));
    out
}

/// Single-mode `η` with `|A|, |S| ≤ 1`.
pub fn random_squeeze(rng: &mut impl Rng) -> Result<SqueezeParam<f64>> {
    let a = CMatrix::from_element(1, 1, cplx(0.0, rng.random_range(-1.0..1.0)));
    let s = CMatrix::from_element(
        1,
        1,
        cis(rng.random_range(0.0..std::f64::consts::TAU)) * rng.random_range(0.0..1.0),
    );
    SqueezeParam::new(a, s)
}

pub fn distributions_suite() -> Vec<CheckResult> {
    let mut out = Vec::new();
    for m in [1usize, 2] {
        for s in [0.0, 0.5, 1.0] {
            for mix in [0.0, 0.5, 1.0] {
                out.push(check(
                    format!("distributions/cf_product_vs_compound_law[m={m},theta={s},N={mix}]"),
                    1e-8,
                    || {
                        let compound = y_distribution(m, s, mix, 1e-15)?;
                        let bound = compound.hi().max(-compound.lo()) as usize;
                        let inverted = cf_invert(|r| y_char_function(m, s, mix, r), bound)?;
                        Ok(inverted.total_variation(&compound))
                    },
                ));
            }
        }
    }
    for lam in [0.0, 1.0, 5.0] {
        out.push(check(
            format!("distributions/noncentral_f_normalization[2,3,lambda={lam}]"),
            1e-8,
            || {
                let p = NoncentralFParams::new(2.0, 3.0, lam)?;
                let total = integrate(
                    |t: f64| {
                        if t <= 0.0 || t >= 1.0 {
                            return 0.0;
                        }
                        let f = (t / (1.0 - t)).powi(2);
                        noncentral_f_pdf(f, &p).unwrap_or(f64::NAN) * 2.0 * t / (1.0 - t).powi(3)
                    },
                    0.0,
                    1.0,
                    1e-11,
                    1e-12,
                )?;
                Ok((total - 1.0).abs())
            },
        ));
    }
    for alpha in [0.01f64, 0.05, 0.5] {
        out.push(check(
            format!("distributions/critical_point_round_trip[2,1,alpha={alpha}]"),
            1e-9,
            || {
                let c = critical_point(alpha, 2.0, 1.0)?;
                let tail = 1.0 - noncentral_f_cdf(c, &NoncentralFParams::central(2.0, 1.0)?);
                Ok((tail - alpha).abs())
            },
        ));
    }
    out
}

pub fn tests_suite() -> Vec<CheckResult> {
    let mut out = Vec::new();
    for th in [0.3f64, 0.7, 1.2] {
        out.push(check(
            format!("tests/si_closed_vs_two_copy_law[theta={th}]"),
            1e-8,
            || {
                let closed = si_type2_closed(th, &TestSpec::si(1, 2, 0.0, 0.05)?)?;
                Ok((closed - si_type2_n2(th, 1, 0.0, 0.05)?).abs())
            },
        ));
    }
    out.push(check(
        "tests/si_small_theta_slope_ratio[n=3,theta=2.5e-3]",
        1e-2,
        || {
            let spec = TestSpec::si(1, 3, 0.0, 0.05)?;
            let th: f64 = 2.5e-3;
            let ratio = (0.95 - si_type2_closed(th, &spec)?) / (3.0 * th * th * 0.95);
            Ok((ratio - 1.0).abs())
        },
    ));
    out.push(check(
        "tests/hh_sup_at_weak_squeezing[r=1e-3]",
        1e-4,
        || {
            let spec = TestSpec::hh(1, 3, 0.0, 0.05)?;
            let beta = hh_type2_analytic(&theta1(0.5), &SqueezeParam::r_family(1, 1e-3)?, &spec)?;
            Ok((beta - 0.95).abs())
        },
    ));
    let reps = 20_000;
    let mc = (|| -> Result<(f64, f64, f64)> {
        let spec = TestSpec::hh(1, 3, 0.0, 0.05)?;
        let eta = SqueezeParam::r_family(1, 0.5)?;
        let analytic = hh_type2_analytic(&theta1(0.5), &eta, &spec)?;
        let sim = hh_type2_montecarlo(&theta1(0.5), &eta, &spec, reps, 11, 0)?;
        Ok((analytic, sim.estimate, sim.stderr))
    })();
    match mc {
        Ok((a, e, s)) => out.push(check(
            "tests/hh_analytic_vs_monte_carlo[theta=0.5,r=0.5]",
            4.0 * s,
            || Ok((a - e).abs()),
        )),
        Err(e) => out.push(check(
            "tests/hh_analytic_vs_monte_carlo[theta=0.5,r=0.5]",
            0.0,
            || Err(e),
        )),
    }
    out.push(check(
        "tests/crossing_witnesses[alpha=0.05,theta<=60]",
        0.0,
        || {
            let grid: Vec<f64> = (1..=1200).map(|k| 0.05 * k as f64).collect();
            crossing_check(0.05, &grid)?.witnesses()?;
            Ok(0.0)
        },
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        for name in Suite::NAMES {
            assert!(name.parse::<Suite>().is_ok());
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn budget_errors_are_skips() {
        let r = check("x", 1.0, || {
            Err(Error::BudgetExceeded { dim: 10, budget: 5 })
        });
        assert!(matches!(r.outcome, Outcome::Skipped(_)));
        assert!(r.to_string().starts_with("SKIP"));
        let f = check("y", 1.0, || Err(Error::NoConvergence("z".into())));
        assert!(f.failed());
        let p = check("z", 1e-3, || Ok(1e-4));
        assert_eq!(p.outcome, Outcome::Pass);
    }

    #[test]
    fn distributions_suite_passes() {
        let results = distributions_suite();
        for r in &results {
            assert_eq!(r.outcome, Outcome::Pass, "{r}");
        }
    }
}
