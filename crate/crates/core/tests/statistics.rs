//! Simulation-based checks of the HH statistic and the heterodyne model.

use nalgebra::DVector;
use num_complex::Complex64;
use qhyp::distributions::{noncentral_f_cdf, NoncentralFParams};
use qhyp::hypothesis::{hh_type2_analytic, hh_type2_montecarlo, hotelling_f, TestSpec};
use qhyp::linalg::CVector;
use qhyp::phase_space::{heterodyne_sample, kappa, GaussianSpec, SqueezeParam};
use qhyp::rng::stream_rng;

fn theta1(z: Complex64) -> CVector<f64> {
    CVector::from_vec(vec![z])
}

/// Kolmogorov–Smirnov distance between a sample and a continuous cdf.
fn ks_distance(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0f64, |acc, (i, &x)| {
        let f = cdf(x);
        acc.max((f - i as f64 / n).abs())
            .max(((i + 1) as f64 / n - f).abs())
    })
}

#[test]
fn null_statistic_follows_central_f() {
    // squeezing and mixing leave the null law of F_HH unchanged
    let reps = 20_000;
    let central = NoncentralFParams::central(2.0, 1.0).unwrap();
    for (k, (eta, mixture)) in [
        (SqueezeParam::zero(1), 0.0),
        (SqueezeParam::r_family(1, 0.3).unwrap(), 0.7),
    ]
    .into_iter()
    .enumerate()
    {
        let spec = GaussianSpec::new(CVector::zeros(1), eta, mixture).unwrap();
        let mut rng = stream_rng(21, k as u64);
        let fs: Vec<f64> = (0..reps)
            .map(|_| hotelling_f(&heterodyne_sample(&spec, 3, &mut rng).unwrap()).unwrap())
            .collect();
        let d = ks_distance(fs, |x| noncentral_f_cdf(x, &central));
        // 1% critical value of the one-sample KS statistic
        assert!(d < 1.628 / (reps as f64).sqrt(), "case {k}: D = {d}");
    }
}

#[test]
fn monte_carlo_matches_noncentral_f() {
    let spec = TestSpec::hh(1, 4, 0.2, 0.1).unwrap();
    let cases = [
        (Complex64::new(0.4, 0.0), SqueezeParam::zero(1)),
        (Complex64::new(0.4, 0.0), SqueezeParam::swap_l(1)),
        (Complex64::new(0.0, 0.4), SqueezeParam::swap_l(1)),
        (
            Complex64::new(0.3, 0.3),
            SqueezeParam::r_family(1, 2.0).unwrap(),
        ),
    ];
    for (i, (th, eta)) in cases.iter().enumerate() {
        let exact = hh_type2_analytic(&theta1(*th), eta, &spec).unwrap();
        let mc = hh_type2_montecarlo(&theta1(*th), eta, &spec, 40_000, 3, i as u32).unwrap();
        assert!(
            (mc.estimate - exact).abs() < 4.0 * mc.stderr,
            "case {i}: {} ± {} vs {exact}",
            mc.estimate,
            mc.stderr
        );
    }
}

#[test]
fn monte_carlo_is_calibrated_under_the_null() {
    let spec = TestSpec::<f64>::hh(2, 6, 0.0, 0.05).unwrap();
    let mc = hh_type2_montecarlo(
        &CVector::zeros(2),
        &SqueezeParam::zero(2),
        &spec,
        30_000,
        8,
        0,
    )
    .unwrap();
    assert!(
        (mc.estimate - 0.95).abs() < 4.0 * mc.stderr,
        "{}",
        mc.estimate
    );
}

#[test]
fn r_family_noncentrality() {
    // κ = 4r²‖θ‖²/((2N+1)r²+1) when θ is real
    for (r, mixture, th) in [(0.5, 0.0, 0.7), (2.0, 0.3, 0.4), (1.0, 1.0, 1.1)] {
        let k = kappa(
            &theta1(Complex64::new(th, 0.0)),
            &SqueezeParam::r_family(1, r).unwrap(),
            mixture,
        )
        .unwrap();
        let want = 4.0 * r * r * th * th / ((2.0 * mixture + 1.0) * r * r + 1.0);
        assert!(
            (k - want).abs() < 1e-12 * want.max(1.0),
            "r={r}: {k} vs {want}"
        );
    }
}

#[test]
fn heterodyne_draws_are_reproducible() {
    let spec = GaussianSpec::new(
        theta1(Complex64::new(0.2, -0.1)),
        SqueezeParam::swap_l(1),
        0.4,
    )
    .unwrap();
    let a = heterodyne_sample(&spec, 50, &mut stream_rng(4, 2)).unwrap();
    let b = heterodyne_sample(&spec, 50, &mut stream_rng(4, 2)).unwrap();
    assert_eq!(a, b);
    let c = heterodyne_sample(&spec, 50, &mut stream_rng(4, 3)).unwrap();
    assert_ne!(a, c);
    assert!(a.iter().all(|x: &DVector<f64>| x.len() == 2));
}
