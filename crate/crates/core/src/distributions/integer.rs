//! Finite-support integer laws: Poisson, negative binomial, the compound law
//! of `Y`, and lattice inversion of characteristic functions.

use std::fmt::Write as _;

use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::scalar::{cis, cplx, creal, Cplx, Real};
use crate::special::ln_gamma;

/// Default truncation tolerance for support tails.
pub const DEFAULT_TAIL_TOL: f64 = 1e-14;

/// pmf on the contiguous range `lo ..= lo + pmf.len() - 1` plus the mass lost
/// to truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegerDistribution<T: Real> {
    lo: i64,
    pmf: Vec<T>,
    tail_mass: T,
}

impl<T: Real> IntegerDistribution<T> {
    pub fn new(lo: i64, pmf: Vec<T>, tail_mass: T) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::InvalidArgument(
                "pmf must have at least one entry".into(),
            ));
        }
        if let Some(p) = pmf.iter().find(|p| !(**p >= T::zero())) {
            return Err(Error::InvalidArgument(format!("negative probability {p}")));
        }
        if !(tail_mass >= T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "negative tail mass {tail_mass}"
            )));
        }
        Ok(Self { lo, pmf, tail_mass })
    }

    /// Builds from raw masses, taking `tail_mass = max(0, 1 − Σ pmf)`.
    pub(crate) fn from_masses(lo: i64, pmf: Vec<T>) -> Self {
        let total = pmf.iter().fold(T::zero(), |a, &p| a + p);
        Self {
            lo,
            pmf,
            tail_mass: (T::one() - total).max(T::zero()),
        }
    }

    pub fn point_mass(value: i64) -> Self {
        Self {
            lo: value,
            pmf: vec![T::one()],
            tail_mass: T::zero(),
        }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.pmf.len() as i64 - 1
    }

    pub fn pmf(&self) -> &[T] {
        &self.pmf
    }

    pub fn tail_mass(&self) -> T {
        self.tail_mass
    }

    pub fn prob(&self, y: i64) -> T {
        if y < self.lo || y > self.hi() {
            return T::zero();
        }
        self.pmf[(y - self.lo) as usize]
    }

    pub fn total(&self) -> T {
        self.pmf.iter().fold(T::zero(), |a, &p| a + p)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, T)> + '_ {
        self.pmf
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.lo + i as i64, p))
    }

    pub fn mean(&self) -> T {
        self.iter()
            .fold(T::zero(), |a, (y, p)| a + T::lit(y as f64) * p)
    }

    /// `E[e^{irY}]` over the retained support.
    pub fn char_function(&self, r: T) -> Cplx<T> {
        self.iter().fold(creal(T::zero()), |acc, (y, p)| {
            acc + cis(r * T::lit(y as f64)) * p
        })
    }

    /// Law of `X + X'` for independent `X`, `X'`.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut pmf = vec![T::zero(); self.pmf.len() + other.pmf.len() - 1];
        for (i, &a) in self.pmf.iter().enumerate() {
            if a == T::zero() {
                continue;
            }
            for (j, &b) in other.pmf.iter().enumerate() {
                pmf[i + j] += a * b;
            }
        }
        let kept = (T::one() - self.tail_mass) * (T::one() - other.tail_mass);
        Self {
            lo: self.lo + other.lo,
            pmf,
            tail_mass: (T::one() - kept).max(T::zero()),
        }
    }

    /// Law of `k·X`.
    pub fn scaled(&self, k: i64) -> Self {
        assert!(k >= 1, "scale must be positive");
        let mut pmf = vec![T::zero(); (self.pmf.len() - 1) * k as usize + 1];
        for (i, &p) in self.pmf.iter().enumerate() {
            pmf[i * k as usize] = p;
        }
        Self {
            lo: self.lo * k,
            pmf,
            tail_mass: self.tail_mass,
        }
    }

    /// Law of `X − X'` for `X`, `X'` i.i.d.; symmetric exactly.
    pub fn symmetrized_difference(&self) -> Self {
        let n = self.pmf.len();
        let mut half = vec![T::zero(); n];
        for (y, slot) in half.iter_mut().enumerate() {
            *slot = (0..n - y).fold(T::zero(), |acc, a| acc + self.pmf[a] * self.pmf[a + y]);
        }
        let mut pmf = Vec::with_capacity(2 * n - 1);
        pmf.extend(half.iter().skip(1).rev().copied());
        pmf.extend(half.iter().copied());
        let kept = (T::one() - self.tail_mass) * (T::one() - self.tail_mass);
        Self {
            lo: -(n as i64 - 1),
            pmf,
            tail_mass: (T::one() - kept).max(T::zero()),
        }
    }

    /// Total variation distance, counting each side's tail mass as disjoint.
    pub fn total_variation(&self, other: &Self) -> T {
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        let diff = (lo..=hi).fold(T::zero(), |acc, y| {
            acc + (self.prob(y) - other.prob(y)).magnitude()
        });
        T::lit(0.5) * (diff + self.tail_mass + other.tail_mass)
    }

    /// Law of `f(Y)` as sorted atoms.
    pub fn push_forward(&self, f: impl Fn(i64) -> i64) -> DiscreteLaw<T> {
        DiscreteLaw::from_atoms(
            self.iter().map(|(y, p)| (T::lit(f(y) as f64), p)),
            T::zero(),
        )
    }

    /// Two columns `value probability`, then a `# tail_mass` footer.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (y, p) in self.iter() {
            let _ = writeln!(out, "{y} {:.17e}", p.to_f64_lossy());
        }
        let _ = writeln!(out, "# tail_mass {:.17e}", self.tail_mass.to_f64_lossy());
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut tail = None;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let raw = raw.trim();
            if raw.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::Parse {
                line,
                msg: msg.to_string(),
            };
            if let Some(rest) = raw.strip_prefix("# tail_mass") {
                tail = Some(
                    rest.trim()
                        .parse::<f64>()
                        .map_err(|_| bad("bad tail mass"))?,
                );
                continue;
            }
            let mut parts = raw.split_whitespace();
            let y = parts
                .next()
                .and_then(|s| s.parse::<i64>().ok())
                .ok_or_else(|| bad("bad value"))?;
            let p = parts
                .next()
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| bad("bad probability"))?;
            if parts.next().is_some() {
                return Err(bad("expected two columns"));
            }
            if let Some(&(prev, _)) = rows.last() {
                if y != prev + 1 {
                    return Err(bad("values must be consecutive integers"));
                }
            }
            rows.push((y, p));
        }
        let tail = tail.ok_or(Error::Parse {
            line: 0,
            msg: "missing tail_mass footer".into(),
        })?;
        let lo = rows.first().map(|r| r.0).ok_or(Error::Parse {
            line: 0,
            msg: "no rows".into(),
        })?;
        Self::new(
            lo,
            rows.into_iter().map(|(_, p)| T::lit(p)).collect(),
            T::lit(tail),
        )
    }
}

/// Weighted atoms on the real line, sorted by value with distinct values.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLaw<T: Real> {
    atoms: Vec<(T, T)>,
    tail_mass: T,
}

impl<T: Real> DiscreteLaw<T> {
    /// Sorts atoms and merges exactly equal values.
    pub fn from_atoms(atoms: impl IntoIterator<Item = (T, T)>, tail_mass: T) -> Self {
        let mut v: Vec<(T, T)> = atoms.into_iter().collect();
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut merged: Vec<(T, T)> = Vec::with_capacity(v.len());
        for (x, p) in v {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += p,
                _ => merged.push((x, p)),
            }
        }
        Self {
            atoms: merged,
            tail_mass,
        }
    }

    pub fn atoms(&self) -> &[(T, T)] {
        &self.atoms
    }

    pub fn tail_mass(&self) -> T {
        self.tail_mass
    }

    pub fn total(&self) -> T {
        self.atoms.iter().fold(T::zero(), |a, &(_, p)| a + p)
    }

    /// `P(X ≤ x)` over the retained atoms.
    pub fn cdf(&self, x: T) -> T {
        self.atoms
            .iter()
            .take_while(|(v, _)| *v <= x)
            .fold(T::zero(), |a, &(_, p)| a + p)
    }

    pub fn mass_at(&self, x: T, tol: T) -> T {
        self.atoms
            .iter()
            .filter(|(v, _)| (*v - x).magnitude() <= tol)
            .fold(T::zero(), |a, &(_, p)| a + p)
    }
}

/// Poisson(`rate`) truncated once the remaining tail is below `tol`.
pub fn poisson<T: Real>(rate: T, tol: T) -> Result<IntegerDistribution<T>> {
    if !(rate >= T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "Poisson rate must be ≥ 0, got {rate}"
        )));
    }
    if rate == T::zero() {
        return Ok(IntegerDistribution::point_mass(0));
    }
    let mut pmf = Vec::new();
    let mut k = 0usize;
    loop {
        let kf = T::from_usize_lossy(k);
        let p = (-rate + kf * rate.ln() - ln_gamma(kf + T::one())).exp();
        pmf.push(p);
        let r = rate / (kf + T::one());
        if kf + T::one() > rate && r < T::one() && p * r / (T::one() - r) < tol {
            break;
        }
        k += 1;
    }
    Ok(IntegerDistribution::from_masses(0, pmf))
}

/// Negative binomial `f(x) = C(m+x−1, x)(1−p)^m p^x`, truncated at tail `tol`.
pub fn neg_binomial<T: Real>(shape: T, p: T, tol: T) -> Result<IntegerDistribution<T>> {
    if !(p >= T::zero() && p < T::one()) {
        return Err(Error::InvalidArgument(format!(
            "negative binomial needs 0 ≤ p < 1, got {p}"
        )));
    }
    if !(shape > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "negative binomial shape must be > 0, got {shape}"
        )));
    }
    if p == T::zero() {
        return Ok(IntegerDistribution::point_mass(0));
    }
    let mut pmf = vec![(shape * (T::one() - p).ln()).exp()];
    let mut x = 0usize;
    loop {
        let xf = T::from_usize_lossy(x);
        let last = pmf[x];
        let r = p * (shape + xf) / (xf + T::one());
        let next = last * r;
        pmf.push(next);
        x += 1;
        // successive ratios move monotonically towards p
        let r_next = (p * (shape + xf + T::one()) / (xf + T::lit(2.0))).max(p);
        if r_next < T::one() && next * r_next / (T::one() - r_next) < tol {
            break;
        }
    }
    Ok(IntegerDistribution::from_masses(0, pmf))
}

/// `E[e^{irZ}]` for `Z ~ NB_m(p)`: `(1−p)^m (1−p e^{ir})^{−m}`.
pub fn neg_binomial_cf<T: Real>(shape: T, p: T, r: T) -> Cplx<T> {
    let one = creal(T::one());
    let base = (one - cis(r) * p) / (T::one() - p);
    // (base)^{-shape} through the principal log
    let ln = cplx(crate::scalar::cabs(base).ln(), base.im.atan2(base.re));
    crate::scalar::cexp(ln * (-shape))
}

/// Poisson rates `λ_k = s²N^{k−1}/(N+1)^{k+1}` of the compound law, with the
/// bound `Σ_{j>k} j·λ_j` on the mean of the dropped terms.
fn y_rates<T: Real>(s2: T, mixture: T, tol: T) -> (Vec<T>, T) {
    if s2 == T::zero() {
        return (Vec::new(), T::zero());
    }
    if mixture == T::zero() {
        return (vec![s2], T::zero());
    }
    let n1 = mixture + T::one();
    let q = mixture / n1;
    let one_minus_q = T::one() - q;
    let mut rates = Vec::new();
    let mut lam = s2 / (n1 * n1);
    let mut qk = T::one();
    for k in 1usize.. {
        rates.push(lam);
        qk *= q;
        let kf = T::from_usize_lossy(k);
        // Σ_{j>k} j q^{j−1} = q^k (k+1 − k q)/(1−q)²
        let rest = s2 / (n1 * n1) * qk * (kf + T::one() - kf * q) / (one_minus_q * one_minus_q);
        if rest < tol || k > 100_000 {
            return (rates, rest);
        }
        lam *= q;
    }
    unreachable!()
}

/// Law of `Y = F − G + Σ_k (kP_k − kQ_k)` with `F, G ~ NB_m(N/(N+1))` and
/// `P_k, Q_k ~ Poisson(λ_k)`, all independent. `theta_norm` is `‖θ‖`.
pub fn y_distribution<T: Real>(
    m: usize,
    theta_norm: T,
    mixture: T,
    tol: T,
) -> Result<IntegerDistribution<T>> {
    if m == 0 {
        return Err(Error::InvalidArgument("mode count must be ≥ 1".into()));
    }
    if !(mixture >= T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "mixture must be ≥ 0, got {mixture}"
        )));
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be > 0, got {tol}"
        )));
    }
    let p = mixture / (mixture + T::one());
    let mut a = neg_binomial(T::from_usize_lossy(m), p, tol)?;
    let (rates, dropped) = y_rates(theta_norm * theta_norm, mixture, tol);
    for (k, &rate) in rates.iter().enumerate() {
        let part = poisson(rate, tol)?.scaled(k as i64 + 1);
        a = a.convolve(&part);
    }
    // dropped components are nonzero with probability at most their mean
    a.tail_mass = (a.tail_mass + dropped).min(T::one());
    Ok(a.symmetrized_difference())
}

/// `φ_Y(r) = [γ(r)γ(−r)]^m ψ(r)ψ(−r)` with `γ(r) = 1/(N+1−Ne^{ir})` and
/// `ψ(r) = exp[γ(r)(e^{ir}−1)s²]`.
pub fn y_char_function<T: Real>(m: usize, theta_norm: T, mixture: T, r: T) -> Cplx<T> {
    let one = creal(T::one());
    let gamma = |r: T| one / (creal(mixture + T::one()) - cis(r) * mixture);
    let s2 = theta_norm * theta_norm;
    let psi = |r: T| crate::scalar::cexp(gamma(r) * (cis(r) - one) * s2);
    let g = gamma(r) * gamma(-r);
    let mut gm = one;
    for _ in 0..m {
        gm *= g;
    }
    gm * psi(r) * psi(-r)
}

/// Inverts a lattice characteristic function onto `[−bound, bound]` by the
/// trapezoid rule, doubling the grid until successive pmfs agree to 1e-10.
pub fn cf_invert<T: Real>(
    cf: impl Fn(T) -> Cplx<T>,
    support_bound: usize,
) -> Result<IntegerDistribution<T>> {
    let b = support_bound as i64;
    let mut k = (4 * (support_bound + 1)).next_power_of_two();
    let stability = T::lit(1e-10);
    let mut planner = FftPlanner::<T>::new();
    // p(y) = (1/k) Σ_j φ(r_j) e^{−i r_j y} with r_j = −π + 2πj/k, which is
    // (−1)^y/k times the forward DFT of φ(r_j) at y mod k
    let mut evaluate = |k: usize| -> Vec<T> {
        let step = T::two_pi() / T::from_usize_lossy(k);
        let mut values: Vec<Cplx<T>> = (0..k)
            .map(|j| cf(-T::pi() + step * T::from_usize_lossy(j)))
            .collect();
        planner.plan_fft_forward(k).process(&mut values);
        let kf = T::from_usize_lossy(k);
        let half = (k / 2) as i64;
        (-half..half)
            .map(|y| {
                let v = values[y.rem_euclid(k as i64) as usize].re / kf;
                if y % 2 == 0 {
                    v
                } else {
                    -v
                }
            })
            .collect()
    };
    let mut prev = evaluate(k);
    loop {
        k *= 2;
        let next = evaluate(k);
        let (ph, nh) = ((prev.len() / 2) as i64, (next.len() / 2) as i64);
        let diff = (-b..=b)
            .map(|y| (prev[(y + ph) as usize] - next[(y + nh) as usize]).magnitude())
            .fold(T::zero(), |a, d| a.max(d));
        prev = next;
        if diff <= stability {
            break;
        }
        if k > (1 << 22) {
            return Err(Error::NoConvergence(format!(
                "lattice inversion unstable, last change {diff:e}"
            )));
        }
    }
    let h = (prev.len() / 2) as i64;
    let outside = (-h..h)
        .filter(|y| y.abs() > b)
        .fold(T::zero(), |a, y| a + prev[(y + h) as usize].magnitude());
    if outside > T::lit(1e-8) {
        return Err(Error::SupportExceeded {
            bound: b,
            mass: outside.to_f64_lossy(),
        });
    }
    let pmf = (-b..=b)
        .map(|y| prev[(y + h) as usize].max(T::zero()))
        .collect();
    Ok(IntegerDistribution::from_masses(-b, pmf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// `P(Skellam(λ, λ) = y)` by the direct double series.
    fn skellam_oracle(lam: f64, y: i64) -> f64 {
        if lam == 0.0 {
            return if y == 0 { 1.0 } else { 0.0 };
        }
        let ay = y.unsigned_abs() as f64;
        let mut sum = 0.0;
        for k in 0..400 {
            let kf = k as f64;
            let ln = -2.0 * lam + (2.0 * kf + ay) * lam.ln()
                - ln_gamma(kf + 1.0)
                - ln_gamma(kf + ay + 1.0);
            sum += ln.exp();
        }
        sum
    }

    #[test]
    fn point_masses() {
        let nb = neg_binomial(2.0, 0.0, 1e-14).unwrap();
        assert_eq!(nb, IntegerDistribution::point_mass(0));
        let y = y_distribution(1, 0.0, 0.0, 1e-14).unwrap();
        assert_eq!(y.prob(0), 1.0);
        assert_eq!(y.tail_mass(), 0.0);
    }

    #[test]
    fn neg_binomial_moments_and_cf() {
        for &(m, p) in &[(1.0f64, 0.5f64), (2.0, 0.3), (3.0, 0.8)] {
            let nb = neg_binomial(m, p, 1e-15).unwrap();
            assert!((nb.mean() - m * p / (1.0 - p)).abs() < 1e-10);
            assert!((nb.total() + nb.tail_mass() - 1.0).abs() < 1e-12);
            for &r in &[0.0, 0.4, -1.3, 3.0] {
                let d = nb.char_function(r) - neg_binomial_cf(m, p, r);
                assert!(d.norm() < 1e-12);
            }
        }
        assert!(neg_binomial(1.0, 1.0, 1e-14).is_err());
    }

    #[test]
    fn y_at_zero_mixture_is_skellam() {
        for &s in &[0.3, 0.5, 1.0, 1.7] {
            let y = y_distribution(1, s, 0.0, 1e-15).unwrap();
            for v in -8..=8 {
                assert!(
                    (y.prob(v) - skellam_oracle(s * s, v)).abs() < 1e-13,
                    "s={s} y={v}"
                );
            }
        }
    }

    #[test]
    fn y_matches_char_function() {
        for &m in &[1usize, 2] {
            for &s in &[0.0, 0.5, 1.0] {
                for &n in &[0.0, 0.5, 1.0] {
                    let y = y_distribution(m, s, n, 1e-15).unwrap();
                    for j in 0..128 {
                        let r =
                            -std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / 128.0;
                        let d = y.char_function(r) - y_char_function(m, s, n, r);
                        assert!(d.norm() < 1e-8, "m={m} s={s} N={n} r={r}");
                    }
                }
            }
        }
    }

    #[test]
    fn cf_inversion_round_trips() {
        let delta = cf_invert(|_r: f64| creal(1.0), 5).unwrap();
        assert!((delta.prob(0) - 1.0).abs() < 1e-15 && delta.prob(1).abs() < 1e-15);
        let nb = neg_binomial(2.0f64, 0.4, 1e-16).unwrap();
        let inv = cf_invert(|r| neg_binomial_cf(2.0, 0.4, r), 80).unwrap();
        for (y, p) in nb.iter() {
            assert!((inv.prob(y) - p).abs() < 1e-10);
        }
        let err = cf_invert(|r| neg_binomial_cf(2.0, 0.9, r), 5).unwrap_err();
        assert!(matches!(err, Error::SupportExceeded { bound: 5, .. }));
    }

    #[test]
    fn text_round_trip() {
        let y = y_distribution(1, 0.5, 0.5, 1e-14).unwrap();
        let back = IntegerDistribution::<f64>::from_text(&y.to_text()).unwrap();
        assert_eq!(back.lo(), y.lo());
        for (a, b) in y.pmf().iter().zip(back.pmf()) {
            assert!((a - b).abs() <= 1e-16 * a.abs().max(1e-300));
        }
        assert!(IntegerDistribution::<f64>::from_text("0 0.5\n2 0.5\n# tail_mass 0\n").is_err());
        assert!(IntegerDistribution::<f64>::from_text("0 1\n").is_err());
    }

    proptest! {
        #[test]
        fn y_is_symmetric_and_normalized(m in 1usize..3, s in 0.0f64..1.5, n in 0.0f64..1.5) {
            let y = y_distribution(m, s, n, 1e-14).unwrap();
            prop_assert_eq!(y.lo(), -y.hi());
            for v in 0..=y.hi() {
                prop_assert_eq!(y.prob(v), y.prob(-v));
            }
            prop_assert!((y.total() + y.tail_mass() - 1.0).abs() < 1e-12);
            prop_assert!(y.tail_mass() < 1e-12);
        }

        #[test]
        fn inversion_is_identity_on_finite_laws(p in proptest::collection::vec(0.0f64..1.0, 1..12), lo in -5i64..5) {
            let total: f64 = p.iter().sum();
            prop_assume!(total > 0.1);
            let pmf: Vec<f64> = p.iter().map(|x| x / total).collect();
            let d = IntegerDistribution::new(lo, pmf, 0.0).unwrap();
            let inv = cf_invert(|r| d.char_function(r), 20).unwrap();
            for y in -20..=20 {
                prop_assert!((inv.prob(y) - d.prob(y)).abs() < 1e-10);
            }
        }
    }
}
