//! Special functions and quadrature used by the distribution and test modules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        // reflection
        let pi = T::pi();
        return (pi / (pi * x).sin().magnitude()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += T::lit(c) / (x + T::from_usize_lossy(i));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    T::lit(0.5) * T::two_pi().ln() + (x + half) * t.ln() - t + acc.ln()
}

/// `ln k!`.
pub fn ln_factorial<T: Real>(k: usize) -> T {
    if k < 2 {
        return T::zero();
    }
    ln_gamma(T::from_usize_lossy(k) + T::one())
}

pub fn ln_beta<T: Real>(a: T, b: T) -> T {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Euler beta function `B(x, y)` for `x, y > 0`.
pub fn beta_function<T: Real>(x: T, y: T) -> Result<T> {
    if !(x > T::zero() && y > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "beta function needs positive arguments, got ({x}, {y})"
        )));
    }
    Ok(ln_beta(x, y).exp())
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn reg_inc_beta<T: Real>(a: T, b: T, x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    if x >= T::one() {
        return T::one();
    }
    let ln_front = a * x.ln() + b * (T::one() - x).ln() - ln_beta(a, b);
    let front = ln_front.exp();
    if x < (a + T::one()) / (a + b + T::lit(2.0)) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        T::one() - front * beta_continued_fraction(b, a, T::one() - x) / b
    }
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn beta_continued_fraction<T: Real>(a: T, b: T, x: T) -> T {
    let tiny = T::lit(1e-300);
    let eps = T::lit(1e-16);
    let one = T::one();
    let two = T::lit(2.0);
    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.magnitude() < tiny {
        d = tiny;
    }
    d = one / d;
    let mut h = d;
    for m in 1..20_000usize {
        let m = T::from_usize_lossy(m);
        let m2 = two * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.magnitude() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.magnitude() < tiny {
            c = tiny;
        }
        d = one / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.magnitude() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.magnitude() < tiny {
            c = tiny;
        }
        d = one / d;
        let del = d * c;
        h *= del;
        if (del - one).magnitude() < eps {
            break;
        }
    }
    h
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const GK_KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const GK_GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real> Eq for Segment<T> {}
impl<T: Real> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
    }
}

fn gauss_kronrod_15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let radius = half * (b - a);
    let fc = f(center);
    let mut kronrod = fc * T::lit(GK_KRONROD_WEIGHTS[7]);
    let mut gauss = fc * T::lit(GK_GAUSS_WEIGHTS[3]);
    for i in 0..7 {
        let dx = radius * T::lit(GK_NODES[i]);
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * T::lit(GK_KRONROD_WEIGHTS[i]);
        if i % 2 == 1 {
            gauss += pair * T::lit(GK_GAUSS_WEIGHTS[i / 2]);
        }
    }
    let value = kronrod * radius;
    let error = ((kronrod - gauss) * radius).magnitude();
    (value, error)
}

/// Globally adaptive 15-point Gauss–Kronrod quadrature of `f` over `[a, b]`.
///
/// Stops once the summed error estimate is below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, rel_tol: T, abs_tol: T) -> Result<T> {
    const MAX_SEGMENTS: usize = 5_000;
    let (value, error) = gauss_kronrod_15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let floor = T::lit(64.0) * T::default_epsilon();
    for _ in 0..MAX_SEGMENTS {
        let target = abs_tol.max(rel_tol * total.magnitude());
        if total_err <= target {
            return Ok(total);
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = T::lit(0.5) * (worst.a + worst.b);
        if (worst.b - worst.a).magnitude() <= floor * (worst.a.magnitude() + worst.b.magnitude()) {
            // interval cannot be split further; accept what we have
            heap.push(worst);
            break;
        }
        let (v1, e1) = gauss_kronrod_15(&f, worst.a, mid);
        let (v2, e2) = gauss_kronrod_15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Recompute from scratch to shed accumulated rounding in the running sums.
    let total: T = heap.iter().fold(T::zero(), |acc, s| acc + s.value);
    let total_err: T = heap.iter().fold(T::zero(), |acc, s| acc + s.error);
    if total_err <= abs_tol.max(rel_tol * total.magnitude()) * T::lit(10.0) {
        Ok(total)
    } else {
        Err(Error::NoConvergence(format!(
            "adaptive quadrature error estimate {total_err:e} above tolerance"
        )))
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre<T: Real>(n: usize, a: T, b: T) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let half = T::lit(0.5);
    let center = half * (a + b);
    let radius = half * (b - a);
    let nf = T::from_usize_lossy(n);
    for i in 0..n.div_ceil(2) {
        let mut x = (T::pi() * (T::from_usize_lossy(i) + T::lit(0.75)) / (nf + half)).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            // P_n(x) and its derivative by the three-term recurrence
            let mut p0 = T::one();
            let mut p1 = x;
            for k in 2..=n {
                let kf = T::from_usize_lossy(k);
                let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { T::one() } else { p1 };
            let pn_1 = if n == 0 { T::zero() } else { p0 };
            dp = nf * (x * pn - pn_1) / (x * x - T::one());
            let step = pn / dp;
            x -= step;
            if step.magnitude() < T::lit(1e-15) {
                break;
            }
        }
        let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
        nodes[i] = center - radius * x;
        nodes[n - 1 - i] = center + radius * x;
        weights[i] = w * radius;
        weights[n - 1 - i] = w * radius;
    }
    (nodes, weights)
}
