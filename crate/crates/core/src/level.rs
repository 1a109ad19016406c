//! Randomized level equation on a discrete null law.
//!
//! Given the null law of a statistic `X` and a level `α`, find thresholds
//! `s < t` and a weight `w ∈ (0, 1]` with
//! `1 − α = (1 − w)·P₀(X ≤ s) + w·P₀(X ≤ t)`. The test accepts when `X ≤ s`,
//! and accepts with probability `w` when `s < X ≤ t`.

use crate::distributions::DiscreteLaw;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// How close a cumulative null mass must be to `1 − α` to count as an exact hit.
pub const EXACT_HIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSolution<T: Real> {
    /// `None` when `1 − α` is below the smallest atom's mass (`K_s = {0}`).
    pub s: Option<T>,
    pub t: T,
    pub w: T,
    /// `t = s, w = 1`: the null mass at `s` equals `1 − α`, or no atom above
    /// `s` survived truncation.
    pub degenerate: bool,
}

impl<T: Real> LevelSolution<T> {
    /// `(1 − w)·P(X ≤ s) + w·P(X ≤ t)` under `law`.
    pub fn acceptance(&self, law: &DiscreteLaw<T>) -> T {
        let below_s = self.s.map_or(T::zero(), |s| law.cdf(s));
        (T::one() - self.w) * below_s + self.w * law.cdf(self.t)
    }
}

pub fn solve_level<T: Real>(null: &DiscreteLaw<T>, alpha: T) -> Result<LevelSolution<T>> {
    if !(alpha >= T::zero() && alpha <= T::one()) {
        return Err(Error::InvalidLevel {
            alpha: alpha.to_f64_lossy(),
            range: "[0, 1]",
        });
    }
    let atoms = null.atoms();
    if atoms.is_empty() {
        return Err(Error::InvalidArgument("null law has no atoms".into()));
    }
    let target = T::one() - alpha;
    let hit = T::lit(EXACT_HIT_TOL);
    let mut cum = T::zero();
    let mut s: Option<(T, T)> = None;
    for (i, &(x, p)) in atoms.iter().enumerate() {
        let next = cum + p;
        if (next - target).magnitude() <= hit {
            return Ok(LevelSolution {
                s: Some(x),
                t: x,
                w: T::one(),
                degenerate: true,
            });
        }
        if next > target {
            let below = s.map_or(T::zero(), |(_, c)| c);
            let w = (target - below) / (next - below);
            return Ok(LevelSolution {
                s: s.map(|(v, _)| v),
                t: atoms[i].0,
                w,
                degenerate: false,
            });
        }
        cum = next;
        s = Some((x, cum));
    }
    // every retained atom fits under 1 − α; the rest went to truncation
    let (x, _) = s.expect("at least one atom");
    log::debug!("level equation: no atom above s = {x}, using degenerate solution");
    Ok(LevelSolution {
        s: Some(x),
        t: x,
        w: T::one(),
        degenerate: true,
    })
}
