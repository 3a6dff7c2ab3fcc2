//! Inversion of `F(x) = x exp(1/(2x²))` on either side of its minimum at `x = 1`.
//!
//! Everything is done in log space: with `y = ln ρ` the potential is
//! `g(ρ) = ln F(ρ) = y + e^{-2y}/2`, and we work with its excess over the
//! minimum `h(y) = g - 1/2 = y + expm1(-2y)/2 ≥ 0`. `h` decreases on
//! `y < 0` (the lower branch `ρ ∈ (0, 1]`) and increases on `y > 0`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Solution in `(0, 1]`.
    Lower,
    /// Solution in `[1, ∞)`.
    Upper,
}

/// `ln F(ρ) = ln ρ + 1/(2ρ²)`.
pub fn log_f(rho: f64) -> f64 {
    rho.ln() + 0.5 / (rho * rho)
}

/// `h(y) = y + expm1(-2y)/2`, accurate near the double root at 0.
pub(crate) fn excess(y: f64) -> f64 {
    if y.abs() < 0.1 {
        // Σ_{k≥2} (-2y)^k / (2 k!)
        let mut term = 0.5 * 2.0 * y * y; // k = 2: 4y²/(2·2)
        let mut sum = term;
        for k in 3..=18 {
            term *= -2.0 * y / k as f64;
            sum += term;
        }
        sum
    } else {
        y + 0.5 * (-2.0 * y).exp_m1()
    }
}

fn excess_slope(y: f64) -> f64 {
    -(-2.0 * y).exp_m1()
}

/// `g(ρ) - 1/2` evaluated without cancellation.
pub fn level_excess(rho: f64) -> f64 {
    excess(rho.ln())
}

/// Solve `h(y) = ell` on `branch`, returning `ρ = e^y`.
pub fn invert_excess(ell: f64, branch: Branch) -> Result<f64> {
    if !ell.is_finite() || ell < 0.0 {
        return Err(Error::NoRealSolution { target: (ell + 0.5).exp() });
    }
    if ell == 0.0 {
        return Ok(1.0);
    }
    // Brackets from y²/3 ≤ h(y) ≤ y² near 0 and the asymptotes of h.
    let (mut lo, mut hi) = match branch {
        Branch::Upper => (0.0, if 3.0 * ell <= 1.0 { (3.0 * ell).sqrt() } else { ell + 0.5 }),
        Branch::Lower => (-(ell.sqrt().min(0.5 * (2.0 * ell + 1.0).ln() + 1.0)), 0.0),
    };
    // f(y) = h(y) - ell, oriented so that f(lo) ≤ 0 ≤ f(hi) after the flip.
    let sign = if branch == Branch::Upper { 1.0 } else { -1.0 };
    let f = |y: f64| sign * (excess(y) - ell);
    if f(lo) > 0.0 || f(hi) < 0.0 {
        return Err(Error::NoConvergence(format!("bracket [{lo}, {hi}] invalid for level {ell}")));
    }

    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Newton polish, falling back to bisection whenever a step leaves the bracket.
    let mut y = 0.5 * (lo + hi);
    if ell < 1e-6 {
        y = (sign * ell.sqrt()).clamp(lo, hi);
    }
    for _ in 0..200 {
        let fy = f(y);
        if fy == 0.0 {
            return Ok(y.exp());
        }
        if fy < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let slope = sign * excess_slope(y);
        let mut next = y - fy / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - y).abs() <= 4.0 * f64::EPSILON * y.abs().max(f64::MIN_POSITIVE) || hi - lo <= f64::EPSILON * y.abs()
        {
            return Ok(next.exp());
        }
        y = next;
    }
    Err(Error::NoConvergence(format!("level {ell} on {branch:?} branch")))
}

/// Solve `ln F(ρ) = log_target` on `branch`.
pub fn invert_f_log(log_target: f64, branch: Branch) -> Result<f64> {
    invert_excess(log_target - 0.5, branch).map_err(|e| match e {
        Error::NoRealSolution { .. } => Error::NoRealSolution { target: log_target.exp() },
        other => other,
    })
}

/// Solve `F(ρ) = target` on `branch`. `target = e^{1/2}` returns exactly 1.
pub fn invert_f(target: f64, branch: Branch) -> Result<f64> {
    let minimum = 0.5f64.exp();
    if !(target >= minimum) {
        return Err(Error::NoRealSolution { target });
    }
    if target == minimum {
        return Ok(1.0);
    }
    invert_excess((target.ln() - 0.5).max(0.0), branch)
}
