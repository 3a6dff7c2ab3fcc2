//! The two worked systems as ready-made sections and solutions.

use super::{extend, tagged_period, Section, Trajectory, Wrps};
use crate::error::{Error, Result};
use crate::flows::{stationary_radius_value, RandomOdeFlow, SdeLimitCycleFlow, Truncation};
use crate::geometry::Point;
use crate::paths::SamplePath;
use std::sync::Arc;

/// `ψ₀ ≡ (cos α₀, sin α₀)` for the random ODE (angle in radians).
pub fn random_ode_section(alpha0: f64) -> Section {
    let p = Point::from_polar(1.0, alpha0);
    Arc::new(move |_: &SamplePath| Ok(p))
}

/// Extension of [`random_ode_section`]; periodic on paths with `ω(s + T) = ω(s)`.
pub fn random_ode_wrps(alpha0: f64) -> Wrps {
    extend("random-ode", random_ode_section(alpha0), tagged_period(), Arc::new(RandomOdeFlow))
}

/// `ψ₀(ω) = ρ*(ω)(cos 2πα₀, sin 2πα₀)` with `α₀` in turns.
pub fn sde_section_with(alpha0: f64, trunc: Truncation) -> Section {
    Arc::new(move |path: &SamplePath| Ok(Point::from_turns(stationary_radius_value(path, trunc)?, alpha0)))
}

pub fn sde_section(alpha0: f64) -> Section {
    sde_section_with(alpha0, Truncation::WindowStart)
}

pub fn sde_wrps(alpha0: f64) -> Wrps {
    extend("sde-limit-cycle", sde_section(alpha0), tagged_period(), Arc::new(SdeLimitCycleFlow))
}

/// Deliberate distortions of the closed-form limit-cycle solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corruption {
    /// Replaces `T(ω)` by `period_scale · T(ω)` inside `ψ`.
    pub period_scale: f64,
    /// Replaces `ρ*(ω)` by `radius_scale · ρ*(ω)`.
    pub radius_scale: f64,
    /// Multiplies the angular rate.
    pub rate_scale: f64,
}

impl Corruption {
    pub const NONE: Corruption = Corruption { period_scale: 1.0, radius_scale: 1.0, rate_scale: 1.0 };

    pub fn is_none(&self) -> bool {
        *self == Self::NONE
    }
}

impl Default for Corruption {
    fn default() -> Self {
        Self::NONE
    }
}

/// `ψ(t, ω) = ρ*(ω)(cos[2πα₀ + 2πt/Tω], sin[2πα₀ + 2πt/Tω])`, optionally corrupted.
pub fn sde_closed_form_wrps(alpha0: f64, c: Corruption) -> Wrps {
    let psi: Trajectory = Arc::new(move |t: f64, path: &SamplePath| -> Result<Point> {
        let period = path.period_tag().ok_or(Error::MissingPeriod)? * c.period_scale;
        let rho = c.radius_scale * stationary_radius_value(path, Truncation::WindowStart)?;
        Ok(Point::from_turns(rho, alpha0 + c.rate_scale * t / period))
    });
    let label = if c.is_none() { "sde-limit-cycle/closed-form" } else { "sde-limit-cycle/corrupted" };
    Wrps::new(label, psi, tagged_period())
}
