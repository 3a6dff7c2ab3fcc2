use super::radial::{invert_excess, level_excess, Branch};
use super::{AngleUnit, FlowMap};
use crate::error::{Error, Result};
use crate::geometry::{reduce_radians, Point};
use crate::paths::SamplePath;

/// Radii within this distance of 1 are treated as lying on the invariant
/// unit circle. The implicit radial law is singular there: a point
/// `1 + δ` reaches the level of `1 + √t` after time `t` however small `δ` is.
pub const CIRCLE_SNAP: f64 = 1e-12;

/// Random ODE on the plane: the radius moves along level sets
/// `ρ(t) e^{1/(2ρ(t)²)} = e^t ρ₀ e^{1/(2ρ₀²)}` on the branch of `ρ₀`, the
/// angle follows the noise, `α(t) = α₀ + ω(t) − ω(0)` (mod 2π).
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomOdeFlow;

impl RandomOdeFlow {
    /// Radial component alone. Fails when `t` pushes the level below the
    /// minimum of `F` (backward time on either branch).
    pub fn radius(rho0: f64, t: f64) -> Result<f64> {
        if rho0 == 0.0 {
            return Ok(0.0);
        }
        if (rho0 - 1.0).abs() <= CIRCLE_SNAP {
            return Ok(1.0);
        }
        let branch = if rho0 < 1.0 { Branch::Lower } else { Branch::Upper };
        let ell = level_excess(rho0) + t;
        if ell < 0.0 {
            return Err(Error::OutsideDomain { time: t, rho: rho0 });
        }
        invert_excess(ell, branch)
    }
}

impl FlowMap for RandomOdeFlow {
    fn id(&self) -> &'static str {
        "random-ode"
    }

    fn angle_unit(&self) -> AngleUnit {
        AngleUnit::Radians
    }

    fn evaluate(&self, t: f64, path: &SamplePath, x: Point) -> Result<Point> {
        let w0 = path.value(0.0)?;
        let wt = path.value(t)?;
        if t == 0.0 {
            return Ok(x);
        }
        let rho = Self::radius(x.norm(), t)?;
        let alpha = reduce_radians(x.angle() + wt - w0);
        Ok(Point::from_polar(rho, alpha))
    }
}
