use super::{AngleUnit, FlowMap};
use crate::error::{Error, Result};
use crate::geometry::{reduce_turns, Point};
use crate::paths::SamplePath;

/// Stratonovich limit-cycle SDE solved in closed form:
/// `ρ(t) = ρ₀ e^{t+ω(t)} / (1 + 2ρ₀² ∫₀ᵗ e^{2s+2ω(s)} ds)^{1/2}`, and the angle
/// (in turns) advances at rate `1/T(ω)`, `T` read from the path's period tag.
#[derive(Debug, Clone, Copy, Default)]
pub struct SdeLimitCycleFlow;

impl SdeLimitCycleFlow {
    pub fn radius(rho0: f64, t: f64, path: &SamplePath) -> Result<f64> {
        let wt = path.value(t)?;
        let weight = path.exp_integral(0.0, t)?;
        if rho0 == 0.0 {
            return Ok(0.0);
        }
        let den = 1.0 + 2.0 * rho0 * rho0 * weight;
        if !(den > 0.0) {
            return Err(Error::OutsideDomain { time: t, rho: rho0 });
        }
        Ok(rho0 * (t + wt).exp() / den.sqrt())
    }
}

impl FlowMap for SdeLimitCycleFlow {
    fn id(&self) -> &'static str {
        "sde-limit-cycle"
    }

    fn angle_unit(&self) -> AngleUnit {
        AngleUnit::Turns
    }

    fn evaluate(&self, t: f64, path: &SamplePath, x: Point) -> Result<Point> {
        let period = path.period_tag().ok_or(Error::MissingPeriod)?;
        let rho = Self::radius(x.norm(), t, path)?;
        if t == 0.0 {
            return Ok(x);
        }
        let alpha = reduce_turns(x.turns() + t / period);
        Ok(Point::from_turns(rho, alpha))
    }
}

/// Lower limit of the improper integral defining `ρ*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// A fixed time `< 0` in the path's own coordinates.
    At(f64),
    /// The start of the stored window. Every path on one shift orbit then
    /// integrates from the same absolute knot, so the stationarity identity
    /// holds up to rounding.
    WindowStart,
}

impl Truncation {
    pub const DEFAULT_FIXED: f64 = -20.0;

    fn resolve(self, path: &SamplePath) -> Result<f64> {
        let lo = match self {
            Truncation::At(lo) => lo,
            Truncation::WindowStart => path.window_lo(),
        };
        if !(lo < 0.0) {
            return Err(Error::invalid(format!("truncation time must be negative, got {lo}")));
        }
        Ok(lo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryRadius {
    pub rho_star: f64,
    pub trunc_lo: f64,
    /// `e^{2 trunc_lo + 2 max|ω|}`, max over the knots left of 0: a rough
    /// scale for the neglected tail of the integral.
    pub truncation_bound: f64,
}

/// `ρ*(ω) = (2 ∫_{trunc}^0 e^{2s+2ω(s)} ds)^{-1/2}` with the same quadrature as the flow.
pub fn stationary_radius_value(path: &SamplePath, trunc: Truncation) -> Result<f64> {
    let lo = trunc.resolve(path)?;
    let weight = path.exp_integral(lo, 0.0)?;
    Ok((2.0 * weight).sqrt().recip())
}

pub fn stationary_radius(path: &SamplePath, trunc: Truncation) -> Result<StationaryRadius> {
    let rho_star = stationary_radius_value(path, trunc)?;
    let trunc_lo = trunc.resolve(path)?;
    let max_abs = path.max_abs_on(path.window_lo(), 0.0);
    Ok(StationaryRadius { rho_star, trunc_lo, truncation_bound: (2.0 * trunc_lo + 2.0 * max_abs).exp() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{sample_two_sided_bm, sample_zero_path};

    fn zero() -> SamplePath {
        sample_zero_path(-25.0, 5.0, 1e-3, Some(2.0)).unwrap()
    }

    #[test]
    fn zero_noise_unit_radius_is_fixed() {
        let p = zero();
        for t in [-3.0, -1.0, 0.5, 2.0, 4.5] {
            let r = SdeLimitCycleFlow::radius(1.0, t, &p).unwrap();
            assert!((r - 1.0).abs() < 1e-13, "{t}: {r}");
        }
    }

    #[test]
    fn zero_noise_radius_matches_arithmetic_oracle() {
        // ρ(1) = 2e / (1 + 8 (e²-1)/2)^{1/2}; mpmath: 1.05497292194519551560
        let r = SdeLimitCycleFlow::radius(2.0, 1.0, &zero()).unwrap();
        let e = 1f64.exp();
        let oracle = 2.0 * e / (1.0 + 8.0 * (e * e - 1.0) / 2.0).sqrt();
        assert!((r - oracle).abs() < 1e-13);
        assert!((r - 1.054_972_921_945_195_5).abs() < 1e-13);
    }

    #[test]
    fn radial_attraction_is_monotone() {
        let p = zero();
        for rho0 in [0.2, 0.5, 2.0, 5.0] {
            let mut last = (rho0 - 1.0f64).abs();
            for k in 1..=40 {
                let gap = (SdeLimitCycleFlow::radius(rho0, k as f64 * 0.1, &p).unwrap() - 1.0).abs();
                assert!(gap <= last, "{rho0}");
                last = gap;
            }
        }
    }

    #[test]
    fn identity_and_missing_period() {
        let p = sample_two_sided_bm(3, -2.0, 2.0, 1e-3).unwrap();
        let x = Point::new(0.6, -0.1);
        assert_eq!(SdeLimitCycleFlow.evaluate(0.5, &p, x), Err(Error::MissingPeriod));
        let p = p.with_period_tag(Some(1.0)).unwrap();
        assert_eq!(SdeLimitCycleFlow.evaluate(0.0, &p, x).unwrap(), x);
        assert!(matches!(SdeLimitCycleFlow.evaluate(2.5, &p, x), Err(Error::WindowExhausted { .. })));
    }

    #[test]
    fn backward_blow_up_is_reported() {
        let p = zero();
        assert!(matches!(SdeLimitCycleFlow.evaluate(-2.0, &p, Point::new(3.0, 0.0)), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn angle_advances_at_rate_one_over_period() {
        let p = zero();
        let y = SdeLimitCycleFlow.evaluate(0.5, &p, Point::from_turns(1.0, 0.1)).unwrap();
        assert!((y.turns() - 0.35).abs() < 1e-14);
    }

    #[test]
    fn stationary_radius_zero_noise() {
        let p = sample_zero_path(-30.0, 1.0, 1e-3, None).unwrap();
        let r = stationary_radius(&p, Truncation::At(-20.0)).unwrap();
        assert!((r.rho_star - 1.0).abs() < 1e-8);
        assert!(r.truncation_bound <= (-40.0f64).exp() * 1.0000001);
        assert!(matches!(stationary_radius(&p, Truncation::At(0.0)), Err(Error::InvalidArgument(_))));
        assert!(matches!(stationary_radius(&p, Truncation::At(-31.0)), Err(Error::WindowExhausted { .. })));
        assert!(stationary_radius(&p, Truncation::At(-30.0)).is_ok());
    }

    #[test]
    fn stationary_radius_is_positive_and_stationary() {
        for seed in 0..5 {
            let p = sample_two_sided_bm(seed, -30.0, 3.0, 1e-3).unwrap();
            let rho = stationary_radius_value(&p, Truncation::WindowStart).unwrap();
            assert!(rho > 0.0 && rho.is_finite());
            for t in [0.5, 1.0, 2.0] {
                let lhs = SdeLimitCycleFlow::radius(rho, t, &p).unwrap();
                let rhs = stationary_radius_value(&p.shift(t).unwrap(), Truncation::WindowStart).unwrap();
                assert!((lhs - rhs).abs() <= 1e-8 * rhs, "{seed} {t}: {lhs} {rhs}");
            }
        }
    }
}
