//! Cocycle flow maps `Ψ(t, ω)x` on the plane and the skew product
//! `Υ_t(ω, x) = (θ_t ω, Ψ(t, ω)x)`.

pub mod radial;
mod random_ode;
mod sde;

pub use radial::{invert_f, invert_f_log, log_f, Branch};
pub use random_ode::{RandomOdeFlow, CIRCLE_SNAP};
pub use sde::{stationary_radius, stationary_radius_value, SdeLimitCycleFlow, StationaryRadius, Truncation};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::paths::{PathSampler, SamplePath};
use crate::rng::{sub, StreamKey};
use rand::Rng;
use serde::Serialize;
use std::f64::consts::TAU;
use std::sync::Arc;

/// Unit of the polar angle used by a flow's fundamental domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AngleUnit {
    /// `[0, 2π)`
    Radians,
    /// `[0, 1)`
    Turns,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarPoint {
    pub alpha: f64,
    pub rho: f64,
}

/// A random dynamical system on `R²` over the shift flow of sample paths.
pub trait FlowMap: Send + Sync {
    /// Identifier used on the command line.
    fn id(&self) -> &'static str;

    /// `Ψ(t, ω)x`.
    fn evaluate(&self, t: f64, path: &SamplePath, x: Point) -> Result<Point>;

    fn angle_unit(&self) -> AngleUnit;

    fn to_polar(&self, x: Point) -> PolarPoint {
        match self.angle_unit() {
            AngleUnit::Radians => PolarPoint { alpha: x.angle(), rho: x.norm() },
            AngleUnit::Turns => PolarPoint { alpha: x.turns(), rho: x.norm() },
        }
    }

    fn point_from_polar(&self, p: PolarPoint) -> Point {
        match self.angle_unit() {
            AngleUnit::Radians => Point::from_polar(p.rho, p.alpha),
            AngleUnit::Turns => Point::from_polar(p.rho, TAU * p.alpha),
        }
    }
}

pub fn flow_by_id(id: &str) -> Result<Arc<dyn FlowMap>> {
    match id {
        "random-ode" => Ok(Arc::new(RandomOdeFlow)),
        "sde-limit-cycle" => Ok(Arc::new(SdeLimitCycleFlow)),
        other => Err(Error::invalid(format!("unknown system {other:?}"))),
    }
}

/// `Υ_t(ω, x) = (θ_t ω, Ψ(t, ω)x)`.
pub fn skew_product(flow: &dyn FlowMap, t: f64, path: &SamplePath, x: Point) -> Result<(SamplePath, Point)> {
    let moved = flow.evaluate(t, path, x)?;
    Ok((path.shift(t)?, moved))
}

/// `‖Ψ(t+s, ω)x − Ψ(t, θ_s ω)Ψ(s, ω)x‖`.
pub fn check_cocycle(flow: &dyn FlowMap, path: &SamplePath, s: f64, t: f64, x: Point) -> Result<f64> {
    let direct = flow.evaluate(t + s, path, x)?;
    let first = flow.evaluate(s, path, x)?;
    let composed = flow.evaluate(t, &path.shift(s)?, first)?;
    Ok(direct.dist(&composed))
}

#[derive(Debug, Clone, Serialize)]
pub struct CocycleWitness {
    pub path_index: u64,
    pub s: f64,
    pub t: f64,
    pub x: Point,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CocycleReport {
    pub flow: &'static str,
    pub samples: usize,
    /// Draws discarded because the flow is undefined there or the window ran out.
    pub rejected: usize,
    pub max_residual: f64,
    pub witness: Option<CocycleWitness>,
}

/// Cocycle residuals at `samples` random `(s, t, ω, x)` with `|s|, |t| ≤ horizon`
/// and `|x| < max_radius`; the path index cycles over `paths`.
pub fn cocycle_residuals(
    flow: &dyn FlowMap,
    sampler: &dyn PathSampler,
    paths: u64,
    samples: usize,
    horizon: f64,
    max_radius: f64,
    seed: u64,
) -> Result<CocycleReport> {
    let mut rng = StreamKey::new(seed, u64::MAX).rng(sub::SAMPLES);
    let cache: Vec<SamplePath> = (0..paths.max(1)).map(|i| sampler.sample(i)).collect::<Result<_>>()?;
    let mut report = CocycleReport { flow: flow.id(), samples: 0, rejected: 0, max_residual: 0.0, witness: None };
    let max_attempts = 50 * samples.max(1);
    let mut attempts = 0;
    while report.samples < samples {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::invalid(format!(
                "only {} of {samples} cocycle samples fell inside the flow's domain",
                report.samples
            )));
        }
        let index = rng.random_range(0..cache.len() as u64);
        let s = rng.random_range(-horizon..=horizon);
        let t = rng.random_range(-horizon..=horizon);
        let x = Point::from_polar(max_radius * rng.random::<f64>(), TAU * rng.random::<f64>());
        match check_cocycle(flow, &cache[index as usize], s, t, x) {
            Ok(r) => {
                report.samples += 1;
                if report.witness.is_none() || r > report.max_residual {
                    report.max_residual = r;
                    report.witness = Some(CocycleWitness { path_index: index, s, t, x, residual: r });
                }
            }
            Err(Error::OutsideDomain { .. }) | Err(Error::WindowExhausted { .. }) => report.rejected += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{sample_two_sided_bm, sample_zero_path};

    #[test]
    fn flow_ids() {
        assert_eq!(flow_by_id("random-ode").unwrap().id(), "random-ode");
        assert_eq!(flow_by_id("sde-limit-cycle").unwrap().id(), "sde-limit-cycle");
        assert!(flow_by_id("lorenz").is_err());
    }

    #[test]
    fn skew_product_at_zero_is_identity() {
        let p = sample_two_sided_bm(1, -3.0, 3.0, 1e-2).unwrap().with_period_tag(Some(2.0)).unwrap();
        let x = Point::new(0.3, -0.4);
        let (q, y) = skew_product(&SdeLimitCycleFlow, 0.0, &p, x).unwrap();
        assert_eq!(y, x);
        assert_eq!(q.values(), p.values());
    }

    #[test]
    fn skew_product_composes() {
        let p = sample_two_sided_bm(2, -6.0, 6.0, 1e-3).unwrap().with_period_tag(Some(1.3)).unwrap();
        let x = Point::new(0.5, 0.2);
        for flow in [&SdeLimitCycleFlow as &dyn FlowMap, &RandomOdeFlow] {
            let (q1, y1) = skew_product(flow, 0.7, &p, x).unwrap();
            let (q2, y2) = skew_product(flow, 0.4, &q1, y1).unwrap();
            let (q, y) = skew_product(flow, 1.1, &p, x).unwrap();
            assert!(y.dist(&y2) <= 1e-8, "{}", flow.id());
            assert!((q.origin_offset() - q2.origin_offset()).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_noise_unit_circle_is_invariant_under_skew_product() {
        let p = sample_zero_path(-5.0, 5.0, 1e-2, Some(3.0)).unwrap();
        for k in 0..12 {
            let x = Point::from_turns(1.0, k as f64 / 12.0);
            let (_, y) = skew_product(&SdeLimitCycleFlow, 2.3, &p, x).unwrap();
            assert!((y.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn cocycle_report_on_zero_noise() {
        let sampler = crate::paths::ZeroSampler {
            seed: 0,
            window_lo: -10.0,
            window_hi: 10.0,
            dt: 1e-2,
            period: crate::paths::PeriodPolicy::Constant(2.0),
        };
        let rep = cocycle_residuals(&SdeLimitCycleFlow, &sampler, 1, 50, 2.0, 1.5, 3).unwrap();
        assert_eq!(rep.samples, 50);
        assert!(rep.max_residual < 1e-10, "{rep:?}");
    }
}
