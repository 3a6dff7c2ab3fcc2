//! Weak random periodic solutions `(ψ, T)`:
//! `Ψ(t, ω)ψ(s, ω) = ψ(t+s, θ_t ω)` and `ψ(s + T(θ_{-s} ω), ω) = ψ(s, ω)`.

mod period;
pub mod systems;

pub use period::estimate_period;

use crate::error::{Error, Result};
use crate::flows::FlowMap;
use crate::geometry::Point;
use crate::paths::SamplePath;
use crate::rng::{sub, StreamKey};
use rand::Rng;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

/// `ω ↦ ψ₀(ω)`.
pub type Section = Arc<dyn Fn(&SamplePath) -> Result<Point> + Send + Sync>;
/// `ω ↦ T(ω)`.
pub type PeriodFn = Arc<dyn Fn(&SamplePath) -> Result<f64> + Send + Sync>;
/// `(s, ω) ↦ ψ(s, ω)`.
pub type Trajectory = Arc<dyn Fn(f64, &SamplePath) -> Result<Point> + Send + Sync>;

/// The period carried by the path itself.
pub fn tagged_period() -> PeriodFn {
    Arc::new(|path: &SamplePath| path.period_tag().ok_or(Error::MissingPeriod))
}

/// The tagged period multiplied by `factor`.
pub fn scaled_period(factor: f64) -> PeriodFn {
    Arc::new(move |path: &SamplePath| Ok(factor * path.period_tag().ok_or(Error::MissingPeriod)?))
}

pub fn constant_period(tau: f64) -> PeriodFn {
    Arc::new(move |_: &SamplePath| Ok(tau))
}

/// A candidate weak random periodic solution.
#[derive(Clone)]
pub struct Wrps {
    psi: Trajectory,
    period_of: PeriodFn,
    label: String,
}

impl Wrps {
    pub fn new(label: impl Into<String>, psi: Trajectory, period_of: PeriodFn) -> Self {
        Self { psi, period_of, label: label.into() }
    }

    pub fn psi(&self, s: f64, path: &SamplePath) -> Result<Point> {
        (self.psi)(s, path)
    }

    pub fn psi0(&self, path: &SamplePath) -> Result<Point> {
        (self.psi)(0.0, path)
    }

    pub fn period_of(&self, path: &SamplePath) -> Result<f64> {
        (self.period_of)(path)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Same trajectory, different period functional.
    pub fn with_period(&self, period_of: PeriodFn) -> Self {
        Self { period_of, ..self.clone() }
    }
}

impl fmt::Debug for Wrps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Wrps").field("label", &self.label).finish_non_exhaustive()
    }
}

/// Residual of the existence criterion,
/// `‖ψ₀(ω) − Ψ(Tω, θ_{−Tω} ω) ψ₀(θ_{−Tω} ω)‖`.
pub fn check_criterion(flow: &dyn FlowMap, psi0: &Section, period_of: &PeriodFn, path: &SamplePath) -> Result<f64> {
    let period = period_of(path)?;
    let back = path.shift(-period)?;
    let start = psi0(&back)?;
    let returned = flow.evaluate(period, &back, start)?;
    Ok(psi0(path)?.dist(&returned))
}

/// Extend a section satisfying the criterion to the full solution
/// `ψ(t, ω) = Ψ(t, θ_{−t} ω) ψ₀(θ_{−t} ω)`.
pub fn extend(label: impl Into<String>, psi0: Section, period_of: PeriodFn, flow: Arc<dyn FlowMap>) -> Wrps {
    let psi: Trajectory = Arc::new(move |t: f64, path: &SamplePath| {
        if t == 0.0 {
            return psi0(path);
        }
        let back = path.shift(-t)?;
        let start = psi0(&back)?;
        flow.evaluate(t, &back, start)
    });
    Wrps::new(label, psi, period_of)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualKind {
    Equivariance,
    Periodicity,
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub kind: ResidualKind,
    pub s: f64,
    pub t: f64,
    pub lhs: Point,
    pub rhs: Point,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WrpsReport {
    pub system: String,
    pub seed: u64,
    pub samples: usize,
    pub max_equivariance_residual: f64,
    pub max_periodicity_residual: f64,
    /// Arg-max witnesses, one per residual kind.
    pub witnesses: Vec<Witness>,
    /// Samples dropped because the window (or the flow's domain) ran out.
    pub skipped: usize,
}

impl WrpsReport {
    pub fn max_residual(&self) -> f64 {
        self.max_equivariance_residual.max(self.max_periodicity_residual)
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.skipped < self.samples && self.max_residual() <= tolerance
    }
}

fn tolerable(e: &Error) -> bool {
    matches!(e, Error::WindowExhausted { .. } | Error::OutsideDomain { .. })
}

fn keep_max(slot: &mut Option<Witness>, w: Witness) {
    if slot.as_ref().is_none_or(|old| w.residual > old.residual) {
        *slot = Some(w);
    }
}

/// Equivariance residual `‖Ψ(t, ω)ψ(s, ω) − ψ(t+s, θ_t ω)‖`.
pub fn equivariance_residual(w: &Wrps, flow: &dyn FlowMap, path: &SamplePath, s: f64, t: f64) -> Result<Witness> {
    let lhs = flow.evaluate(t, path, w.psi(s, path)?)?;
    let rhs = w.psi(t + s, &path.shift(t)?)?;
    Ok(Witness { kind: ResidualKind::Equivariance, s, t, lhs, rhs, residual: lhs.dist(&rhs) })
}

/// Periodicity residual `‖ψ(s + T(θ_{−s} ω), ω) − ψ(s, ω)‖`.
pub fn periodicity_residual(w: &Wrps, path: &SamplePath, s: f64) -> Result<Witness> {
    let period = w.period_of(&path.shift(-s)?)?;
    let lhs = w.psi(s + period, path)?;
    let rhs = w.psi(s, path)?;
    Ok(Witness { kind: ResidualKind::Periodicity, s, t: period, lhs, rhs, residual: lhs.dist(&rhs) })
}

/// Check both identities at `samples` seeded draws of `(s, t)` from
/// `[−horizon, horizon]²`.
pub fn verify_wrps(
    w: &Wrps,
    flow: &dyn FlowMap,
    path: &SamplePath,
    samples: usize,
    horizon: f64,
    seed: u64,
) -> Result<WrpsReport> {
    if !(horizon > 0.0) {
        return Err(Error::invalid(format!("horizon must be positive, got {horizon}")));
    }
    let mut rng = StreamKey::new(seed, 0).rng(sub::SAMPLES);
    let mut eq: Option<Witness> = None;
    let mut per: Option<Witness> = None;
    let mut skipped = 0;
    for _ in 0..samples {
        let s = rng.random_range(-horizon..=horizon);
        let t = rng.random_range(-horizon..=horizon);
        let mut lost = false;
        match equivariance_residual(w, flow, path, s, t) {
            Ok(wit) => keep_max(&mut eq, wit),
            Err(e) if tolerable(&e) => lost = true,
            Err(e) => return Err(e),
        }
        match periodicity_residual(w, path, s) {
            Ok(wit) => keep_max(&mut per, wit),
            Err(e) if tolerable(&e) => lost = true,
            Err(e) => return Err(e),
        }
        if lost {
            skipped += 1;
        }
    }
    let max_eq = eq.as_ref().map_or(0.0, |w| w.residual);
    let max_per = per.as_ref().map_or(0.0, |w| w.residual);
    Ok(WrpsReport {
        system: w.label().to_string(),
        seed,
        samples,
        max_equivariance_residual: max_eq,
        max_periodicity_residual: max_per,
        witnesses: eq.into_iter().chain(per).collect(),
        skipped,
    })
}

/// A random periodic path `Y` with deterministic period `τ`:
/// `Ψ(t, θ_s ω)Y(s, ω) = Y(t+s, ω)` and `Y(s+τ, ω) = Y(s, θ_τ ω)`.
#[derive(Clone)]
pub struct RandomPeriodicPath {
    pub y: Trajectory,
    pub tau: f64,
}

impl RandomPeriodicPath {
    pub fn new(y: Trajectory, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::invalid(format!("period must be positive, got {tau}")));
        }
        Ok(Self { y, tau })
    }

    /// The path built from a solution `ψ` with constant period: `Y(s, ω) = ψ(s, θ_s ω)`.
    pub fn from_wrps(w: &Wrps, tau: f64) -> Result<Self> {
        let w = w.clone();
        Self::new(Arc::new(move |s: f64, path: &SamplePath| w.psi(s, &path.shift(s)?)), tau)
    }

    /// Maximal residuals of its two defining identities over seeded `(s, t)`.
    pub fn residuals(
        &self,
        flow: &dyn FlowMap,
        path: &SamplePath,
        samples: usize,
        horizon: f64,
        seed: u64,
    ) -> Result<(f64, f64)> {
        let mut rng = StreamKey::new(seed, 1).rng(sub::SAMPLES);
        let (mut flow_max, mut period_max) = (0.0f64, 0.0f64);
        for _ in 0..samples {
            let s = rng.random_range(-horizon..=horizon);
            let t = rng.random_range(-horizon..=horizon);
            let lhs = flow.evaluate(t, &path.shift(s)?, (self.y)(s, path)?)?;
            flow_max = flow_max.max(lhs.dist(&(self.y)(t + s, path)?));
            let shifted = (self.y)(s, &path.shift(self.tau)?)?;
            period_max = period_max.max((self.y)(s + self.tau, path)?.dist(&shifted));
        }
        Ok((flow_max, period_max))
    }
}

/// `ψ₀(ω) = Y(0, ω)` and `T ≡ τ`.
pub fn adapt_random_periodic_path(rpp: &RandomPeriodicPath) -> (Section, PeriodFn) {
    let y = Arc::clone(&rpp.y);
    let psi0: Section = Arc::new(move |path: &SamplePath| y(0.0, path));
    (psi0, constant_period(rpp.tau))
}

#[cfg(test)]
mod tests {
    use super::systems::*;
    use super::*;
    use crate::flows::{RandomOdeFlow, SdeLimitCycleFlow};
    use crate::paths::{sample_periodic, sample_two_sided_bm, sample_zero_path, PeriodicPathEnsemble};

    fn bm(seed: u64, period: f64) -> SamplePath {
        sample_two_sided_bm(seed, -30.0, 12.0, 1e-3).unwrap().with_period_tag(Some(period)).unwrap()
    }

    #[test]
    fn extension_at_zero_is_the_section() {
        let p = bm(1, 1.3);
        let psi0 = sde_section(0.2);
        let w = extend("x", psi0.clone(), tagged_period(), Arc::new(SdeLimitCycleFlow));
        assert_eq!(w.psi(0.0, &p).unwrap(), psi0(&p).unwrap());
        // t = 0 equivariance is exact
        let wit = equivariance_residual(&w, &SdeLimitCycleFlow, &p, 0.83, 0.0).unwrap();
        assert_eq!(wit.residual, 0.0);
    }

    #[test]
    fn period_is_orbit_constant() {
        let p = bm(2, 1.7);
        let w = sde_wrps(0.0);
        for s in [-3.0, -0.1, 0.0, 2.2, 7.5] {
            assert_eq!(w.period_of(&p.shift(s).unwrap()).unwrap(), w.period_of(&p).unwrap());
        }
    }

    #[test]
    fn fixed_point_criterion_is_exact() {
        // zero noise, unit circle point: Ψ(T)ψ₀ lands back exactly up to rounding
        let p = sample_zero_path(-10.0, 10.0, 1e-2, Some(1.0)).unwrap();
        let psi0: Section = Arc::new(|_: &SamplePath| Ok(Point::new(1.0, 0.0)));
        let r = check_criterion(&SdeLimitCycleFlow, &psi0, &tagged_period(), &p).unwrap();
        assert!(r <= 1e-12, "{r}");
        let r = check_criterion(&RandomOdeFlow, &psi0, &tagged_period(), &p).unwrap();
        assert!(r <= 1e-12, "{r}");
    }

    #[test]
    fn criterion_holds_for_both_systems() {
        let p = bm(3, 1.4);
        let r = check_criterion(&SdeLimitCycleFlow, &sde_section(0.3), &tagged_period(), &p).unwrap();
        assert!(r <= 1e-6, "{r}");
        let q = sample_periodic(&PeriodicPathEnsemble::standard(), 3, (-12.0, 12.0), 1e-3).unwrap();
        let r = check_criterion(&RandomOdeFlow, &random_ode_section(1.1), &tagged_period(), &q).unwrap();
        assert!(r <= 1e-8, "{r}");
    }

    #[test]
    fn extension_reproduces_closed_form() {
        let p = bm(4, 1.9);
        let ext = sde_wrps(0.15);
        let closed = sde_closed_form_wrps(0.15, Corruption::NONE);
        for s in [-4.0, -1.2, 0.0, 0.4, 3.3] {
            let d = ext.psi(s, &p).unwrap().dist(&closed.psi(s, &p).unwrap());
            assert!(d <= 1e-6, "{s}: {d}");
        }
    }

    #[test]
    fn verification_passes_and_corruption_fails() {
        let p = bm(5, 1.2);
        let rep = verify_wrps(&sde_wrps(0.0), &SdeLimitCycleFlow, &p, 50, 3.0, 9).unwrap();
        assert!(rep.passes(1e-6), "{rep:?}");
        assert_eq!(rep.witnesses.len(), 2);

        let bad = sde_closed_form_wrps(0.0, Corruption { period_scale: 1.1, ..Corruption::NONE });
        let rep = verify_wrps(&bad, &SdeLimitCycleFlow, &p, 50, 3.0, 9).unwrap();
        let rho = p.period_tag().map(|_| sde_section(0.0)(&p).unwrap().norm()).unwrap();
        // |e^{2πi/1.1} − 1| ρ* = 2 sin(π · 0.1/1.1) ρ*
        let expected = 2.0 * (std::f64::consts::PI * 0.1 / 1.1).sin();
        assert!(rep.max_periodicity_residual > 0.1, "{rep:?}");
        assert!(rep.max_periodicity_residual > 0.5 * expected * rho);
    }

    #[test]
    fn random_periodic_path_adapter() {
        let p = bm(6, 1.0);
        let tau = 1.25;
        let base = sde_wrps(0.4).with_period(constant_period(tau));
        // Y(s, ω) = ψ(s, θ_s ω) with T ≡ τ, which needs the paths tagged with τ.
        let p = p.with_period_tag(Some(tau)).unwrap();
        let rpp = RandomPeriodicPath::from_wrps(&base, tau).unwrap();
        let (flow_res, period_res) = rpp.residuals(&SdeLimitCycleFlow, &p, 20, 2.0, 1).unwrap();
        assert!(flow_res <= 1e-6 && period_res <= 1e-6, "{flow_res} {period_res}");

        let (psi0, period_of) = adapt_random_periodic_path(&rpp);
        assert_eq!(period_of(&p).unwrap(), tau);
        assert_eq!(period_of(&p.shift(3.0).unwrap()).unwrap(), tau);
        assert!(check_criterion(&SdeLimitCycleFlow, &psi0, &period_of, &p).unwrap() <= 1e-6);

        let ext = extend("adapted", psi0, period_of, Arc::new(SdeLimitCycleFlow));
        for s in [-1.5, 0.3, 1.9] {
            let y = (rpp.y)(s, &p.shift(-s).unwrap()).unwrap();
            assert!(ext.psi(s, &p).unwrap().dist(&y) <= 1e-6);
        }
        assert!(RandomPeriodicPath::new(rpp.y.clone(), 0.0).is_err());
    }

    #[test]
    fn window_exhaustion_is_not_fatal() {
        let p = sample_two_sided_bm(7, -6.0, 3.0, 1e-3).unwrap().with_period_tag(Some(1.0)).unwrap();
        let rep = verify_wrps(&sde_wrps(0.0), &SdeLimitCycleFlow, &p, 30, 5.0, 2).unwrap();
        assert!(rep.skipped > 0);
        assert!(verify_wrps(&sde_wrps(0.0), &SdeLimitCycleFlow, &p, 3, 0.0, 2).is_err());
    }
}
