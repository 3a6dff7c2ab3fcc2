//! Measures induced by a weak random periodic solution: the fiber point
//! masses `μ(s, ω) = δ_{ψ(s, ω)}`, their averages over a period, and the
//! invariant measure obtained by additionally averaging over paths.

mod distance;

pub use distance::{bootstrap_noise_floor, energy_distance, NoiseFloor};

use crate::error::{Error, Result};
use crate::flows::FlowMap;
use crate::geometry::Point;
use crate::paths::{PathSampler, SamplePath};
use crate::rng::{sub, StreamKey};
use crate::wrps::Wrps;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Total weight must equal 1 up to this.
pub const WEIGHT_TOLERANCE: f64 = 1e-10;

/// The point mass `μ(s, ω)` on the fiber over `ω`.
#[derive(Debug, Clone)]
pub struct FiberMeasure {
    pub base_path: SamplePath,
    pub atom: Point,
}

impl FiberMeasure {
    pub fn weight(&self) -> f64 {
        1.0
    }

    /// `Υ_t μ(s, ω)`: the atom moves by `Ψ(t, ω)`, the fiber by `θ_t`.
    pub fn push(&self, flow: &dyn FlowMap, t: f64) -> Result<FiberMeasure> {
        let atom = flow.evaluate(t, &self.base_path, self.atom)?;
        Ok(FiberMeasure { base_path: self.base_path.shift(t)?, atom })
    }
}

pub fn fiber_measure(w: &Wrps, s: f64, path: &SamplePath) -> Result<FiberMeasure> {
    Ok(FiberMeasure { base_path: path.clone(), atom: w.psi(s, path)? })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: Point,
    pub weight: f64,
    /// Index into the measure's fiber paths, if the atom sits on a fiber.
    pub fiber: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureMeta {
    pub seed: u64,
    pub n_paths: usize,
    pub n_time: usize,
    pub system: String,
}

/// A finitely supported probability measure on the plane whose atoms may be
/// labeled by the noise path they were generated on.
#[derive(Debug, Clone)]
pub struct EmpiricalMeasure {
    atoms: Vec<Atom>,
    fibers: Vec<SamplePath>,
    meta: Option<MeasureMeta>,
}

impl EmpiricalMeasure {
    pub fn new(atoms: Vec<Atom>, fibers: Vec<SamplePath>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Empty("measure"));
        }
        if let Some(a) = atoms.iter().find(|a| !(a.weight > 0.0 && a.weight.is_finite())) {
            return Err(Error::invalid(format!("atom weights must be positive, got {}", a.weight)));
        }
        if let Some(i) = atoms.iter().filter_map(|a| a.fiber).find(|&i| !fibers.is_empty() && i >= fibers.len()) {
            return Err(Error::invalid(format!("fiber label {i} out of range")));
        }
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::invalid(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { atoms, fibers, meta: None })
    }

    /// Equal weights on unlabeled points.
    pub fn uniform(points: &[Point]) -> Result<Self> {
        let w = 1.0 / points.len() as f64;
        Self::new(points.iter().map(|&point| Atom { point, weight: w, fiber: None }).collect(), vec![])
    }

    pub fn with_meta(mut self, meta: MeasureMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn fibers(&self) -> &[SamplePath] {
        &self.fibers
    }

    pub fn meta(&self) -> Option<&MeasureMeta> {
        self.meta.as_ref()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// Atoms generated on fiber `i`.
    pub fn fiber_atoms(&self, i: usize) -> impl Iterator<Item = &Atom> {
        self.atoms.iter().filter(move |a| a.fiber == Some(i))
    }

    /// Largest `| ‖x‖ − r(ω) |` over atoms, `ω` the atom's fiber.
    pub fn max_support_deviation(&self, radius: impl Fn(&SamplePath) -> Result<f64>) -> Result<f64> {
        let radii = self.fibers.iter().map(&radius).collect::<Result<Vec<_>>>()?;
        let mut worst = 0.0f64;
        for a in &self.atoms {
            let i = a.fiber.ok_or_else(|| Error::invalid("atom carries no fiber label"))?;
            let r = radii.get(i).ok_or_else(|| Error::invalid("measure carries no fiber paths"))?;
            worst = worst.max((a.point.norm() - r).abs());
        }
        Ok(worst)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = MeasureDoc {
            atoms: self
                .atoms
                .iter()
                .map(|a| AtomDoc { x: a.point.x, y: a.point.y, weight: a.weight, fiber_id: a.fiber })
                .collect(),
            meta: self.meta.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Fiber paths are not serialized; labels survive.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MeasureDoc = serde_json::from_str(text)?;
        let atoms = doc
            .atoms
            .into_iter()
            .map(|a| Atom { point: Point::new(a.x, a.y), weight: a.weight, fiber: a.fiber_id })
            .collect();
        let mut m = Self::new(atoms, vec![])?;
        m.meta = doc.meta;
        Ok(m)
    }

    /// State-space marginal for plotting: `x,y,rho,weight,fiber_id`.
    pub fn marginal_csv(&self) -> String {
        let mut out = String::from("x,y,rho,weight,fiber_id\n");
        for a in &self.atoms {
            let fiber = a.fiber.map(|i| i.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{fiber}",
                a.point.x,
                a.point.y,
                a.point.norm(),
                a.weight
            );
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct AtomDoc {
    x: f64,
    y: f64,
    weight: f64,
    fiber_id: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct MeasureDoc {
    atoms: Vec<AtomDoc>,
    #[serde(default)]
    meta: Option<MeasureMeta>,
}

/// `ψ(s_j, ω)` at the midpoints `s_j = (j + ½) T(ω) / n_time` of
/// `n_periods · n_time` cells covering `[0, n_periods · T(ω))`.
pub fn fiber_orbit(w: &Wrps, path: &SamplePath, n_periods: usize, n_time: usize) -> Result<Vec<Point>> {
    if n_periods == 0 || n_time == 0 {
        return Err(Error::invalid("need at least one period and one time cell"));
    }
    let period = w.period_of(path)?;
    let h = period / n_time as f64;
    (0..n_periods * n_time).map(|j| w.psi((j as f64 + 0.5) * h, path)).collect()
}

/// The period average `(1/NT) ∫₀^{NT} μ(s, ω) ds` on a single fiber, by the midpoint rule.
pub fn time_average_measure(w: &Wrps, path: &SamplePath, n_periods: usize, n_time: usize) -> Result<EmpiricalMeasure> {
    let points = fiber_orbit(w, path, n_periods, n_time)?;
    let weight = 1.0 / points.len() as f64;
    let atoms = points.into_iter().map(|point| Atom { point, weight, fiber: Some(0) }).collect();
    EmpiricalMeasure::new(atoms, vec![path.clone()])
}

/// Monte-Carlo estimate of `μ(A) = ∫ (1/Tω) ∫₀^{Tω} μ(s, ω)(A) ds P(dω)` from
/// paths `0..n_paths` of `sampler`. Fibers are built in parallel; the result
/// does not depend on the worker count.
pub fn invariant_measure_estimate(
    w: &Wrps,
    sampler: &dyn PathSampler,
    n_paths: usize,
    n_time: usize,
) -> Result<EmpiricalMeasure> {
    if n_paths == 0 {
        return Err(Error::invalid("n_paths must be at least 1"));
    }
    if n_time < 2 {
        return Err(Error::invalid("n_time must be at least 2"));
    }
    let fibers: Vec<(SamplePath, Vec<Point>)> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let path = sampler.sample(i)?;
            let orbit = fiber_orbit(w, &path, 1, n_time)?;
            Ok((path, orbit))
        })
        .collect::<Result<_>>()?;
    let weight = 1.0 / (n_paths * n_time) as f64;
    let mut atoms = Vec::with_capacity(n_paths * n_time);
    let mut paths = Vec::with_capacity(n_paths);
    for (i, (path, orbit)) in fibers.into_iter().enumerate() {
        atoms.extend(orbit.into_iter().map(|point| Atom { point, weight, fiber: Some(i) }));
        paths.push(path);
    }
    let meta = MeasureMeta { seed: sampler.seed(), n_paths, n_time, system: w.label().to_string() };
    Ok(EmpiricalMeasure::new(atoms, paths)?.with_meta(meta))
}

/// `Υ_t μ`: every atom `x` on fiber `ω` moves to `Ψ(t, ω)x` on fiber `θ_t ω`.
pub fn pushforward(flow: &dyn FlowMap, measure: &EmpiricalMeasure, t: f64) -> Result<EmpiricalMeasure> {
    if measure.fibers.is_empty() {
        return Err(Error::invalid("pushforward needs the fiber paths"));
    }
    let atoms = measure
        .atoms
        .par_iter()
        .map(|a| {
            let i = a.fiber.ok_or_else(|| Error::invalid("atom carries no fiber label"))?;
            let point = flow.evaluate(t, &measure.fibers[i], a.point)?;
            Ok(Atom { point, ..*a })
        })
        .collect::<Result<Vec<_>>>()?;
    let fibers = measure.fibers.iter().map(|p| p.shift(t)).collect::<Result<Vec<_>>>()?;
    Ok(EmpiricalMeasure { atoms, fibers, meta: measure.meta.clone() })
}

/// Result of checking `Υ_t μ(s, ω) = μ(t+s, θ_t ω)` and
/// `μ(s + T(θ_{−s} ω), ω) = μ(s, ω)` on sampled `(s, t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WrpmReport {
    pub system: String,
    pub seed: u64,
    pub samples: usize,
    pub max_equivariance_distance: f64,
    pub max_periodicity_distance: f64,
    pub skipped: usize,
}

impl WrpmReport {
    pub fn max_distance(&self) -> f64 {
        self.max_equivariance_distance.max(self.max_periodicity_distance)
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.skipped < self.samples && self.max_distance() <= tolerance
    }
}

/// Distance between the atoms of `Υ_t μ(s, ω)` and `μ(t+s, θ_t ω)`.
pub fn fiber_equivariance_distance(w: &Wrps, flow: &dyn FlowMap, path: &SamplePath, s: f64, t: f64) -> Result<f64> {
    let pushed = fiber_measure(w, s, path)?.push(flow, t)?;
    let target = fiber_measure(w, t + s, &pushed.base_path)?;
    Ok(pushed.atom.dist(&target.atom))
}

/// Distance between the atoms of `μ(s + T(θ_{−s} ω), ω)` and `μ(s, ω)`.
pub fn fiber_periodicity_distance(w: &Wrps, path: &SamplePath, s: f64) -> Result<f64> {
    let period = w.period_of(&path.shift(-s)?)?;
    Ok(fiber_measure(w, s + period, path)?.atom.dist(&fiber_measure(w, s, path)?.atom))
}

pub fn verify_wrpm(
    w: &Wrps,
    flow: &dyn FlowMap,
    path: &SamplePath,
    samples: usize,
    horizon: f64,
    seed: u64,
) -> Result<WrpmReport> {
    if !(horizon > 0.0) {
        return Err(Error::invalid(format!("horizon must be positive, got {horizon}")));
    }
    let mut rng = StreamKey::new(seed, 2).rng(sub::SAMPLES);
    let (mut eq, mut per, mut skipped) = (0.0f64, 0.0f64, 0);
    for _ in 0..samples {
        let s = rng.random_range(-horizon..=horizon);
        let t = rng.random_range(-horizon..=horizon);
        let pair = fiber_equivariance_distance(w, flow, path, s, t)
            .and_then(|e| Ok((e, fiber_periodicity_distance(w, path, s)?)));
        match pair {
            Ok((e, p)) => {
                eq = eq.max(e);
                per = per.max(p);
            }
            Err(Error::WindowExhausted { .. } | Error::OutsideDomain { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(WrpmReport {
        system: w.label().to_string(),
        seed,
        samples,
        max_equivariance_distance: eq,
        max_periodicity_distance: per,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::{stationary_radius_value, SdeLimitCycleFlow, Truncation};
    use crate::paths::{sample_two_sided_bm, BrownianSampler, PeriodPolicy, ZeroSampler};
    use crate::wrps::systems::{random_ode_wrps, sde_closed_form_wrps, sde_wrps, Corruption};

    fn zero_sampler(period: f64) -> ZeroSampler {
        ZeroSampler { seed: 0, window_lo: -20.0, window_hi: 5.0, dt: 1e-3, period: PeriodPolicy::Constant(period) }
    }

    fn bm(seed: u64) -> SamplePath {
        sample_two_sided_bm(seed, -20.0, 6.0, 1e-3).unwrap().with_period_tag(Some(1.3)).unwrap()
    }

    #[test]
    fn zero_noise_fiber_atom_at_origin_angle() {
        let p = zero_sampler(1.0).sample(0).unwrap();
        let m = fiber_measure(&sde_wrps(0.0), 0.0, &p).unwrap();
        assert!(m.atom.dist(&Point::new(1.0, 0.0)) < 1e-9);
        assert_eq!(m.weight(), 1.0);
    }

    #[test]
    fn fiber_atom_sits_on_stationary_circle_and_repeats() {
        let w = sde_wrps(0.2);
        let p = bm(5);
        let r = stationary_radius_value(&p, Truncation::WindowStart).unwrap();
        for s in [0.0, 0.4, 1.1, 2.0] {
            let a = fiber_measure(&w, s, &p).unwrap().atom;
            assert!((a.norm() - r).abs() < 1e-6 * r.max(1.0));
            let b = fiber_measure(&w, s + 1.3, &p).unwrap().atom;
            assert!(a.dist(&b) < 1e-6);
        }
    }

    #[test]
    fn zero_time_equivariance_is_exact() {
        let w = sde_wrps(0.0);
        let p = bm(2);
        for s in [-1.0, 0.3, 1.7] {
            assert_eq!(fiber_equivariance_distance(&w, &SdeLimitCycleFlow, &p, s, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn wrpm_holds_and_radius_corruption_is_caught() {
        let p = bm(9);
        let good = verify_wrpm(&sde_wrps(0.0), &SdeLimitCycleFlow, &p, 40, 2.0, 1).unwrap();
        assert!(good.passes(1e-6), "{good:?}");
        let bad = sde_closed_form_wrps(0.0, Corruption { radius_scale: 1.1, ..Corruption::NONE });
        let r = stationary_radius_value(&p, Truncation::WindowStart).unwrap();
        let rep = verify_wrpm(&bad, &SdeLimitCycleFlow, &p, 40, 2.0, 1).unwrap();
        assert!(rep.max_equivariance_distance > 0.05 * r, "{rep:?}");
    }

    #[test]
    fn midpoint_atoms_for_zero_noise() {
        let m = invariant_measure_estimate(&sde_wrps(0.0), &zero_sampler(1.0), 1, 4).unwrap();
        assert_eq!(m.len(), 4);
        for (a, want) in m.atoms().iter().zip([0.125, 0.375, 0.625, 0.875]) {
            assert!((a.point.norm() - 1.0).abs() < 1e-9);
            assert!((a.point.turns() - want).abs() < 1e-9, "{:?}", a.point);
            assert_eq!(a.weight, 0.25);
            assert_eq!(a.fiber, Some(0));
        }
    }

    #[test]
    fn estimate_is_supported_on_fiber_circles() {
        let s = BrownianSampler::new(3, -20.0, 3.0, 1e-3, PeriodPolicy::Uniform { lo: 1.0, hi: 2.0 }).unwrap();
        let m = invariant_measure_estimate(&sde_wrps(0.0), &s, 6, 8).unwrap();
        assert!((m.total_weight() - 1.0).abs() < WEIGHT_TOLERANCE);
        let dev = m.max_support_deviation(|p| stationary_radius_value(p, Truncation::WindowStart)).unwrap();
        assert!(dev < 1e-6, "{dev}");

        let pushed = pushforward(&SdeLimitCycleFlow, &m, 0.7).unwrap();
        let dev = pushed.max_support_deviation(|p| stationary_radius_value(p, Truncation::WindowStart)).unwrap();
        assert!(dev < 1e-6, "{dev}");
        assert!((pushed.total_weight() - 1.0).abs() < WEIGHT_TOLERANCE);
    }

    #[test]
    fn random_ode_estimate_lies_on_unit_circle() {
        let m = invariant_measure_estimate(&random_ode_wrps(0.5), &zero_sampler(2.0), 3, 16).unwrap();
        assert!(m.atoms().iter().all(|a| (a.point.norm() - 1.0).abs() < 1e-8));
    }

    #[test]
    fn pushforward_by_zero_is_identity() {
        let m = invariant_measure_estimate(&sde_wrps(0.1), &zero_sampler(1.5), 2, 5).unwrap();
        let p = pushforward(&SdeLimitCycleFlow, &m, 0.0).unwrap();
        assert_eq!(m.atoms(), p.atoms());
    }

    #[test]
    fn time_average_over_many_periods_matches_one() {
        let w = sde_wrps(0.0);
        let p = bm(4);
        let one = time_average_measure(&w, &p, 1, 16).unwrap();
        let eight = time_average_measure(&w, &p, 8, 16).unwrap();
        assert_eq!(eight.len(), 128);
        assert!(energy_distance(&one, &eight).unwrap() < 1e-3);
    }

    #[test]
    fn weights_must_sum_to_one() {
        let a = Atom { point: Point::ORIGIN, weight: 0.5, fiber: None };
        assert!(EmpiricalMeasure::new(vec![a], vec![]).is_err());
        assert!(EmpiricalMeasure::new(vec![a, a], vec![]).is_ok());
        assert!(matches!(EmpiricalMeasure::new(vec![], vec![]), Err(Error::Empty(_))));
        let neg = Atom { weight: -1.0, ..a };
        assert!(EmpiricalMeasure::new(vec![neg, a, a, a, a], vec![]).is_err());
    }

    #[test]
    fn json_round_trip_keeps_atoms_and_meta() {
        let m = invariant_measure_estimate(&sde_wrps(0.0), &zero_sampler(1.0), 2, 4).unwrap();
        let back = EmpiricalMeasure::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back.atoms(), m.atoms());
        assert_eq!(back.meta(), m.meta());
        assert_eq!(m.meta().unwrap().system, "sde-limit-cycle");
        let csv = m.marginal_csv();
        assert_eq!(csv.lines().count(), 9);
        assert!(csv.starts_with("x,y,rho,weight,fiber_id\n"));
    }
}
