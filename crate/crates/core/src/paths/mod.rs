//! Two-sided sample paths of the driving noise and the shift flow on them.
//!
//! A [`SamplePath`] is a view into an immutable source curve `W`: the path
//! value at relative time `s` is `W(offset + s) - W(offset)`. Shifting only
//! moves `offset`, so `shift(shift(p, a), b)` and `shift(p, a + b)` read the
//! same source values and differ by rounding alone.

mod brownian;
mod io;
mod maxima;
mod periodic;

pub use brownian::{sample_two_sided_bm, BrownianSampler, PeriodPolicy};
pub use io::PathEnvelope;
pub use maxima::running_max_stats;
pub use periodic::{
    sample_periodic, sample_zero_path, EnsembleSampler, Harmonic, PeriodicMember, PeriodicPathEnsemble, TrigCurve,
    ZeroSampler,
};

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// Produces independent paths addressed by an index, reproducibly.
pub trait PathSampler: Send + Sync {
    fn sample(&self, index: u64) -> Result<SamplePath>;

    fn seed(&self) -> u64;

    /// The same sampler keyed by a different seed.
    fn with_seed(&self, seed: u64) -> Box<dyn PathSampler>;
}

/// A realization of the noise path on a finite window.
#[derive(Clone)]
pub struct SamplePath {
    source: Arc<Source>,
    offset: f64,
    anchor: f64,
    period_tag: Option<f64>,
}

enum Source {
    Grid(GridSource),
    Smooth(SmoothSource),
}

struct GridSource {
    lo: f64,
    dt: f64,
    values: Vec<f64>,
    /// `weight_prefix[k] = ∫_{lo}^{lo + k dt} exp(2u + 2W(u)) du` for the
    /// piecewise-linear interpolant, integrated exactly segment by segment.
    weight_prefix: Vec<f64>,
}

struct SmoothSource {
    lo: f64,
    dt: f64,
    knots: usize,
    curve: TrigCurve,
}

/// `expm1(d) / d`, continuous at 0.
fn exprel(d: f64) -> f64 {
    if d.abs() < 1e-300 {
        1.0
    } else {
        d.exp_m1() / d
    }
}

const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
    (-0.339_981_043_584_856_26, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_26, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
];

impl GridSource {
    fn new(lo: f64, dt: f64, values: Vec<f64>) -> Self {
        let mut weight_prefix = Vec::with_capacity(values.len());
        weight_prefix.push(0.0);
        let mut acc = 0.0;
        for k in 0..values.len() - 1 {
            let a = lo + k as f64 * dt;
            let e0 = 2.0 * a + 2.0 * values[k];
            let e1 = 2.0 * (a + dt) + 2.0 * values[k + 1];
            acc += dt * e0.exp() * exprel(e1 - e0);
            weight_prefix.push(acc);
        }
        Self { lo, dt, values, weight_prefix }
    }

    fn hi(&self) -> f64 {
        self.lo + (self.values.len() - 1) as f64 * self.dt
    }

    /// Segment index and fractional position of absolute time `u`.
    fn locate(&self, u: f64) -> (usize, f64) {
        let last = self.values.len() - 1;
        let pos = ((u - self.lo) / self.dt).clamp(0.0, last as f64);
        let k = (pos.floor() as usize).min(last - 1);
        (k, pos - k as f64)
    }

    fn eval(&self, u: f64) -> f64 {
        let (k, frac) = self.locate(u);
        let v0 = self.values[k];
        v0 + frac * (self.values[k + 1] - v0)
    }

    /// `∫_{lo}^{u} exp(2v + 2W(v)) dv`.
    fn weight_cumulative(&self, u: f64) -> f64 {
        let (k, frac) = self.locate(u);
        if frac == 0.0 {
            return self.weight_prefix[k];
        }
        let a = self.lo + k as f64 * self.dt;
        let h = frac * self.dt;
        let e0 = 2.0 * a + 2.0 * self.values[k];
        let eu = 2.0 * (a + h) + 2.0 * self.eval(u);
        self.weight_prefix[k] + h * e0.exp() * exprel(eu - e0)
    }
}

impl SmoothSource {
    fn hi(&self) -> f64 {
        self.lo + (self.knots - 1) as f64 * self.dt
    }

    fn weight_integral(&self, a: f64, b: f64) -> f64 {
        if self.curve.is_zero() {
            return (2.0 * a).exp() * (2.0 * (b - a)).exp_m1() / 2.0;
        }
        // Gauss-Legendre on panels aligned with the knot grid.
        let integrand = |u: f64| (2.0 * u + 2.0 * self.curve.eval(u)).exp();
        let first = ((a - self.lo) / self.dt).floor() as i64;
        let mut total = 0.0;
        let mut k = first;
        loop {
            let p0 = (self.lo + k as f64 * self.dt).max(a);
            let p1 = (self.lo + (k + 1) as f64 * self.dt).min(b);
            if p0 >= b {
                break;
            }
            if p1 > p0 {
                let mid = 0.5 * (p0 + p1);
                let half = 0.5 * (p1 - p0);
                total += half * GAUSS4.iter().map(|&(x, w)| w * integrand(mid + half * x)).sum::<f64>();
            }
            k += 1;
        }
        total
    }
}

impl Source {
    fn lo(&self) -> f64 {
        match self {
            Source::Grid(g) => g.lo,
            Source::Smooth(s) => s.lo,
        }
    }

    fn hi(&self) -> f64 {
        match self {
            Source::Grid(g) => g.hi(),
            Source::Smooth(s) => s.hi(),
        }
    }

    fn dt(&self) -> f64 {
        match self {
            Source::Grid(g) => g.dt,
            Source::Smooth(s) => s.dt,
        }
    }

    fn knots(&self) -> usize {
        match self {
            Source::Grid(g) => g.values.len(),
            Source::Smooth(s) => s.knots,
        }
    }

    fn raw_eval(&self, u: f64) -> f64 {
        match self {
            Source::Grid(g) => g.eval(u),
            Source::Smooth(s) => s.curve.eval(u),
        }
    }

    fn knot_value(&self, k: usize) -> f64 {
        match self {
            Source::Grid(g) => g.values[k],
            Source::Smooth(s) => s.curve.eval(s.lo + k as f64 * s.dt),
        }
    }

    fn slack(&self) -> f64 {
        1e-9 * self.dt()
    }

    fn contains(&self, u: f64) -> bool {
        u >= self.lo() - self.slack() && u <= self.hi() + self.slack()
    }

    /// Signed `∫_a^b exp(2u + 2W(u)) du` in absolute time.
    fn weight_integral(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.weight_integral(b, a);
        }
        match self {
            Source::Grid(g) => g.weight_cumulative(b) - g.weight_cumulative(a),
            Source::Smooth(s) => s.weight_integral(a, b),
        }
    }
}

fn validate_period_tag(tag: Option<f64>) -> Result<Option<f64>> {
    match tag {
        Some(t) if !(t.is_finite() && t > 0.0) => Err(Error::invalid(format!("period tag must be positive, got {t}"))),
        other => Ok(other),
    }
}

pub(crate) fn validate_grid(lo: f64, hi: f64, dt: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid(format!("grid step must be positive, got {dt}")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < 0.0 && hi > 0.0) {
        return Err(Error::invalid(format!("window [{lo}, {hi}] must straddle 0")));
    }
    let knots = ((hi - lo) / dt).round() as usize + 1;
    if knots < 3 {
        return Err(Error::invalid("window holds fewer than three grid knots"));
    }
    Ok(knots)
}

impl SamplePath {
    /// Path from values on the uniform grid `lo + k dt`; renormalized so that
    /// it vanishes at 0.
    pub fn from_grid(lo: f64, dt: f64, values: Vec<f64>, period_tag: Option<f64>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid(format!("grid step must be positive, got {dt}")));
        }
        if values.len() < 2 {
            return Err(Error::invalid("a grid path needs at least two knots"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("path values must be finite"));
        }
        let source = Source::Grid(GridSource::new(lo, dt, values));
        if !source.contains(0.0) {
            return Err(Error::invalid(format!("window [{lo}, {}] does not contain 0", source.hi())));
        }
        let tag = validate_period_tag(period_tag)?;
        let mut path = Self::from_source(source, 0.0, tag)?;
        // Values that are already normalized interpolate to zero only up to
        // rounding; keep them bit-exact.
        let scale = match &*path.source {
            Source::Grid(g) => g.values.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            Source::Smooth(_) => 0.0,
        };
        if path.anchor.abs() <= 8.0 * f64::EPSILON * scale {
            path.anchor = 0.0;
        }
        Ok(path)
    }

    pub(crate) fn smooth(
        curve: TrigCurve,
        phase: f64,
        lo: f64,
        hi: f64,
        dt: f64,
        period_tag: Option<f64>,
    ) -> Result<Self> {
        let knots = validate_grid(lo, hi, dt)?;
        let source = Source::Smooth(SmoothSource { lo: phase + lo, dt, knots, curve });
        Self::from_source(source, phase, validate_period_tag(period_tag)?)
    }

    fn from_source(source: Source, offset: f64, period_tag: Option<f64>) -> Result<Self> {
        let anchor = source.raw_eval(offset);
        Ok(Self { source: Arc::new(source), offset, anchor, period_tag })
    }

    pub fn window_lo(&self) -> f64 {
        self.source.lo() - self.offset
    }

    pub fn window_hi(&self) -> f64 {
        self.source.hi() - self.offset
    }

    pub fn window(&self) -> (f64, f64) {
        (self.window_lo(), self.window_hi())
    }

    pub fn dt(&self) -> f64 {
        self.source.dt()
    }

    pub fn period_tag(&self) -> Option<f64> {
        self.period_tag
    }

    /// Total shift applied since construction.
    pub fn origin_offset(&self) -> f64 {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.source.knots()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same path with a different period tag.
    pub fn with_period_tag(&self, period_tag: Option<f64>) -> Result<Self> {
        Ok(Self { period_tag: validate_period_tag(period_tag)?, ..self.clone() })
    }

    /// True when both views read the same source curve.
    pub fn same_source(&self, other: &SamplePath) -> bool {
        Arc::ptr_eq(&self.source, &other.source)
    }

    fn check(&self, s: f64) -> Result<f64> {
        let u = self.offset + s;
        if self.source.contains(u) && s.is_finite() {
            Ok(u)
        } else {
            Err(Error::WindowExhausted { time: s, lo: self.window_lo(), hi: self.window_hi() })
        }
    }

    /// `ω(s)`, linearly interpolated between knots.
    pub fn value(&self, s: f64) -> Result<f64> {
        let u = self.check(s)?;
        Ok(self.source.raw_eval(u) - self.anchor)
    }

    /// The shifted path `θ_t ω : s ↦ ω(t + s) - ω(t)`.
    pub fn shift(&self, t: f64) -> Result<SamplePath> {
        let u = self.check(t)?;
        Ok(SamplePath {
            source: Arc::clone(&self.source),
            offset: u,
            anchor: self.source.raw_eval(u),
            period_tag: self.period_tag,
        })
    }

    /// Times of the grid knots, in this path's own coordinates.
    pub fn knot_times(&self) -> Vec<f64> {
        let lo = self.source.lo();
        let dt = self.dt();
        (0..self.len()).map(|k| lo + k as f64 * dt - self.offset).collect()
    }

    /// Path values at the grid knots.
    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.source.knot_value(k) - self.anchor).collect()
    }

    /// Signed `∫_a^b exp(2s + 2ω(s)) ds`, the radial weight shared by the
    /// limit-cycle flow and its stationary radius. Exact for the
    /// piecewise-linear interpolant of grid paths.
    pub fn exp_integral(&self, a: f64, b: f64) -> Result<f64> {
        let ua = self.check(a)?;
        let ub = self.check(b)?;
        let scale = (-2.0 * self.offset - 2.0 * self.anchor).exp();
        Ok(scale * self.source.weight_integral(ua, ub))
    }

    /// Largest `|ω|` over the knots in `[lo, hi]`.
    pub fn max_abs_on(&self, lo: f64, hi: f64) -> f64 {
        let dt = self.dt();
        let base = self.window_lo();
        let first = (((lo - base) / dt).ceil().max(0.0)) as usize;
        let last = (((hi - base) / dt).floor() as usize).min(self.len() - 1);
        (first..=last).map(|k| (self.source.knot_value(k) - self.anchor).abs()).fold(0.0, f64::max)
    }
}

impl fmt::Debug for SamplePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match *self.source {
            Source::Grid(_) => "grid",
            Source::Smooth(_) => "smooth",
        };
        f.debug_struct("SamplePath")
            .field("kind", &kind)
            .field("window", &self.window())
            .field("dt", &self.dt())
            .field("origin_offset", &self.offset)
            .field("period_tag", &self.period_tag)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> SamplePath {
        // ω(t) = t on [-1, 3]
        let dt = 0.25;
        let values = (0..=16).map(|k| -1.0 + k as f64 * dt).collect();
        SamplePath::from_grid(-1.0, dt, values, Some(2.0)).unwrap()
    }

    #[test]
    fn interpolates_between_knots() {
        let p = ramp();
        assert_eq!(p.value(0.0).unwrap(), 0.0);
        assert!((p.value(0.1).unwrap() - 0.1).abs() < 1e-15);
        assert!((p.value(-0.9).unwrap() + 0.9).abs() < 1e-15);
        assert_eq!(p.len(), 17);
    }

    #[test]
    fn evaluation_outside_window_fails() {
        let p = ramp();
        assert!(matches!(p.value(3.1), Err(Error::WindowExhausted { .. })));
        assert!(matches!(p.value(-1.01), Err(Error::WindowExhausted { .. })));
        assert!(p.value(3.0).is_ok());
    }

    #[test]
    fn shift_moves_window_and_renormalizes() {
        let p = ramp();
        let q = p.shift(0.5).unwrap();
        assert_eq!(q.value(0.0).unwrap(), 0.0);
        assert_eq!(q.window(), (-1.5, 2.5));
        assert!((q.value(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(q.period_tag(), Some(2.0));
        assert_eq!(q.origin_offset(), 0.5);
        assert!(matches!(p.shift(3.5), Err(Error::WindowExhausted { .. })));
    }

    #[test]
    fn shift_by_zero_is_identity() {
        let p = ramp();
        let q = p.shift(0.0).unwrap();
        assert_eq!(p.values(), q.values());
        assert_eq!(p.window(), q.window());
    }

    #[test]
    fn exp_integral_matches_closed_form_on_zero_path() {
        let p = SamplePath::from_grid(-2.0, 0.01, vec![0.0; 401], None).unwrap();
        let exact = ((2.0f64 * 1.5).exp() - (-2.0f64).exp()) / 2.0;
        assert!((p.exp_integral(-1.0, 1.5).unwrap() - exact).abs() < 1e-12 * exact);
        assert!((p.exp_integral(1.5, -1.0).unwrap() + exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn exp_integral_is_additive_and_shift_consistent() {
        let p = sample_two_sided_bm(3, -2.0, 2.0, 1e-2).unwrap();
        let whole = p.exp_integral(-1.3, 1.7).unwrap();
        let parts = p.exp_integral(-1.3, 0.4567).unwrap() + p.exp_integral(0.4567, 1.7).unwrap();
        assert!((whole - parts).abs() < 1e-13 * whole);

        // ∫_a^b e^{2s + 2θ_tω(s)} ds = e^{-2t - 2ω(t)} ∫_{a+t}^{b+t} e^{2u + 2ω(u)} du
        let t = 0.3141;
        let q = p.shift(t).unwrap();
        let lhs = q.exp_integral(-0.5, 0.8).unwrap();
        let rhs = (-2.0 * t - 2.0 * p.value(t).unwrap()).exp() * p.exp_integral(-0.5 + t, 0.8 + t).unwrap();
        assert!((lhs - rhs).abs() < 1e-13 * lhs.abs());
    }

    #[test]
    fn rejects_bad_tags_and_grids() {
        assert!(SamplePath::from_grid(-1.0, 0.0, vec![0.0; 3], None).is_err());
        assert!(SamplePath::from_grid(0.5, 0.1, vec![0.0; 3], None).is_err());
        assert!(SamplePath::from_grid(-1.0, 1.0, vec![0.0; 3], Some(-1.0)).is_err());
    }
}
