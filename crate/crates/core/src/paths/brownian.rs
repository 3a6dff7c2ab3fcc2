use super::{validate_grid, PathSampler, SamplePath};
use crate::error::{Error, Result};
use crate::rng::{sub, StreamKey};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// How the orbit-constant period `T(ω)` is attached to a sampled path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodPolicy {
    None,
    Constant(f64),
    Uniform { lo: f64, hi: f64 },
}

impl PeriodPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PeriodPolicy::None => Ok(()),
            PeriodPolicy::Constant(t) if t.is_finite() && t > 0.0 => Ok(()),
            PeriodPolicy::Uniform { lo, hi } if lo.is_finite() && hi.is_finite() && 0.0 < lo && lo <= hi => Ok(()),
            other => Err(Error::invalid(format!("invalid period policy {other:?}"))),
        }
    }

    pub(crate) fn draw(&self, key: StreamKey) -> Option<f64> {
        match *self {
            PeriodPolicy::None => None,
            PeriodPolicy::Constant(t) => Some(t),
            PeriodPolicy::Uniform { lo, hi } => {
                let u: f64 = key.rng(sub::PERIOD).random();
                Some(lo + (hi - lo) * u)
            }
        }
    }
}

pub(crate) fn two_sided_bm(key: StreamKey, lo: f64, hi: f64, dt: f64) -> Result<SamplePath> {
    validate_grid(lo, hi, dt)?;
    let back = (-lo / dt).round() as usize;
    let fwd = (hi / dt).round() as usize;
    if back == 0 || fwd == 0 {
        return Err(Error::invalid(format!("window [{lo}, {hi}] is narrower than one step")));
    }
    let sd = dt.sqrt();
    let mut values = vec![0.0; back + fwd + 1];

    let mut rng = key.rng(sub::FORWARD);
    let mut w = 0.0;
    for v in values[back + 1..].iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        w += sd * z;
        *v = w;
    }
    // Backward half: an independent motion, time-reflected.
    let mut rng = key.rng(sub::BACKWARD);
    let mut w = 0.0;
    for v in values[..back].iter_mut().rev() {
        let z: f64 = rng.sample(StandardNormal);
        w += sd * z;
        *v = w;
    }
    SamplePath::from_grid(-(back as f64) * dt, dt, values, None)
}

/// Two-sided Brownian motion on `[window_lo, window_hi]` with `ω(0) = 0`,
/// deterministic in `seed`. The window is snapped to the grid `k * dt`.
pub fn sample_two_sided_bm(seed: u64, window_lo: f64, window_hi: f64, dt: f64) -> Result<SamplePath> {
    two_sided_bm(StreamKey::new(seed, 0), window_lo, window_hi, dt)
}

/// Brownian paths indexed by `(seed, index)`, each tagged with a period.
#[derive(Debug, Clone)]
pub struct BrownianSampler {
    pub seed: u64,
    pub window_lo: f64,
    pub window_hi: f64,
    pub dt: f64,
    pub period: PeriodPolicy,
}

impl BrownianSampler {
    pub fn new(seed: u64, window_lo: f64, window_hi: f64, dt: f64, period: PeriodPolicy) -> Result<Self> {
        validate_grid(window_lo, window_hi, dt)?;
        period.validate()?;
        Ok(Self { seed, window_lo, window_hi, dt, period })
    }
}

impl PathSampler for BrownianSampler {
    fn sample(&self, index: u64) -> Result<SamplePath> {
        let key = StreamKey::new(self.seed, index);
        two_sided_bm(key, self.window_lo, self.window_hi, self.dt)?.with_period_tag(self.period.draw(key))
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn with_seed(&self, seed: u64) -> Box<dyn PathSampler> {
        Box::new(Self { seed, ..self.clone() })
    }
}
