use super::brownian::PeriodPolicy;
use super::{validate_grid, PathSampler, SamplePath};
use crate::error::{Error, Result};
use crate::rng::{sub, StreamKey};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// Smooth `period`-periodic curve `Σ_k cos_k cos(2πks/T) + sin_k sin(2πks/T)`,
/// harmonics numbered from `k = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigCurve {
    pub period: f64,
    pub harmonics: Vec<Harmonic>,
}

impl TrigCurve {
    pub fn zero() -> Self {
        Self { period: 1.0, harmonics: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.harmonics.iter().all(|h| h.cos == 0.0 && h.sin == 0.0)
    }

    pub fn eval(&self, s: f64) -> f64 {
        let phase = TAU * (s / self.period);
        self.harmonics
            .iter()
            .enumerate()
            .map(|(i, h)| {
                let (sn, cs) = ((i + 1) as f64 * phase).sin_cos();
                h.cos * cs + h.sin * sn
            })
            .sum()
    }
}

/// One periodic driving path `ω_n` with its period `T_n` and weight `a_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicMember {
    pub period: f64,
    pub weight: f64,
    pub harmonics: Vec<Harmonic>,
}

impl PeriodicMember {
    pub fn curve(&self) -> TrigCurve {
        TrigCurve { period: self.period, harmonics: self.harmonics.clone() }
    }
}

/// Finite family `{(ω_n, T_n, a_n)}`: a path is drawn by picking member `n`
/// with probability `a_n` and a phase uniform on `[0, T_n)`, which makes the
/// shift flow measure preserving.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicPathEnsemble {
    pub members: Vec<PeriodicMember>,
}

impl PeriodicPathEnsemble {
    pub fn new(members: Vec<PeriodicMember>) -> Result<Self> {
        let e = Self { members };
        e.validate()?;
        Ok(e)
    }

    /// Two C¹ members with periods 1.5 and 2.5 and weights 0.3 / 0.7.
    pub fn standard() -> Self {
        Self {
            members: vec![
                PeriodicMember {
                    period: 1.5,
                    weight: 0.3,
                    harmonics: vec![Harmonic { cos: 0.2, sin: 0.8 }, Harmonic { cos: 0.3, sin: 0.0 }],
                },
                PeriodicMember {
                    period: 2.5,
                    weight: 0.7,
                    harmonics: vec![
                        Harmonic { cos: 0.0, sin: 1.2 },
                        Harmonic { cos: -0.4, sin: 0.1 },
                        Harmonic { cos: 0.0, sin: 0.25 },
                    ],
                },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.members.is_empty() {
            return Err(Error::Empty("periodic path ensemble"));
        }
        let mut total = 0.0;
        let mut last_period = 0.0;
        for (n, m) in self.members.iter().enumerate() {
            if !(m.weight.is_finite() && m.weight > 0.0) {
                return Err(Error::invalid(format!("member {n}: weight must be positive")));
            }
            if !(m.period.is_finite() && m.period > last_period) {
                return Err(Error::invalid(format!("member {n}: periods must be positive and strictly increasing")));
            }
            if m.harmonics.iter().any(|h| !(h.cos.is_finite() && h.sin.is_finite())) {
                return Err(Error::invalid(format!("member {n}: non-finite coefficient")));
            }
            let curve = m.curve();
            for j in 0..32 {
                let s = -m.period + j as f64 * m.period / 16.0;
                if (curve.eval(s + m.period) - curve.eval(s)).abs() > 1e-10 {
                    return Err(Error::invalid(format!("member {n}: curve is not {}-periodic", m.period)));
                }
            }
            last_period = m.period;
            total += m.weight;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("ensemble weights sum to {total}, not 1")));
        }
        Ok(())
    }

    fn draw(&self, key: StreamKey, window_lo: f64, window_hi: f64, dt: f64) -> Result<SamplePath> {
        self.validate()?;
        let mut rng = key.rng(sub::MEMBER);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = self.members.last().expect("validated non-empty");
        for m in &self.members {
            acc += m.weight;
            if u < acc {
                chosen = m;
                break;
            }
        }
        let phase = chosen.period * rng.random::<f64>();
        SamplePath::smooth(chosen.curve(), phase, window_lo, window_hi, dt, Some(chosen.period))
    }
}

/// Draw `θ_u ω_n` from the ensemble, discretized on the window, tagged with `T_n`.
pub fn sample_periodic(ensemble: &PeriodicPathEnsemble, seed: u64, window: (f64, f64), dt: f64) -> Result<SamplePath> {
    ensemble.draw(StreamKey::new(seed, 0), window.0, window.1, dt)
}

#[derive(Debug, Clone)]
pub struct EnsembleSampler {
    pub ensemble: PeriodicPathEnsemble,
    pub seed: u64,
    pub window_lo: f64,
    pub window_hi: f64,
    pub dt: f64,
}

impl EnsembleSampler {
    pub fn new(ensemble: PeriodicPathEnsemble, seed: u64, window_lo: f64, window_hi: f64, dt: f64) -> Result<Self> {
        ensemble.validate()?;
        validate_grid(window_lo, window_hi, dt)?;
        Ok(Self { ensemble, seed, window_lo, window_hi, dt })
    }
}

impl PathSampler for EnsembleSampler {
    fn sample(&self, index: u64) -> Result<SamplePath> {
        self.ensemble.draw(StreamKey::new(self.seed, index), self.window_lo, self.window_hi, self.dt)
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn with_seed(&self, seed: u64) -> Box<dyn PathSampler> {
        Box::new(Self { seed, ..self.clone() })
    }
}

/// The noiseless path `ω ≡ 0` on a window.
pub fn sample_zero_path(window_lo: f64, window_hi: f64, dt: f64, period_tag: Option<f64>) -> Result<SamplePath> {
    SamplePath::smooth(TrigCurve::zero(), 0.0, window_lo, window_hi, dt, period_tag)
}

/// Always returns the zero path; periods still follow the policy.
#[derive(Debug, Clone)]
pub struct ZeroSampler {
    pub seed: u64,
    pub window_lo: f64,
    pub window_hi: f64,
    pub dt: f64,
    pub period: PeriodPolicy,
}

impl PathSampler for ZeroSampler {
    fn sample(&self, index: u64) -> Result<SamplePath> {
        let tag = self.period.draw(StreamKey::new(self.seed, index));
        sample_zero_path(self.window_lo, self.window_hi, self.dt, tag)
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn with_seed(&self, seed: u64) -> Box<dyn PathSampler> {
        Box::new(Self { seed, ..self.clone() })
    }
}
