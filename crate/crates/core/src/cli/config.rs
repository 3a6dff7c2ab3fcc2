use crate::error::{Error, Result};
use crate::flows::{flow_by_id, FlowMap};
use crate::paths::{BrownianSampler, EnsembleSampler, PathSampler, PeriodPolicy, PeriodicPathEnsemble, ZeroSampler};
use crate::wrps::systems::{random_ode_wrps, sde_closed_form_wrps, sde_wrps, Corruption};
use crate::wrps::{scaled_period, Wrps};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "WRPS_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "wrps-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Brownian,
    /// `ω ≡ 0`.
    Zero,
    /// The standard two-member periodic ensemble.
    Periodic,
}

/// Everything a run depends on. Missing keys take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: String,
    pub seed: u64,
    pub dt: f64,
    pub window: (f64, f64),
    pub tolerance: f64,
    pub period: PeriodPolicy,
    /// Initial angle of the section: radians for `random-ode`, turns for `sde-limit-cycle`.
    pub alpha0: f64,
    /// Defaults to periodic for `random-ode` and Brownian otherwise.
    pub noise: Option<NoiseKind>,
    pub rho0: f64,
    pub horizon: f64,
    pub samples: usize,
    /// Number of paths the verification suite cycles through.
    pub verify_paths: u64,
    /// Which sampled path `simulate` and `export-plot` use.
    pub path_index: u64,
    pub record_every: usize,
    pub corrupt_period: Option<f64>,
    pub corrupt_radius: Option<f64>,
    pub corrupt_rate: Option<f64>,
    pub n_paths: usize,
    pub n_time: usize,
    pub t_list: Vec<f64>,
    pub replicates: usize,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: "sde-limit-cycle".into(),
            seed: 0,
            dt: 1e-3,
            window: (-20.0, 5.0),
            tolerance: 1e-6,
            period: PeriodPolicy::Uniform { lo: 1.0, hi: 2.0 },
            alpha0: 0.0,
            noise: None,
            rho0: 1.0,
            horizon: 2.0,
            samples: 200,
            verify_paths: 4,
            path_index: 0,
            record_every: 10,
            corrupt_period: None,
            corrupt_radius: None,
            corrupt_rate: None,
            n_paths: 200,
            n_time: 64,
            t_list: vec![0.3, 1.0],
            replicates: 20,
            output_dir: None,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive, got {v}")))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        flow_by_id(&self.system)?;
        positive("dt", self.dt)?;
        let (lo, hi) = self.window;
        if !(lo < 0.0 && 0.0 < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::invalid(format!("window must satisfy lo < 0 < hi, got ({lo}, {hi})")));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::invalid(format!("tolerance must be non-negative, got {}", self.tolerance)));
        }
        self.period.validate()?;
        if matches!(self.period, PeriodPolicy::None) && self.system == "sde-limit-cycle" {
            return Err(Error::invalid("sde-limit-cycle needs a period policy"));
        }
        if !(self.alpha0.is_finite() && self.rho0.is_finite() && self.rho0 >= 0.0) {
            return Err(Error::invalid("alpha0 must be finite and rho0 non-negative"));
        }
        positive("horizon", self.horizon)?;
        for (name, c) in [
            ("corrupt_period", self.corrupt_period),
            ("corrupt_radius", self.corrupt_radius),
            ("corrupt_rate", self.corrupt_rate),
        ] {
            if let Some(v) = c {
                positive(name, v)?;
            }
        }
        if self.samples == 0 || self.verify_paths == 0 || self.record_every == 0 || self.replicates == 0 {
            return Err(Error::invalid("samples, verify_paths, record_every and replicates must be at least 1"));
        }
        if self.n_paths == 0 || self.n_time < 2 {
            return Err(Error::invalid("need n_paths >= 1 and n_time >= 2"));
        }
        if self.t_list.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("t_list entries must be finite"));
        }
        Ok(())
    }

    pub fn noise(&self) -> NoiseKind {
        self.noise.unwrap_or(if self.system == "random-ode" { NoiseKind::Periodic } else { NoiseKind::Brownian })
    }

    pub fn flow(&self) -> Result<Arc<dyn FlowMap>> {
        flow_by_id(&self.system)
    }

    pub fn sampler(&self) -> Result<Box<dyn PathSampler>> {
        let (lo, hi) = self.window;
        Ok(match self.noise() {
            NoiseKind::Brownian => Box::new(BrownianSampler::new(self.seed, lo, hi, self.dt, self.period)?),
            NoiseKind::Zero => Box::new(ZeroSampler {
                seed: self.seed,
                window_lo: lo,
                window_hi: hi,
                dt: self.dt,
                period: self.period,
            }),
            NoiseKind::Periodic => {
                Box::new(EnsembleSampler::new(PeriodicPathEnsemble::standard(), self.seed, lo, hi, self.dt)?)
            }
        })
    }

    pub fn corruption(&self) -> Corruption {
        Corruption {
            period_scale: self.corrupt_period.unwrap_or(1.0),
            radius_scale: self.corrupt_radius.unwrap_or(1.0),
            rate_scale: self.corrupt_rate.unwrap_or(1.0),
        }
    }

    /// The system's solution, with any requested corruption applied.
    pub fn wrps(&self) -> Result<Wrps> {
        let c = self.corruption();
        match self.system.as_str() {
            "sde-limit-cycle" if c.is_none() => Ok(sde_wrps(self.alpha0)),
            "sde-limit-cycle" => Ok(sde_closed_form_wrps(self.alpha0, c)),
            "random-ode" if c.radius_scale != 1.0 || c.rate_scale != 1.0 => {
                Err(Error::invalid("random-ode supports only corrupt_period"))
            }
            "random-ode" if c.is_none() => Ok(random_ode_wrps(self.alpha0)),
            "random-ode" => Ok(random_ode_wrps(self.alpha0).with_period(scaled_period(c.period_scale))),
            other => Err(Error::invalid(format!("unknown system {other:?}"))),
        }
    }

    /// Flag, then config file, then the environment, then the built-in default.
    pub fn output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }
}
