use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::flows::{cocycle_residuals, stationary_radius_value, CocycleReport, FlowMap, PolarPoint, Truncation};
use crate::measures::{
    bootstrap_noise_floor, energy_distance, fiber_orbit, invariant_measure_estimate, pushforward, verify_wrpm,
    NoiseFloor, WrpmReport,
};
use crate::paths::SamplePath;
use crate::rng::derive_seed;
use crate::wrps::{check_criterion, verify_wrps, PeriodFn, Section, Wrps, WrpsReport};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Radius bound for the random initial points of the cocycle check.
const COCYCLE_MAX_RADIUS: f64 = 2.0;
/// Pushforward distances may exceed the noise floor by this factor.
const NOISE_MARGIN: f64 = 2.0;

/// What a command produced.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub command: &'static str,
    pub passed: bool,
    pub outputs: Vec<PathBuf>,
}

impl Outcome {
    pub fn summary_json(&self) -> String {
        serde_json::to_string(self).expect("outcome serializes")
    }
}

/// `{:.16e}` with negative zero printed as zero.
fn num(v: f64) -> String {
    format!("{:.16e}", v + 0.0)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

fn polar_row(out: &mut String, flow: &dyn FlowMap, t: f64, x: crate::Point) {
    let p = flow.to_polar(x);
    let _ = writeln!(out, "{},{},{},{},{}", num(t), num(x.x), num(x.y), num(p.rho), num(p.alpha));
}

/// Trajectory `t ↦ Ψ(t, ω)x₀` on `[0, horizon]`, one row every `record_every` grid steps.
pub fn cmd_simulate(c: &RunConfig) -> Result<Outcome> {
    let flow = c.flow()?;
    let path = c.sampler()?.sample(c.path_index)?;
    let x0 = flow.point_from_polar(PolarPoint { alpha: c.alpha0, rho: c.rho0 });
    let step = c.dt * c.record_every as f64;
    let rows = (c.horizon / step + 1e-9).floor() as usize;
    let mut csv = String::from("t,x,y,rho,alpha\n");
    for k in 0..=rows {
        let t = k as f64 * step;
        polar_row(&mut csv, flow.as_ref(), t, flow.evaluate(t, &path, x0)?);
    }
    let file = write_file(&c.output_dir(), "trajectory.csv", &csv)?;
    Ok(Outcome { command: "simulate", passed: true, outputs: vec![file] })
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub system: String,
    pub seed: u64,
    pub tolerance: f64,
    pub cocycle: CocycleReport,
    pub wrps: Vec<WrpsReport>,
    pub criterion_residuals: Vec<f64>,
    pub wrpm: Vec<WrpmReport>,
    pub max_residual: f64,
    pub passed: bool,
}

fn section_of(w: &Wrps) -> (Section, PeriodFn) {
    let (a, b) = (w.clone(), w.clone());
    (Arc::new(move |p: &SamplePath| a.psi0(p)), Arc::new(move |p: &SamplePath| b.period_of(p)))
}

pub fn verify_report(c: &RunConfig) -> Result<VerifyReport> {
    let flow = c.flow()?;
    let sampler = c.sampler()?;
    let w = c.wrps()?;
    let cocycle = cocycle_residuals(
        flow.as_ref(),
        sampler.as_ref(),
        c.verify_paths,
        c.samples,
        c.horizon,
        COCYCLE_MAX_RADIUS,
        c.seed,
    )?;
    let (psi0, period_of) = section_of(&w);
    let mut wrps = Vec::new();
    let mut criterion_residuals = Vec::new();
    let mut wrpm = Vec::new();
    for i in 0..c.verify_paths {
        let path = sampler.sample(i)?;
        let sample_seed = derive_seed(c.seed, i);
        wrps.push(verify_wrps(&w, flow.as_ref(), &path, c.samples, c.horizon, sample_seed)?);
        criterion_residuals.push(check_criterion(flow.as_ref(), &psi0, &period_of, &path)?);
        wrpm.push(verify_wrpm(&w, flow.as_ref(), &path, c.samples, c.horizon, sample_seed)?);
    }
    let max_residual = wrps
        .iter()
        .map(WrpsReport::max_residual)
        .chain(wrpm.iter().map(WrpmReport::max_distance))
        .chain(criterion_residuals.iter().copied())
        .fold(cocycle.max_residual, f64::max);
    let complete = wrps.iter().all(|r| r.skipped < r.samples) && wrpm.iter().all(|r| r.skipped < r.samples);
    let passed = complete && max_residual <= c.tolerance;
    Ok(VerifyReport {
        system: c.system.clone(),
        seed: c.seed,
        tolerance: c.tolerance,
        cocycle,
        wrps,
        criterion_residuals,
        wrpm,
        max_residual,
        passed,
    })
}

pub fn cmd_verify(c: &RunConfig) -> Result<Outcome> {
    let report = verify_report(c)?;
    let file = write_file(&c.output_dir(), "verify_report.json", &serde_json::to_string_pretty(&report)?)?;
    Ok(Outcome { command: "verify", passed: report.passed, outputs: vec![file] })
}

#[derive(Debug, Clone, Serialize)]
pub struct PushforwardCheck {
    pub t: f64,
    pub energy_distance: f64,
    pub max_support_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasureReport {
    pub system: String,
    pub seed: u64,
    pub n_paths: usize,
    pub n_time: usize,
    pub total_weight: f64,
    pub max_support_deviation: f64,
    pub noise_floor: NoiseFloor,
    pub threshold: f64,
    pub pushforwards: Vec<PushforwardCheck>,
    pub passed: bool,
}

/// Radius of the fiber circle `L^ω` for the unperturbed solution.
fn fiber_radius(c: &RunConfig) -> impl Fn(&SamplePath) -> Result<f64> + '_ {
    move |p: &SamplePath| match c.system.as_str() {
        "sde-limit-cycle" => stationary_radius_value(p, Truncation::WindowStart),
        "random-ode" => Ok(1.0),
        other => Err(Error::invalid(format!("unknown system {other:?}"))),
    }
}

pub fn cmd_measure(c: &RunConfig) -> Result<Outcome> {
    let flow = c.flow()?;
    let sampler = c.sampler()?;
    let w = c.wrps()?;
    let dir = c.output_dir();
    let mu = invariant_measure_estimate(&w, sampler.as_ref(), c.n_paths, c.n_time)?;
    let support = mu.max_support_deviation(fiber_radius(c))?;
    let mut outputs = vec![
        write_file(&dir, "measure.json", &mu.to_json()?)?,
        write_file(&dir, "measure_marginal.csv", &mu.marginal_csv())?,
    ];
    let mut pushforwards = Vec::new();
    for (k, &t) in c.t_list.iter().enumerate() {
        let pushed = pushforward(flow.as_ref(), &mu, t)?;
        pushforwards.push(PushforwardCheck {
            t,
            energy_distance: energy_distance(&mu, &pushed)?,
            max_support_deviation: pushed.max_support_deviation(fiber_radius(c))?,
        });
        outputs.push(write_file(&dir, &format!("pushforward_{k}.csv"), &pushed.marginal_csv())?);
    }
    let floor =
        bootstrap_noise_floor(&w, sampler.as_ref(), c.n_paths, c.n_time, c.replicates, derive_seed(c.seed, u64::MAX))?;
    let threshold = NOISE_MARGIN * floor.mean;
    let passed = support <= c.tolerance
        && pushforwards.iter().all(|p| p.energy_distance <= threshold && p.max_support_deviation <= c.tolerance);
    let report = MeasureReport {
        system: c.system.clone(),
        seed: c.seed,
        n_paths: c.n_paths,
        n_time: c.n_time,
        total_weight: mu.total_weight(),
        max_support_deviation: support,
        noise_floor: floor,
        threshold,
        pushforwards,
        passed,
    };
    outputs.push(write_file(&dir, "measure_report.json", &serde_json::to_string_pretty(&report)?)?);
    Ok(Outcome { command: "measure", passed, outputs })
}

/// The noise path and the orbit `{ψ(s, ω) : s ∈ [0, T(ω))}` at `n_time` midpoints.
pub fn cmd_export_plot(c: &RunConfig) -> Result<Outcome> {
    let flow = c.flow()?;
    let w = c.wrps()?;
    let path = c.sampler()?.sample(c.path_index)?;
    let dir = c.output_dir();
    let period = w.period_of(&path)?;
    let orbit = fiber_orbit(&w, &path, 1, c.n_time)?;
    let mut csv = String::from("s,x,y,rho,alpha\n");
    for (j, x) in orbit.into_iter().enumerate() {
        polar_row(&mut csv, flow.as_ref(), (j as f64 + 0.5) * period / c.n_time as f64, x);
    }
    let outputs = vec![write_file(&dir, "path.csv", &path.to_csv())?, write_file(&dir, "orbit.csv", &csv)?];
    Ok(Outcome { command: "export-plot", passed: true, outputs })
}
