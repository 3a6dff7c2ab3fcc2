//! The `wrps-lab` command line: a JSON run configuration, flag overrides on
//! top of it, and four subcommands writing into an output directory.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 I/O error.

mod commands;
mod config;

pub use commands::{cmd_export_plot, cmd_measure, cmd_simulate, cmd_verify, Outcome};
pub use config::{NoiseKind, RunConfig, DEFAULT_OUT_DIR, OUT_DIR_ENV};

use crate::error::Error;
use crate::paths::PeriodPolicy;
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "wrps-lab", version, about = "Weak random periodic solutions: simulation and verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Write the trajectory of one initial point as CSV.
    Simulate,
    /// Run the cocycle, solution, criterion and periodic-measure checks.
    Verify,
    /// Estimate the invariant measure and test it against its pushforwards.
    Measure,
    /// Write the noise path and the periodic orbit as plot-ready CSV.
    ExportPlot,
}

/// Flags overriding the configuration file.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// `random-ode` or `sde-limit-cycle`.
    #[arg(long, global = true)]
    pub system: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub window_lo: Option<f64>,
    #[arg(long, global = true)]
    pub window_hi: Option<f64>,
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Constant period tag for every path.
    #[arg(long, global = true, conflicts_with = "period_uniform")]
    pub period: Option<f64>,
    /// Period tags drawn uniformly from `LO,HI`.
    #[arg(long, global = true, value_name = "LO,HI", value_parser = parse_pair)]
    pub period_uniform: Option<(f64, f64)>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha0: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub noise: Option<NoiseKind>,
    #[arg(long, global = true)]
    pub rho0: Option<f64>,
    #[arg(long, global = true)]
    pub horizon: Option<f64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub verify_paths: Option<u64>,
    #[arg(long, global = true)]
    pub path_index: Option<u64>,
    #[arg(long, global = true)]
    pub record_every: Option<usize>,
    /// Debug: scale the period used inside the solution.
    #[arg(long, global = true)]
    pub corrupt_period: Option<f64>,
    /// Debug: scale the radius of the solution.
    #[arg(long, global = true)]
    pub corrupt_radius: Option<f64>,
    /// Debug: scale the angular rate of the solution.
    #[arg(long, global = true)]
    pub corrupt_rate: Option<f64>,
    #[arg(long, global = true)]
    pub n_paths: Option<usize>,
    #[arg(long, global = true)]
    pub n_time: Option<usize>,
    /// Comma-separated pushforward times.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub t_list: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub replicates: Option<usize>,
    /// Output directory; falls back to the config, then `$WRPS_OUT_DIR`, then `wrps-out`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected LO,HI, got {s:?}"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

impl Overrides {
    pub fn apply(&self, mut c: RunConfig) -> RunConfig {
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = self.$field.clone() { c.$field = v; } )* };
        }
        set!(system, seed, dt, tolerance, alpha0, rho0, horizon, samples, verify_paths, path_index, record_every);
        set!(n_paths, n_time, t_list, replicates);
        if let Some(lo) = self.window_lo {
            c.window.0 = lo;
        }
        if let Some(hi) = self.window_hi {
            c.window.1 = hi;
        }
        if let Some(t) = self.period {
            c.period = PeriodPolicy::Constant(t);
        }
        if let Some((lo, hi)) = self.period_uniform {
            c.period = PeriodPolicy::Uniform { lo, hi };
        }
        if self.noise.is_some() {
            c.noise = self.noise;
        }
        for (slot, v) in [
            (&mut c.corrupt_period, self.corrupt_period),
            (&mut c.corrupt_radius, self.corrupt_radius),
            (&mut c.corrupt_rate, self.corrupt_rate),
        ] {
            if v.is_some() {
                *slot = v;
            }
        }
        if self.out.is_some() {
            c.output_dir = self.out.clone();
        }
        c
    }

    /// Configuration file (or defaults) with these flags applied.
    pub fn resolve(&self) -> crate::Result<RunConfig> {
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let c = self.apply(base);
        c.validate()?;
        Ok(c)
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::NoConvergence(_) => EXIT_VERIFICATION,
        _ => EXIT_CONFIG,
    }
}

/// Parse `args`, run the command, and return the process exit code. A short
/// JSON summary goes to `out`, diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = cli.overrides.resolve().and_then(|config| match cli.command {
        Command::Simulate => cmd_simulate(&config),
        Command::Verify => cmd_verify(&config),
        Command::Measure => cmd_measure(&config),
        Command::ExportPlot => cmd_export_plot(&config),
    });
    match result {
        Ok(outcome) => {
            let _ = writeln!(out, "{}", outcome.summary_json());
            if outcome.passed {
                EXIT_OK
            } else {
                let _ = writeln!(err, "verification failed");
                EXIT_VERIFICATION
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("wrps-lab").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_defaults() {
        let cli =
            parse(&["verify", "--seed", "7", "--window-lo", "-10", "--period-uniform", "1,3", "--t-list", "0.5,2"]);
        assert_eq!(cli.command, Command::Verify);
        let c = cli.overrides.resolve().unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.window, (-10.0, 5.0));
        assert_eq!(c.period, PeriodPolicy::Uniform { lo: 1.0, hi: 3.0 });
        assert_eq!(c.t_list, vec![0.5, 2.0]);
    }

    #[test]
    fn flags_win_over_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"seed": 3, "dt": 0.01, "system": "random-ode"}"#).unwrap();
        let cli = parse(&["simulate", "--config", path.to_str().unwrap(), "--seed", "9"]);
        let c = cli.overrides.resolve().unwrap();
        assert_eq!((c.seed, c.dt, c.system.as_str()), (9, 0.01, "random-ode"));
        assert_eq!(c.noise(), NoiseKind::Periodic);
    }

    #[test]
    fn invalid_configs_are_config_errors() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        for args in [
            vec!["wrps-lab", "simulate", "--dt", "0"],
            vec!["wrps-lab", "simulate", "--window-lo", "1"],
            vec!["wrps-lab", "simulate", "--system", "lorenz"],
            vec!["wrps-lab", "simulate", "--period", "-1"],
            vec!["wrps-lab", "bogus"],
        ] {
            assert_eq!(run_with(args.clone(), &mut out, &mut err), EXIT_CONFIG, "{args:?}");
        }
    }

    #[test]
    fn unknown_config_key_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"sede": 3}"#).unwrap();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_with(["wrps-lab", "simulate", "--config", path.to_str().unwrap()], &mut out, &mut err);
        assert_eq!(code, EXIT_CONFIG);
    }

    #[test]
    fn missing_config_file_is_io_error() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_with(["wrps-lab", "simulate", "--config", "/nonexistent/run.json"], &mut out, &mut err);
        assert_eq!(code, EXIT_IO);
    }
}
