//! Weak random periodic solutions `(ψ, T)` of planar cocycles driven by noise paths.
//!
//! The crate is organised bottom-up:
//!
//! - [`paths`]: two-sided noise paths, the shift `θ_t`, Brownian and
//!   periodic-ensemble samplers, running-maximum statistics.
//! - [`flows`]: the cocycle contract `Ψ(t, ω)x`, the skew product and the two
//!   exactly solvable planar systems (`random-ode`, `sde-limit-cycle`).
//! - [`wrps`]: the pair `(ψ, T)`, its criterion, extension and verification.
//! - [`measures`]: fiber point masses, periodic-measure checks, invariant
//!   measure estimates, pushforward and energy distance.
//! - [`cli`]: configuration and the subcommands behind `wrps-lab`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod flows;
pub mod geometry;
pub mod measures;
pub mod paths;
pub mod rng;
pub mod stats;
pub mod wrps;

pub use error::{Error, Result};
pub use flows::{FlowMap, RandomOdeFlow, SdeLimitCycleFlow};
pub use geometry::Point;
pub use paths::{PathSampler, SamplePath};
pub use wrps::Wrps;
