use super::{invariant_measure_estimate, Atom, EmpiricalMeasure};
use crate::error::{Error, Result};
use crate::paths::PathSampler;
use crate::rng::derive_seed;
use crate::wrps::Wrps;
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;

struct Cloud {
    x: Vec<f64>,
    y: Vec<f64>,
    w: Vec<f64>,
}

impl Cloud {
    fn of(m: &EmpiricalMeasure) -> Self {
        Self {
            x: m.atoms.iter().map(|a| a.point.x).collect(),
            y: m.atoms.iter().map(|a| a.point.y).collect(),
            w: m.atoms.iter().map(|a| a.weight).collect(),
        }
    }

    /// `Σ_j w_j ‖(px, py) − x_j‖` over `j ∈ range`.
    fn row(&self, px: f64, py: f64, range: std::ops::Range<usize>) -> f64 {
        let mut acc = 0.0;
        for j in range {
            let dx = px - self.x[j];
            let dy = py - self.y[j];
            acc += self.w[j] * (dx * dx + dy * dy).sqrt();
        }
        acc
    }
}

/// `E‖X − Y‖`; rows run in parallel and are summed in index order.
fn cross(a: &Cloud, b: &Cloud) -> f64 {
    let rows: Vec<f64> = (0..a.x.len()).into_par_iter().map(|i| a.w[i] * b.row(a.x[i], a.y[i], 0..b.x.len())).collect();
    rows.iter().sum()
}

/// `E‖X − X′‖` from the strict upper triangle.
fn within(a: &Cloud) -> f64 {
    let n = a.x.len();
    let rows: Vec<f64> = (0..n).into_par_iter().map(|i| a.w[i] * a.row(a.x[i], a.y[i], i + 1..n)).collect();
    2.0 * rows.iter().sum::<f64>()
}

fn atom_order(a: &Atom, b: &Atom) -> Ordering {
    a.point.x.total_cmp(&b.point.x).then(a.point.y.total_cmp(&b.point.y)).then(a.weight.total_cmp(&b.weight))
}

fn measure_order(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        a.atoms.iter().zip(&b.atoms).map(|(p, q)| atom_order(p, q)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
    })
}

/// Energy distance between the state-space marginals,
/// `(2E‖X−Y‖ − E‖X−X′‖ − E‖Y−Y′‖)^{1/2}`, clamped at 0. Exactly symmetric.
pub fn energy_distance(m1: &EmpiricalMeasure, m2: &EmpiricalMeasure) -> Result<f64> {
    if m1.is_empty() || m2.is_empty() {
        return Err(Error::Empty("measure"));
    }
    let (first, second) = if measure_order(m1, m2).is_le() { (m1, m2) } else { (m2, m1) };
    let (a, b) = (Cloud::of(first), Cloud::of(second));
    let squared = 2.0 * cross(&a, &b) - (within(&a) + within(&b));
    Ok(squared.max(0.0).sqrt())
}

/// Sampling scale of the energy distance between independent estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseFloor {
    pub replicates: Vec<f64>,
    pub mean: f64,
}

/// Mean energy distance between pairs of independent invariant-measure
/// estimates, each pair drawn with seeds derived from `seed`.
pub fn bootstrap_noise_floor(
    w: &Wrps,
    sampler: &dyn PathSampler,
    n_paths: usize,
    n_time: usize,
    replicates: usize,
    seed: u64,
) -> Result<NoiseFloor> {
    if replicates == 0 {
        return Err(Error::invalid("need at least one bootstrap replicate"));
    }
    let mut out = Vec::with_capacity(replicates);
    for r in 0..replicates as u64 {
        let left = sampler.with_seed(derive_seed(seed, 2 * r + 1));
        let right = sampler.with_seed(derive_seed(seed, 2 * r + 2));
        let a = invariant_measure_estimate(w, left.as_ref(), n_paths, n_time)?;
        let b = invariant_measure_estimate(w, right.as_ref(), n_paths, n_time)?;
        out.push(energy_distance(&a, &b)?);
    }
    let mean = out.iter().sum::<f64>() / out.len() as f64;
    Ok(NoiseFloor { replicates: out, mean })
}
