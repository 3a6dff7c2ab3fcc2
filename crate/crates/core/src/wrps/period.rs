use crate::error::{Error, Result};
use crate::geometry::Point;
use std::f64::consts::{PI, TAU};

/// Mean return time to the half-line at angle `section` (radians), counting
/// only crossings in the increasing-angle direction. Crossing times are
/// found by linear interpolation in the unwrapped angle.
pub fn estimate_period(trajectory: &[(f64, Point)], section: f64) -> Result<f64> {
    let mut crossings = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    let mut unwrapped = 0.0;
    let mut last_raw = 0.0;
    for &(t, p) in trajectory {
        if p.norm() == 0.0 {
            continue;
        }
        let raw = (p.y.atan2(p.x) - section).rem_euclid(TAU);
        match prev {
            None => unwrapped = if raw > PI { raw - TAU } else { raw },
            Some(_) => {
                let mut d = raw - last_raw;
                if d > PI {
                    d -= TAU;
                } else if d <= -PI {
                    d += TAU;
                }
                unwrapped += d;
            }
        }
        last_raw = raw;
        if let Some((t0, a0)) = prev {
            if unwrapped > a0 {
                let k0 = (a0 / TAU).floor();
                let k1 = (unwrapped / TAU).floor();
                let mut k = k0 + 1.0;
                while k <= k1 {
                    let level = k * TAU;
                    crossings.push(t0 + (level - a0) / (unwrapped - a0) * (t - t0));
                    k += 1.0;
                }
            }
        }
        prev = Some((t, unwrapped));
    }
    if crossings.len() < 2 {
        return Err(Error::invalid(format!("need at least two section crossings, found {}", crossings.len())));
    }
    Ok((crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64)
}
