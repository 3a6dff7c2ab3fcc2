use super::SamplePath;
use crate::error::{Error, Result};

/// Running-maximum statistics around `t1`:
/// `M1 = max_{v∈[0,t1]} ω(t1 - v) - ω(t1)` and
/// `M2 = max_{v∈[0,t2-t1]} ω(t1 + v) - ω(t1)`, maxima over grid knots
/// (plus the interval endpoints).
pub fn running_max_stats(path: &SamplePath, t1: f64, t2: f64) -> Result<(f64, f64)> {
    if !(0.0 < t1 && t1 < t2) {
        return Err(Error::invalid(format!("need 0 < t1 < t2, got t1={t1}, t2={t2}")));
    }
    let base = path.value(t1)?;
    path.value(t2)?;
    let m1 = max_over(path, 0.0, t1)? - base;
    let m2 = max_over(path, t1, t2)? - base;
    Ok((m1, m2))
}

fn max_over(path: &SamplePath, a: f64, b: f64) -> Result<f64> {
    let dt = path.dt();
    let lo = path.window_lo();
    let first = ((a - lo) / dt).ceil().max(0.0) as usize;
    let last = (((b - lo) / dt).floor() as usize).min(path.len() - 1);
    let mut m = path.value(a)?.max(path.value(b)?);
    if first <= last {
        let times = path.knot_times();
        let values = path.values();
        for k in first..=last {
            if times[k] >= a && times[k] <= b {
                m = m.max(values[k]);
            }
        }
    }
    Ok(m)
}
