use super::SamplePath;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// JSON form of a path, discretized on its grid knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEnvelope {
    pub window_lo: f64,
    pub window_hi: f64,
    pub dt: f64,
    pub period_tag: Option<f64>,
    pub values: Vec<f64>,
}

/// 17 significant digits, enough to round-trip any f64.
pub(crate) fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

impl SamplePath {
    pub fn to_envelope(&self) -> PathEnvelope {
        PathEnvelope {
            window_lo: self.window_lo(),
            window_hi: self.window_hi(),
            dt: self.dt(),
            period_tag: self.period_tag(),
            values: self.values(),
        }
    }

    /// Rebuild a grid path from its envelope; smooth paths come back as
    /// their grid discretization.
    pub fn from_envelope(env: &PathEnvelope) -> Result<Self> {
        let expected = ((env.window_hi - env.window_lo) / env.dt).round() as usize + 1;
        if env.values.len() != expected {
            return Err(Error::invalid(format!(
                "envelope holds {} values, window and dt imply {expected}",
                env.values.len()
            )));
        }
        SamplePath::from_grid(env.window_lo, env.dt, env.values.clone(), env.period_tag)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_envelope())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_envelope(&serde_json::from_str(text)?)
    }

    /// CSV with a `#` metadata line (`dt`, window, `period_tag`), then `t,value` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let tag = self.period_tag().map(fmt17).unwrap_or_default();
        let _ = writeln!(
            out,
            "# dt={},window_lo={},window_hi={},period_tag={}",
            fmt17(self.dt()),
            fmt17(self.window_lo()),
            fmt17(self.window_hi()),
            tag
        );
        out.push_str("t,value\n");
        for (t, v) in self.knot_times().into_iter().zip(self.values()) {
            let _ = writeln!(out, "{},{}", fmt17(t), fmt17(v));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let meta = lines
            .next()
            .and_then(|l| l.strip_prefix("# "))
            .ok_or_else(|| Error::Serialization("missing metadata line".into()))?;
        let mut dt = None;
        let mut lo = None;
        let mut tag = None;
        for field in meta.split(',') {
            let (k, v) =
                field.split_once('=').ok_or_else(|| Error::Serialization(format!("bad metadata field {field:?}")))?;
            let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| Error::Serialization(e.to_string()));
            match k.trim() {
                "dt" => dt = Some(parse(v)?),
                "window_lo" => lo = Some(parse(v)?),
                "window_hi" => {}
                "period_tag" if v.trim().is_empty() => {}
                "period_tag" => tag = Some(parse(v)?),
                other => return Err(Error::Serialization(format!("unknown metadata key {other}"))),
            }
        }
        if lines.next().map(str::trim) != Some("t,value") {
            return Err(Error::Serialization("missing t,value header".into()));
        }
        let values = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split(',')
                    .nth(1)
                    .ok_or_else(|| Error::Serialization(format!("bad row {l:?}")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Serialization(e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let dt = dt.ok_or_else(|| Error::Serialization("metadata lacks dt".into()))?;
        let lo = lo.ok_or_else(|| Error::Serialization("metadata lacks window_lo".into()))?;
        SamplePath::from_grid(lo, dt, values, tag)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::sample_two_sided_bm;
    use proptest::prelude::*;

    #[test]
    fn csv_layout() {
        let p = sample_two_sided_bm(1, -0.02, 0.02, 0.01).unwrap().with_period_tag(Some(2.0)).unwrap();
        let csv = p.to_csv();
        let mut lines = csv.lines();
        assert!(lines.next().unwrap().starts_with("# dt=1.0000000000000000e-2,window_lo="));
        assert_eq!(lines.next(), Some("t,value"));
        assert_eq!(lines.count(), 5);
    }

    #[test]
    fn envelope_length_is_checked() {
        let mut env = sample_two_sided_bm(1, -1.0, 1.0, 0.1).unwrap().to_envelope();
        env.values.pop();
        assert!(SamplePath::from_envelope(&env).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn json_and_csv_round_trip_bit_exact(seed in 0u64..1000, shift in -0.5f64..0.5, tag in 0.1f64..5.0) {
            let p = sample_two_sided_bm(seed, -1.0, 1.0, 0.01).unwrap()
                .with_period_tag(Some(tag)).unwrap()
                .shift(shift).unwrap();
            let q = SamplePath::from_json(&p.to_json().unwrap()).unwrap();
            prop_assert_eq!(q.values(), p.values());
            prop_assert_eq!(q.period_tag(), p.period_tag());
            let r = SamplePath::from_csv(&p.to_csv()).unwrap();
            prop_assert_eq!(r.values(), p.values());
            prop_assert_eq!(r.dt(), p.dt());
            prop_assert_eq!(r.window_lo(), p.window_lo());
        }
    }
}
