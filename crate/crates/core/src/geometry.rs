use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// A point of the state space E = R^2.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// `(rho cos a, rho sin a)` with `a` in radians.
    pub fn from_polar(rho: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self { x: rho * c, y: rho * s }
    }

    /// `(rho cos 2 pi a, rho sin 2 pi a)` with `a` in turns.
    pub fn from_turns(rho: f64, turns: f64) -> Self {
        Self::from_polar(rho, TAU * turns)
    }

    /// Angle in radians, reduced to `[0, 2 pi)`.
    pub fn angle(&self) -> f64 {
        reduce_radians(self.y.atan2(self.x))
    }

    /// Angle in turns, reduced to `[0, 1)`.
    pub fn turns(&self) -> f64 {
        reduce_turns(self.y.atan2(self.x) / TAU)
    }
}

/// Floor-based reduction to `[0, period)`, clamping the floating-point
/// spill `x - floor(x) == period` back to 0.
pub fn reduce_mod(value: f64, period: f64) -> f64 {
    let r = value - period * (value / period).floor();
    if r >= period || r < 0.0 {
        0.0
    } else {
        r
    }
}

pub fn reduce_radians(angle: f64) -> f64 {
    reduce_mod(angle, TAU)
}

pub fn reduce_turns(turns: f64) -> f64 {
    reduce_mod(turns, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reductions_stay_in_range() {
        for v in [-1e-20, -TAU, 0.0, TAU, 3.0 * TAU - 1e-17, 1e6, -7.5] {
            let r = reduce_radians(v);
            assert!((0.0..TAU).contains(&r), "{v} -> {r}");
        }
        assert_eq!(reduce_turns(-1e-20), 0.0);
        assert_eq!(reduce_turns(2.25), 0.25);
        assert!((reduce_turns(-0.25) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn polar_round_trip() {
        let p = Point::from_turns(2.0, 0.3);
        assert!((p.norm() - 2.0).abs() < 1e-15);
        assert!((p.turns() - 0.3).abs() < 1e-15);
        assert!((Point::from_polar(1.0, 5.0).angle() - 5.0).abs() < 1e-14);
    }
}
