//! Distortion functions as monotone breakpoint tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing continuous map of `[0,1]` onto itself, linear between
/// breakpoints. The inverse is exact on the same table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distortion {
    points: Vec<(f64, f64)>,
}

impl Distortion {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidDistortion("need at least two breakpoints".into()));
        }
        let first = points[0];
        let last = points[points.len() - 1];
        if first != (0.0, 0.0) || last != (1.0, 1.0) {
            return Err(Error::InvalidDistortion(
                "table must start at (0,0) and end at (1,1)".into(),
            ));
        }
        for w in points.windows(2) {
            let ((t0, g0), (t1, g1)) = (w[0], w[1]);
            if !(t1 > t0 && g1 > g0) || !t1.is_finite() || !g1.is_finite() {
                return Err(Error::InvalidDistortion(format!(
                    "breakpoints ({t0}, {g0}) and ({t1}, {g1}) are not strictly increasing"
                )));
            }
        }
        Ok(Self { points })
    }

    pub fn identity() -> Self {
        Self {
            points: vec![(0.0, 0.0), (1.0, 1.0)],
        }
    }

    /// Tabulates `t -> t^power` on `pieces` equal steps.
    pub fn power(power: f64, pieces: usize) -> Result<Self> {
        if !(power > 0.0) || pieces == 0 {
            return Err(Error::InvalidDistortion(format!(
                "power {power} with {pieces} pieces"
            )));
        }
        let pts = (0..=pieces)
            .map(|k| {
                let t = k as f64 / pieces as f64;
                (t, t.powf(power))
            })
            .collect();
        Self::new(pts)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn apply(&self, t: f64) -> f64 {
        interpolate(&self.points, t, |p| p.0, |p| p.1)
    }

    pub fn inverse(&self, g: f64) -> f64 {
        interpolate(&self.points, g, |p| p.1, |p| p.0)
    }
}

fn interpolate(
    pts: &[(f64, f64)],
    at: f64,
    key: impl Fn(&(f64, f64)) -> f64,
    val: impl Fn(&(f64, f64)) -> f64,
) -> f64 {
    if at <= 0.0 {
        return 0.0;
    }
    if at >= 1.0 {
        return 1.0;
    }
    // first breakpoint with key >= at
    let k = pts.partition_point(|p| key(p) < at);
    let hi = &pts[k];
    if key(hi) == at {
        return val(hi);
    }
    let lo = &pts[k - 1];
    let s = (at - key(lo)) / (key(hi) - key(lo));
    val(lo) + s * (val(hi) - val(lo))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_table_is_exact_on_breakpoints() {
        let g = Distortion::power(2.0, 20).unwrap();
        assert_eq!(g.apply(0.5), 0.25);
        assert_eq!(g.inverse(0.25), 0.5);
        assert_eq!(g.apply(0.0), 0.0);
        assert_eq!(g.apply(1.0), 1.0);
        let t = 0.2;
        assert!((g.apply(t) - 0.04).abs() < 1e-15);
        assert!((g.inverse(0.04) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn inverse_round_trips_between_breakpoints() {
        let g = Distortion::new(vec![(0.0, 0.0), (0.3, 0.6), (1.0, 1.0)]).unwrap();
        for k in 0..=100 {
            let t = k as f64 / 100.0;
            assert!((g.inverse(g.apply(t)) - t).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_flat_or_misanchored_tables() {
        assert!(Distortion::new(vec![(0.0, 0.0), (0.5, 0.5), (0.6, 0.5), (1.0, 1.0)]).is_err());
        assert!(Distortion::new(vec![(0.0, 0.1), (1.0, 1.0)]).is_err());
        assert!(Distortion::new(vec![(0.0, 0.0)]).is_err());
    }
}
