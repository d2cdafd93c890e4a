//! Random variables on finite spaces and increasing piecewise-linear maps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::Event;

/// A bounded random variable: one finite value per atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimpleRandomVariable {
    values: Vec<f64>,
}

impl TryFrom<Vec<f64>> for SimpleRandomVariable {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<SimpleRandomVariable> for Vec<f64> {
    fn from(x: SimpleRandomVariable) -> Self {
        x.values
    }
}

impl SimpleRandomVariable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::SpaceMismatch {
                expected: 1,
                found: 0,
            });
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(j));
        }
        Ok(Self { values })
    }

    pub fn constant(m: usize, c: f64) -> Self {
        Self {
            values: vec![c; m],
        }
    }

    pub fn indicator(a: &Event) -> Self {
        Self {
            values: (0..a.space_atoms())
                .map(|j| if a.contains(j) { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    pub fn atoms(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Distinct values in increasing order.
    pub fn distinct_sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// `{X > x}`.
    pub fn tail(&self, x: f64) -> Event {
        self.event_where(|v| v > x)
    }

    /// `{X >= x}`.
    pub fn at_least(&self, x: f64) -> Event {
        self.event_where(|v| v >= x)
    }

    fn event_where(&self, f: impl Fn(f64) -> bool) -> Event {
        let mut e = Event::empty(self.atoms());
        for (j, &v) in self.values.iter().enumerate() {
            if f(v) {
                e.insert(j);
            }
        }
        e
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn check_same(&self, other: &Self) -> Result<()> {
        if self.atoms() != other.atoms() {
            return Err(Error::SpaceMismatch {
                expected: self.atoms(),
                found: other.atoms(),
            });
        }
        Ok(())
    }

    /// Atom indices sorted by value, ties by index.
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.atoms()).collect();
        idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]).then(a.cmp(&b)));
        idx
    }
}

/// A continuous, strictly increasing, piecewise-linear map of the real line.
///
/// Linear between breakpoints; outside them the first and last segment
/// slopes are extended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncreasingMap {
    points: Vec<(f64, f64)>,
}

impl IncreasingMap {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::NonMonotoneTransform);
        }
        for w in points.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if !(x1 > x0 && y1 > y0) || !x1.is_finite() || !y1.is_finite() {
                return Err(Error::NonMonotoneTransform);
            }
        }
        if !points[0].0.is_finite() || !points[0].1.is_finite() {
            return Err(Error::NonMonotoneTransform);
        }
        Ok(Self { points })
    }

    pub fn identity() -> Self {
        Self {
            points: vec![(0.0, 0.0), (1.0, 1.0)],
        }
    }

    /// `y = a x + b` with `a > 0`.
    pub fn affine(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![(0.0, b), (1.0, a + b)])
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn apply(&self, x: f64) -> f64 {
        let p = &self.points;
        let k = p.partition_point(|q| q.0 < x);
        let (lo, hi) = if k == 0 {
            (p[0], p[1])
        } else if k == p.len() {
            (p[k - 2], p[k - 1])
        } else if p[k].0 == x {
            return p[k].1;
        } else {
            (p[k - 1], p[k])
        };
        lo.1 + (x - lo.0) * (hi.1 - lo.1) / (hi.0 - lo.0)
    }

    pub fn apply_rv(&self, x: &SimpleRandomVariable) -> SimpleRandomVariable {
        SimpleRandomVariable {
            values: x.values.iter().map(|&v| self.apply(v)).collect(),
        }
    }
}
