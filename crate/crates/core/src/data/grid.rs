use serde::{Deserialize, Serialize};

use crate::capacity::ProbabilityVector;
use crate::error::{Error, Result};

/// Equispaced atom centers from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct Grid {
    lo: f64,
    hi: f64,
    count: usize,
}

#[derive(Deserialize)]
struct RawGrid {
    lo: f64,
    hi: f64,
    count: usize,
}

impl TryFrom<RawGrid> for Grid {
    type Error = Error;

    fn try_from(g: RawGrid) -> Result<Self> {
        Grid::new(g.lo, g.hi, g.count)
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            lo: -0.05,
            hi: 0.05,
            count: 700,
        }
    }
}

impl Grid {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidGrid(format!("need lo < hi, got [{lo}, {hi}]")));
        }
        if count < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 atoms, got {count}")));
        }
        Ok(Self { lo, hi, count })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.count - 1) as f64
    }

    pub fn center(&self, j: usize) -> f64 {
        if j + 1 == self.count {
            self.hi
        } else {
            self.lo + j as f64 * self.step()
        }
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.center(j)).collect()
    }

    /// Nearest atom, clamping to the boundary atoms outside `[lo, hi]`.
    pub fn nearest(&self, x: f64) -> usize {
        let t = ((x - self.lo) / self.step()).round();
        t.clamp(0.0, (self.count - 1) as f64) as usize
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Count of observations outside `[lo, hi]`.
pub fn clamped_count(losses: &[f64], grid: &Grid) -> usize {
    losses.iter().filter(|&&l| !grid.contains(l)).count()
}

/// Empirical distribution with each observation moved to its nearest atom.
pub fn empirical_on_grid(losses: &[f64], grid: &Grid) -> Result<ProbabilityVector> {
    if losses.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut counts = vec![0usize; grid.count()];
    for &l in losses {
        counts[grid.nearest(l)] += 1;
    }
    let n = losses.len() as f64;
    let mut w: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    // last occupied atom takes the rounding residual
    let last = counts.iter().rposition(|&c| c > 0).unwrap();
    let others: f64 = w.iter().enumerate().filter(|&(j, _)| j != last).map(|(_, v)| v).sum();
    w[last] = 1.0 - others;
    ProbabilityVector::new(w)
}
