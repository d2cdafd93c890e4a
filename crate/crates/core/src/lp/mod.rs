//! Small dense linear programs.
//!
//! Problems are solved by a two-phase primal simplex on a dense tableau with
//! Bland's rule. There is no presolve and no randomization, so identical input
//! follows an identical pivot sequence.

mod dump;
mod simplex;

pub use dump::{from_text, to_text};
pub use simplex::{lp_feasible, lp_solve, Feasibility, PIVOT_TOL};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_VARS: usize = 2000;
pub const MAX_ROWS: usize = 5000;

/// Feasibility tolerance used when re-substituting a returned point.
pub const CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    /// `(lo, hi)` per variable; infinite ends allowed.
    pub bounds: Vec<(f64, f64)>,
}

impl LpProblem {
    /// Problem with default bounds `[0, +inf)`.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            constraints: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) -> &mut Self {
        self.bounds[var] = (lo, hi);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vars();
        if n == 0 || n > MAX_VARS {
            return Err(Error::DimensionMismatch(format!(
                "{n} variables (allowed 1..={MAX_VARS})"
            )));
        }
        if self.constraints.len() > MAX_ROWS {
            return Err(Error::DimensionMismatch(format!(
                "{} rows exceed {MAX_ROWS}",
                self.constraints.len()
            )));
        }
        if self.bounds.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} bounds for {n} variables",
                self.bounds.len()
            )));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::DimensionMismatch("non-finite objective".into()));
        }
        for (r, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "row {r} has {} coefficients for {n} variables",
                    c.coeffs.len()
                )));
            }
            if c.coeffs.iter().any(|a| !a.is_finite()) || !c.rhs.is_finite() {
                return Err(Error::DimensionMismatch(format!("row {r} is not finite")));
            }
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::DimensionMismatch(format!(
                    "variable {j} has bounds [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    /// Largest violation of a constraint or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (&v, &(lo, hi)) in x.iter().zip(&self.bounds) {
            worst = worst.max(lo - v).max(v - hi);
        }
        worst
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Infeasibility proof.
///
/// With every variable shifted so that its finite bound sits at zero (and
/// free variables split), the multipliers combine the rows (constraints
/// first, then one upper-bound row per variable with a finite range) into
/// `u^T A >= 0` against `u^T b < 0`. `combined_rhs` is `u^T b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarkasCertificate {
    pub row_multipliers: Vec<f64>,
    pub bound_multipliers: Vec<f64>,
    pub combined_rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub certificate: Option<FarkasCertificate>,
    pub pivots: usize,
}
