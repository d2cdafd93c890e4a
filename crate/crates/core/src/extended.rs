//! Real numbers extended by negative infinity.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A value that is either finite or `-inf` (the supremum of the empty set
/// of admissible values).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtendedReal {
    Finite(f64),
    NegativeInfinity,
}

impl ExtendedReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::NegativeInfinity => None,
        }
    }

    pub fn is_negative_infinity(self) -> bool {
        matches!(self, ExtendedReal::NegativeInfinity)
    }

    pub fn map(self, f: impl FnOnce(f64) -> f64) -> Self {
        match self {
            ExtendedReal::Finite(v) => ExtendedReal::Finite(f(v)),
            neg => neg,
        }
    }

    /// `-inf` maps to `f64::NEG_INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::NEG_INFINITY)
    }
}

impl From<f64> for ExtendedReal {
    fn from(v: f64) -> Self {
        ExtendedReal::Finite(v)
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use ExtendedReal::*;
        match (self, other) {
            (NegativeInfinity, NegativeInfinity) => Some(Ordering::Equal),
            (NegativeInfinity, Finite(_)) => Some(Ordering::Less),
            (Finite(_), NegativeInfinity) => Some(Ordering::Greater),
            (Finite(a), Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::NegativeInfinity => f.write_str("-inf"),
        }
    }
}
