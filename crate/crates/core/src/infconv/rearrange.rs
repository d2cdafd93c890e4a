//! Moving agent 1's piece of the tail to the top of `X`.

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::rv::SimpleRandomVariable;
use crate::space::FiniteSpace;

use super::share::{cover_problem, finish};
use super::{AgentSpec, Composition, SharingResult};

const MASS_TOL: f64 = 1e-12;

/// Checks that agent 0's prior densities `q / mu` are non-increasing along
/// `order` and every other agent's are non-decreasing.
fn check_mlr(priors: &[Vec<Vec<f64>>], mu: &[f64], order: &[usize]) -> Result<()> {
    let pts: Vec<usize> = order.iter().copied().filter(|&j| mu[j] > 0.0).collect();
    for (i, list) in priors.iter().enumerate() {
        for q in list {
            for w in pts.windows(2) {
                let (lo, hi) = (w[0], w[1]);
                let (a, b) = (q[lo] / mu[lo], q[hi] / mu[hi]);
                let tol = MASS_TOL * a.abs().max(b.abs()).max(1.0);
                let bad = if i == 0 { b > a + tol } else { b < a - tol };
                if bad {
                    return Err(Error::MlrViolated {
                        agent: i,
                        lower: lo,
                        upper: hi,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Rearranges a sharing result so agent 1 (index 0) holds an upper set of
/// `X` inside the tail, with the same reference mass, and the displaced
/// region goes to the other agents with their reference masses unchanged.
///
/// Needs agent 0's densities decreasing in `X` and the others' increasing.
/// Fractional compositions need reference weights on `space`; atomic ones
/// need equal reference weights (or none). Certificates and the value are
/// re-verified.
pub fn tail_rearrange(
    res: &SharingResult,
    agents: &[AgentSpec],
    x: &SimpleRandomVariable,
    space: &FiniteSpace,
) -> Result<SharingResult> {
    let n = agents.len();
    let m = x.atoms();
    if space.atoms() != m {
        return Err(Error::SpaceMismatch {
            expected: m,
            found: space.atoms(),
        });
    }
    let cover = cover_problem(agents, x)?;
    let mu: Vec<f64> = match (space.ref_weights(), &res.composition) {
        (Some(w), Composition::Atomic(_)) => {
            if w.iter().any(|&v| (v - w[0]).abs() > MASS_TOL) {
                return Err(Error::ModeUnsupported(
                    "atomic rearrangement needs equal reference weights".into(),
                ));
            }
            w.to_vec()
        }
        (Some(w), _) => w.to_vec(),
        (None, Composition::Atomic(_)) => vec![1.0 / m as f64; m],
        (None, _) => return Err(Error::MissingRefWeights),
    };
    // tail atoms by increasing X, ties by index
    let order: Vec<usize> = x.order().into_iter().filter(|j| res.tail.contains(j)).collect();
    check_mlr(&cover.priors, &mu, &order)?;
    if n < 2 || order.is_empty() {
        return Ok(res.clone());
    }

    let composition = match &res.composition {
        Composition::Atomic(a) => {
            let mut counts = vec![0usize; n];
            order.iter().for_each(|&j| counts[a[j]] += 1);
            let mut out = a.clone();
            let mut pos = order.len();
            for &j in order.iter().rev().take(counts[0]) {
                out[j] = 0;
                pos -= 1;
            }
            let mut next = 0;
            for (i, &c) in counts.iter().enumerate().skip(1) {
                for &j in &order[next..next + c] {
                    out[j] = i;
                }
                next += c;
            }
            debug_assert_eq!(next, pos);
            Composition::Atomic(out)
        }
        Composition::Fractional(s) => {
            let mass: Vec<f64> = (0..n).map(|i| order.iter().map(|&j| s[i][j] * mu[j]).sum()).collect();
            let rest: f64 = mass[1..].iter().sum();
            let mut out = s.clone();
            let mut left = mass[0];
            for &j in order.iter().rev() {
                let mut take = if mu[j] > 0.0 { (left / mu[j]).clamp(0.0, 1.0) } else { 0.0 };
                if take > 1.0 - MASS_TOL {
                    take = 1.0;
                } else if take < MASS_TOL {
                    take = 0.0;
                }
                left -= take * mu[j];
                out[0][j] = take;
                for i in 1..n {
                    out[i][j] = if rest > 0.0 { (1.0 - take) * mass[i] / rest } else { 0.0 };
                }
                if rest <= 0.0 {
                    out[0][j] = 1.0;
                }
            }
            Composition::Fractional(out)
        }
    };
    if composition == res.composition {
        return Ok(res.clone());
    }
    let out = finish(agents, x, res.value, composition, res.y_shift)?;
    if out.value != res.value || matches!(out.value, ExtendedReal::NegativeInfinity) && !out.allocations.is_empty() {
        return Err(Error::NumericBreakdown("rearrangement changed the value".into()));
    }
    Ok(out)
}
