//! Choquet Expected Shortfall.

use serde::{Deserialize, Serialize};

use crate::capacity::{is_submodular, scale_alpha, Capacity, TIE_EPS};
use crate::choquet::{check_space, choquet_integral, tail_profile};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::lp::{lp_solve, LpProblem, LpStatus, Relation, Sense};
use crate::rv::SimpleRandomVariable;

/// Largest space for the event-enumerating linear programs.
pub const MAX_DUAL_ATOMS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EsMethod {
    /// `(1/alpha) ∫_0^alpha VaR_t dt` over the exact step curve.
    QuantileIntegral,
    /// `∫ X d((w/alpha) ∧ 1)`.
    ScaledCapacity,
}

pub fn choquet_es(
    w: &Capacity,
    alpha: f64,
    x: &SimpleRandomVariable,
    method: EsMethod,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    match method {
        EsMethod::QuantileIntegral => Ok(tail_profile(w, x)?.var_average(alpha)),
        EsMethod::ScaledCapacity => choquet_integral(&scale_alpha(w, alpha)?, x),
    }
}

fn check_open_level(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

/// `x + (1/alpha) ∫ (X - x)_+ dw`.
pub fn ru_objective(w: &Capacity, alpha: f64, at: f64, x: &SimpleRandomVariable) -> Result<f64> {
    check_open_level(alpha)?;
    let excess = x.map(|v| (v - at).max(0.0))?;
    Ok(at + choquet_integral(w, &excess)? / alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuResult {
    pub minimum: f64,
    pub argmin_lo: f64,
    pub argmin_hi: f64,
}

/// Minimizes the RU objective over the breakpoints of `X`.
///
/// The minimum is the smallest objective value at a breakpoint. The argmin
/// interval comes from the segment slopes: on `(x_k, x_{k+1})` the slope is
/// `1 - w(X > x_k)/alpha`, so the objective stops decreasing at the first
/// `x_k` with `w(X > x_k) <= alpha` and starts increasing at the first with
/// `w(X > x_k) < alpha`, both under the quantile tie rule.
pub fn ru_minimize(w: &Capacity, alpha: f64, x: &SimpleRandomVariable) -> Result<RuResult> {
    check_open_level(alpha)?;
    let profile = tail_profile(w, x)?;
    let mut minimum = f64::INFINITY;
    for &v in &profile.values {
        minimum = minimum.min(ru_objective(w, alpha, v, x)?);
    }
    let last = profile.values.len() - 1;
    let lo = profile
        .tail
        .iter()
        .position(|&c| c <= alpha + TIE_EPS)
        .unwrap_or(last);
    let hi = profile
        .tail
        .iter()
        .position(|&c| c < alpha - TIE_EPS)
        .unwrap_or(last);
    Ok(RuResult {
        minimum,
        argmin_lo: profile.values[lo],
        argmin_hi: profile.values[hi],
    })
}

fn check_dual_space(m: usize) -> Result<()> {
    if m > MAX_DUAL_ATOMS {
        return Err(Error::SpaceTooLarge {
            m,
            max: MAX_DUAL_ATOMS,
        });
    }
    Ok(())
}

/// `max Σ q_j x_j` over probabilities `q` with `q(A) <= cap[A]` for every
/// proper event. Rows with `cap[A] >= 1` are implied by `Σ q = 1` and skipped.
fn dominated_expectation(cap: &[f64], x: &SimpleRandomVariable) -> Result<ExtendedReal> {
    let m = x.atoms();
    let mut p = LpProblem::new(Sense::Max, x.values().to_vec());
    p.add(vec![1.0; m], Relation::Eq, 1.0);
    let full = (1usize << m) - 1;
    for (mask, &c) in cap.iter().enumerate().take(full).skip(1) {
        if c >= 1.0 {
            continue;
        }
        let row = (0..m).map(|j| (mask >> j & 1) as f64).collect();
        p.add(row, Relation::Le, c);
    }
    let sol = lp_solve(&p)?;
    match sol.status {
        LpStatus::Optimal => Ok(ExtendedReal::Finite(sol.objective)),
        LpStatus::Infeasible => Ok(ExtendedReal::NegativeInfinity),
        LpStatus::Unbounded => Err(Error::NumericBreakdown(
            "bounded dual program reported unbounded".into(),
        )),
    }
}

/// `sup { E_Q[X] : Q <= w/alpha }`, defined only when `w_alpha` is submodular.
pub fn es_dual(w: &Capacity, alpha: f64, x: &SimpleRandomVariable) -> Result<f64> {
    check_open_level(alpha)?;
    check_space(w, x)?;
    check_dual_space(x.atoms())?;
    let scaled = scale_alpha(w, alpha)?;
    if !is_submodular(&scaled)?.holds {
        return Err(Error::NotCoherent);
    }
    let cap = scaled.tabulate()?;
    dominated_expectation(&cap, x)?
        .finite()
        .ok_or_else(|| Error::NumericBreakdown("dual program infeasible".into()))
}

/// `sup { E_Q[X] : Q <= min_i w_i }` for submodular `w_i`; `-inf` when no
/// probability is dominated.
pub fn coherent_infconv(ws: &[Capacity], x: &SimpleRandomVariable) -> Result<ExtendedReal> {
    if ws.is_empty() {
        return Err(Error::EmptyList);
    }
    for w in ws {
        check_space(w, x)?;
    }
    check_dual_space(x.atoms())?;
    let mut cap: Option<Vec<f64>> = None;
    for (i, w) in ws.iter().enumerate() {
        if !is_submodular(w)?.holds {
            return Err(Error::NotSubmodular(i));
        }
        let t = w.tabulate()?;
        cap = Some(match cap {
            None => t,
            Some(c) => c.into_iter().zip(t).map(|(a, b)| a.min(b)).collect(),
        });
    }
    dominated_expectation(&cap.unwrap_or_default(), x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{binary_from_level, ProbabilityVector, Side, SupProbability};
    use crate::choquet::var;

    fn uniform4() -> Capacity {
        ProbabilityVector::uniform(4).into()
    }

    fn x1234() -> SimpleRandomVariable {
        SimpleRandomVariable::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap()
    }

    fn sup_fixture() -> Capacity {
        SupProbability::new(vec![
            ProbabilityVector::new(vec![0.5, 0.3, 0.2]).unwrap(),
            ProbabilityVector::new(vec![0.2, 0.3, 0.5]).unwrap(),
        ])
        .unwrap()
        .into()
    }

    #[test]
    fn es_both_methods_on_uniform() {
        for method in [EsMethod::QuantileIntegral, EsMethod::ScaledCapacity] {
            assert_eq!(choquet_es(&uniform4(), 0.5, &x1234(), method).unwrap(), 3.5);
        }
    }

    #[test]
    fn es_at_one_is_the_integral() {
        let w = sup_fixture();
        let x = SimpleRandomVariable::new(vec![1.0, 2.0, 3.0]).unwrap();
        let i = choquet_integral(&w, &x).unwrap();
        for method in [EsMethod::QuantileIntegral, EsMethod::ScaledCapacity] {
            assert!((choquet_es(&w, 1.0, &x, method).unwrap() - i).abs() < 1e-12);
        }
        assert!(choquet_es(&w, 0.0, &x, EsMethod::ScaledCapacity).is_err());
    }

    #[test]
    fn es_of_constant() {
        let x = SimpleRandomVariable::constant(3, -2.5);
        assert_eq!(choquet_es(&sup_fixture(), 0.3, &x, EsMethod::QuantileIntegral).unwrap(), -2.5);
        assert_eq!(choquet_es(&sup_fixture(), 0.3, &x, EsMethod::ScaledCapacity).unwrap(), -2.5);
    }

    #[test]
    fn ru_objective_examples() {
        assert_eq!(ru_objective(&uniform4(), 0.5, 3.0, &x1234()).unwrap(), 3.5);
        assert_eq!(ru_objective(&uniform4(), 0.5, 2.0, &x1234()).unwrap(), 3.5);
        assert_eq!(ru_objective(&uniform4(), 0.5, 9.0, &x1234()).unwrap(), 9.0);
        assert!(ru_objective(&uniform4(), 1.0, 2.0, &x1234()).is_err());
    }

    #[test]
    fn ru_minimize_examples() {
        let r = ru_minimize(&uniform4(), 0.5, &x1234()).unwrap();
        assert_eq!((r.minimum, r.argmin_lo, r.argmin_hi), (3.5, 2.0, 3.0));
        let r = ru_minimize(&uniform4(), 0.125, &x1234()).unwrap();
        assert_eq!((r.minimum, r.argmin_lo, r.argmin_hi), (4.0, 4.0, 4.0));
        let c = SimpleRandomVariable::constant(4, 7.0);
        let r = ru_minimize(&uniform4(), 0.3, &c).unwrap();
        assert_eq!((r.minimum, r.argmin_lo, r.argmin_hi), (7.0, 7.0, 7.0));
    }

    #[test]
    fn ru_argmin_matches_var_on_sup_fixture() {
        let w = sup_fixture();
        let x = SimpleRandomVariable::new(vec![1.0, 2.0, 3.0]).unwrap();
        for alpha in [0.1, 0.3, 0.5, 0.65, 0.8, 0.95] {
            let r = ru_minimize(&w, alpha, &x).unwrap();
            assert_eq!(r.argmin_lo, var(&w, alpha, Side::Left, &x).unwrap());
            assert_eq!(r.argmin_hi, var(&w, alpha, Side::Right, &x).unwrap());
            let es = choquet_es(&w, alpha, &x, EsMethod::ScaledCapacity).unwrap();
            assert!((r.minimum - es).abs() < 1e-10);
        }
    }

    #[test]
    fn dual_examples() {
        assert!((es_dual(&uniform4(), 0.5, &x1234()).unwrap() - 3.5).abs() < 1e-12);
        // alpha = 1 lies outside the open range of the dual; approach it instead
        let v = es_dual(&uniform4(), 1.0 - 1e-12, &x1234()).unwrap();
        assert!((v - 2.5).abs() < 1e-9);
    }

    #[test]
    fn dual_refuses_non_coherent() {
        // a binary capacity scaled by any alpha stays binary and is not submodular
        let v: Capacity = binary_from_level(&uniform4(), 0.25, Side::Right).unwrap().into();
        assert_eq!(es_dual(&v, 0.5, &x1234()), Err(Error::NotCoherent));
    }

    #[test]
    fn coherent_infconv_examples() {
        let x = x1234();
        let one = coherent_infconv(&[uniform4()], &x).unwrap();
        assert!((one.finite().unwrap() - 2.5).abs() < 1e-12);

        let ws = [
            scale_alpha(&uniform4(), 0.25).unwrap(),
            scale_alpha(&uniform4(), 0.5).unwrap(),
        ];
        let v = coherent_infconv(&ws, &x).unwrap().finite().unwrap();
        assert!((v - 3.5).abs() < 1e-8);

        let d1: Capacity = ProbabilityVector::new(vec![1.0, 0.0]).unwrap().into();
        let d2: Capacity = ProbabilityVector::new(vec![0.0, 1.0]).unwrap().into();
        let y = SimpleRandomVariable::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(coherent_infconv(&[d1, d2], &y).unwrap(), ExtendedReal::NegativeInfinity);
    }

    #[test]
    fn coherent_infconv_rejects_non_submodular_member() {
        let v: Capacity = binary_from_level(&uniform4(), 0.25, Side::Right).unwrap().into();
        assert_eq!(
            coherent_infconv(&[uniform4(), v], &x1234()),
            Err(Error::NotSubmodular(1))
        );
    }
}
