//! Choquet integrals and Choquet quantiles.
//!
//! Everything here is computed from the tail profile of `X`: its distinct
//! values `x_1 < ... < x_K` and the capacity of the strict upper sets
//! `c_k = w(X > x_k)`. The function `x -> w(X >= x)` is a step function with
//! breakpoints at the `x_k`, so integrals and quantiles are exact sums and
//! scans over this profile.
//!
//! Tie rule for quantiles, with `t` the threshold (`1 - alpha` for `Q`,
//! `alpha` for `VaR`) and `eps` = [`TIE_EPS`](crate::capacity::TIE_EPS):
//!
//! | side  | comparison      | candidate `x_k` qualifies when |
//! |-------|-----------------|--------------------------------|
//! | left  | `w(X > x) <= t` | `c_k <= t + eps`               |
//! | right | `w(X > x) < t`  | `c_k < t - eps`                |
//!
//! The largest value always qualifies (its upper set is empty), so a quantile
//! is always one of the values of `X`.

use serde::{Deserialize, Serialize};

use crate::capacity::{Capacity, Side, TIE_EPS};
use crate::error::{Error, Result};
use crate::rv::SimpleRandomVariable;
use crate::space::Event;

/// Distinct sorted values of `X` with `w(X > x_k)` for each.
#[derive(Debug, Clone, PartialEq)]
pub struct TailProfile {
    pub values: Vec<f64>,
    pub tail: Vec<f64>,
}

pub(crate) fn check_space(w: &Capacity, x: &SimpleRandomVariable) -> Result<()> {
    if w.atoms() != x.atoms() {
        return Err(Error::SpaceMismatch {
            expected: w.atoms(),
            found: x.atoms(),
        });
    }
    Ok(())
}

pub fn tail_profile(w: &Capacity, x: &SimpleRandomVariable) -> Result<TailProfile> {
    check_space(w, x)?;
    let order = x.order();
    let vals = x.values();
    let mut values = Vec::new();
    let mut tail = Vec::new();
    let mut upper = Event::empty(x.atoms());
    // walk from the top so each tail event grows by one value class
    let mut k = order.len();
    while k > 0 {
        let v = vals[order[k - 1]];
        values.push(v);
        tail.push(w.value(&upper));
        while k > 0 && vals[order[k - 1]] == v {
            upper.insert(order[k - 1]);
            k -= 1;
        }
    }
    values.reverse();
    tail.reverse();
    Ok(TailProfile { values, tail })
}

impl TailProfile {
    /// For {0,1}-valued capacities this is exactly the smallest value with a
    /// null strict upper set.
    pub fn integral(&self) -> f64 {
        let v = &self.values;
        if self.tail.iter().all(|&c| c == 0.0 || c == 1.0) {
            let k = self.tail.iter().position(|&c| c == 0.0).unwrap_or(v.len() - 1);
            return v[k];
        }
        let mut acc = v[0];
        for k in 1..v.len() {
            acc += (v[k] - v[k - 1]) * self.tail[k - 1];
        }
        acc
    }

    /// Smallest value whose strict upper set passes the threshold test.
    pub fn threshold_value(&self, threshold: f64, side: Side) -> f64 {
        let pass = |c: f64| match side {
            Side::Left => c <= threshold + TIE_EPS,
            Side::Right => c < threshold - TIE_EPS,
        };
        let k = self
            .tail
            .iter()
            .position(|&c| pass(c))
            .unwrap_or(self.values.len() - 1);
        self.values[k]
    }

    /// `(1/alpha) ∫_0^alpha VaR_t dt` over the exact step curve.
    pub fn var_average(&self, alpha: f64) -> f64 {
        let mut acc = 0.0;
        let mut upper = alpha;
        for (k, &x) in self.values.iter().enumerate() {
            let lower = self.tail[k].min(alpha);
            if upper > lower {
                acc += x * (upper - lower);
            }
            upper = upper.min(lower);
        }
        acc / alpha
    }
}

/// `∫ X dw` by the sorted-value telescoping sum.
pub fn choquet_integral(w: &Capacity, x: &SimpleRandomVariable) -> Result<f64> {
    Ok(tail_profile(w, x)?.integral())
}

fn check_quantile_level(alpha: f64, side: Side) -> Result<()> {
    let ok = match side {
        Side::Left => alpha > 0.0 && alpha <= 1.0,
        Side::Right => (0.0..1.0).contains(&alpha),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

/// Left (`inf{x : w(X >= x) <= 1 - alpha}`) or right
/// (`inf{x : w(X >= x) < 1 - alpha}`) Choquet quantile.
pub fn quantile(w: &Capacity, alpha: f64, side: Side, x: &SimpleRandomVariable) -> Result<f64> {
    check_quantile_level(alpha, side)?;
    Ok(tail_profile(w, x)?.threshold_value(1.0 - alpha, side))
}

/// `VaR_alpha = Q_{1 - alpha}`; the threshold is `alpha` itself.
pub fn var(w: &Capacity, alpha: f64, side: Side, x: &SimpleRandomVariable) -> Result<f64> {
    let ok = match side {
        Side::Left => (0.0..1.0).contains(&alpha),
        Side::Right => alpha > 0.0 && alpha <= 1.0,
    };
    if !ok {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    Ok(tail_profile(w, x)?.threshold_value(alpha, side))
}

/// The step function `alpha -> Q_alpha(X)`.
///
/// Step `k` takes value `x_k` on `(1 - c_{k-1}, 1 - c_k]` for the left curve
/// and on `[1 - c_{k-1}, 1 - c_k)` for the right curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileCurve {
    pub side: Side,
    pub values: Vec<f64>,
    tail: Vec<f64>,
}

pub fn quantile_curve(w: &Capacity, x: &SimpleRandomVariable, side: Side) -> Result<QuantileCurve> {
    let p = tail_profile(w, x)?;
    Ok(QuantileCurve {
        side,
        values: p.values,
        tail: p.tail,
    })
}

impl QuantileCurve {
    /// Levels `1 - c_k` at which the curve jumps, in increasing order.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.tail[..self.tail.len() - 1]
            .iter()
            .map(|c| 1.0 - c)
            .filter(|&a| a > 0.0 && a < 1.0)
            .collect();
        b.dedup();
        b
    }

    pub fn eval(&self, alpha: f64) -> Result<f64> {
        check_quantile_level(alpha, self.side)?;
        let p = TailProfile {
            values: self.values.clone(),
            tail: self.tail.clone(),
        };
        Ok(p.threshold_value(1.0 - alpha, self.side))
    }

    /// `∫_0^1 Q_alpha dalpha`.
    pub fn integral(&self) -> f64 {
        let mut acc = 0.0;
        let mut prev = 1.0;
        for (x, &c) in self.values.iter().zip(&self.tail) {
            acc += x * (prev - c);
            prev = c;
        }
        acc
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{ProbabilityVector, SupProbability};

    fn uniform4() -> Capacity {
        ProbabilityVector::uniform(4).into()
    }

    fn sup_b() -> Capacity {
        SupProbability::new(vec![
            ProbabilityVector::new(vec![0.5, 0.3, 0.2]).unwrap(),
            ProbabilityVector::new(vec![0.2, 0.3, 0.5]).unwrap(),
        ])
        .unwrap()
        .into()
    }

    fn rv(v: &[f64]) -> SimpleRandomVariable {
        SimpleRandomVariable::new(v.to_vec()).unwrap()
    }

    /// Layer-cake integral by midpoint quadrature of `w(X >= t)`.
    fn layer_cake(w: &Capacity, x: &SimpleRandomVariable, steps: usize) -> f64 {
        let (lo, hi) = (x.min().min(0.0), x.max().max(0.0));
        let h = (hi - lo) / steps as f64;
        let mut acc = 0.0;
        for s in 0..steps {
            let t = lo + (s as f64 + 0.5) * h;
            let g = w.value(&x.at_least(t));
            acc += if t < 0.0 { g - 1.0 } else { g } * h;
        }
        acc
    }

    #[test]
    fn integral_examples() {
        let w = sup_b();
        let x = rv(&[1.0, 2.0, 3.0]);
        let i = choquet_integral(&w, &x).unwrap();
        assert!((i - 2.3).abs() < 1e-12);
        assert!((layer_cake(&w, &x, 30_000) - 2.3).abs() < 1e-9);
        assert_eq!(choquet_integral(&w, &SimpleRandomVariable::constant(3, -4.5)).unwrap(), -4.5);
        let a = Event::from_atoms(3, [0, 2]).unwrap();
        let ind = SimpleRandomVariable::indicator(&a);
        assert_eq!(choquet_integral(&w, &ind).unwrap(), w.value(&a));
    }

    #[test]
    fn quantile_examples() {
        let x = rv(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(quantile(&uniform4(), 0.5, Side::Left, &x).unwrap(), 2.0);
        assert_eq!(quantile(&uniform4(), 0.5, Side::Right, &x).unwrap(), 3.0);
        let y = rv(&[1.0, 2.0, 3.0]);
        assert_eq!(quantile(&sup_b(), 0.5, Side::Left, &y).unwrap(), 2.0);
        // 1 - alpha = 0.4 < w({3}) = 0.5 pushes the quantile to the top value
        assert_eq!(quantile(&sup_b(), 0.6, Side::Left, &y).unwrap(), 3.0);
        assert_eq!(quantile(&sup_b(), 0.4, Side::Left, &y).unwrap(), 2.0);
        assert!(quantile(&uniform4(), 0.0, Side::Left, &x).is_err());
        assert!(quantile(&uniform4(), 1.0, Side::Right, &x).is_err());
    }

    #[test]
    fn var_examples() {
        let x = rv(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(var(&uniform4(), 0.5, Side::Left, &x).unwrap(), 2.0);
        let shifted = x.map(|v| v + 7.0).unwrap();
        assert_eq!(var(&uniform4(), 0.3, Side::Left, &shifted).unwrap(), var(&uniform4(), 0.3, Side::Left, &x).unwrap() + 7.0);
        let y = rv(&[1.0, 2.0, 3.0]);
        assert_eq!(var(&sup_b(), 0.5, Side::Left, &y).unwrap(), 2.0);
        assert_eq!(var(&sup_b(), 0.4, Side::Left, &y).unwrap(), 3.0);
    }

    #[test]
    fn quantile_at_full_level_is_max_for_positive_capacity() {
        let x = rv(&[5.0, 1.0, 3.0, 2.0]);
        assert_eq!(quantile(&uniform4(), 1.0, Side::Left, &x).unwrap(), 5.0);
    }

    #[test]
    fn uniform_curve_steps() {
        let x = rv(&[1.0, 2.0, 3.0, 4.0]);
        let c = quantile_curve(&uniform4(), &x, Side::Left).unwrap();
        for k in 1..=4 {
            let lo = (k - 1) as f64 / 4.0;
            let hi = k as f64 / 4.0;
            for a in [lo + 1e-6, (lo + hi) / 2.0, hi] {
                assert_eq!(c.eval(a).unwrap(), k as f64, "alpha {a}");
            }
        }
        assert_eq!(c.breakpoints(), vec![0.25, 0.5, 0.75]);
        assert!((c.integral() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn constant_curve_is_single_step() {
        let x = SimpleRandomVariable::constant(3, 1.5);
        let c = quantile_curve(&sup_b(), &x, Side::Right).unwrap();
        assert_eq!(c.values, vec![1.5]);
        assert!(c.breakpoints().is_empty());
        assert_eq!(c.eval(0.0).unwrap(), 1.5);
        assert_eq!(c.eval(0.99).unwrap(), 1.5);
    }

    #[test]
    fn curve_integral_matches_choquet_integral() {
        let w = sup_b();
        let x = rv(&[0.3, -1.0, 2.5]);
        let c = quantile_curve(&w, &x, Side::Left).unwrap();
        assert!((c.integral() - choquet_integral(&w, &x).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn space_mismatch() {
        assert!(matches!(
            choquet_integral(&uniform4(), &rv(&[1.0])),
            Err(Error::SpaceMismatch { .. })
        ));
    }
}
