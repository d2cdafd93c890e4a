//! Inf-convolution of Choquet quantiles and risk sharing.
//!
//! For binary capacities `v_1, ..., v_n` the inf-convolution of the `I_{v_i}`
//! is `I_v`, where the null events of `v` are the unions `A_1 ∪ ... ∪ A_n` of
//! null events of the `v_i`. Its value at `X` is the smallest `x` with
//! `{X > x}` null for `v`, and `X_i = (X - x) 1_{A_i} + x/n` is optimal for
//! any such decomposition of the tail.

mod cover;
mod rearrange;
mod report;
mod share;

pub use rearrange::tail_rearrange;
pub use report::{allocation_csv, SCHEMA_VERSION};
pub use share::{
    build_allocation, share_atomless, share_atomless_with, share_discrete, share_discrete_with, transform_result,
    ShareOptions, DEFAULT_NODE_BUDGET,
};

use serde::{Deserialize, Serialize};

use crate::capacity::{BinaryCapacity, Capacity, Side};
use crate::choquet::var;
use crate::error::{Error, Result};
use crate::es::{choquet_es, EsMethod};
use crate::extended::ExtendedReal;
use crate::rv::SimpleRandomVariable;
use crate::space::Event;

use cover::CoverProblem;

/// Largest space for the generic membership search.
pub const MAX_GENERIC_ATOMS: usize = 12;
/// Limits of the exhaustive oracle.
pub const MAX_ORACLE_ATOMS: usize = 8;
pub const MAX_ORACLE_AGENTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    VaR,
    Es,
}

/// One agent: a capacity, a level `alpha` in `(0, 1)` and a risk measure.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpec {
    pub name: String,
    pub capacity: Capacity,
    pub alpha: f64,
    pub kind: MeasureKind,
}

impl AgentSpec {
    pub fn new(name: impl Into<String>, capacity: Capacity, alpha: f64, kind: MeasureKind) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        Ok(Self {
            name: name.into(),
            capacity,
            alpha,
            kind,
        })
    }

    pub fn var(name: impl Into<String>, capacity: Capacity, alpha: f64) -> Result<Self> {
        Self::new(name, capacity, alpha, MeasureKind::VaR)
    }

    /// `VaR^w_alpha(Y)` (left) or `ES^w_alpha(Y)`.
    pub fn risk(&self, y: &SimpleRandomVariable) -> Result<f64> {
        match self.kind {
            MeasureKind::VaR => var(&self.capacity, self.alpha, Side::Left, y),
            MeasureKind::Es => choquet_es(&self.capacity, self.alpha, y, EsMethod::ScaledCapacity),
        }
    }

    /// The binary capacity `1{w > alpha}` whose Choquet integral is `VaR^w_alpha`.
    pub fn binary(&self) -> Result<BinaryCapacity> {
        BinaryCapacity::threshold(self.capacity.clone(), self.alpha, Side::Left)
    }
}

/// An ordered cover of the space by the agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Composition {
    /// Agent index per atom.
    Atomic(Vec<usize>),
    /// `s[i][j]`: share of atom `j` held by agent `i`; columns sum to one.
    Fractional(Vec<Vec<f64>>),
}

impl Composition {
    pub fn atoms(&self) -> usize {
        match self {
            Composition::Atomic(a) => a.len(),
            Composition::Fractional(s) => s.first().map_or(0, Vec::len),
        }
    }

    /// Share of atom `j` held by agent `i`.
    pub fn share(&self, i: usize, j: usize) -> f64 {
        match self {
            Composition::Atomic(a) => {
                if a[j] == i {
                    1.0
                } else {
                    0.0
                }
            }
            Composition::Fractional(s) => s[i][j],
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Composition::Atomic(_))
    }

    /// Atomic composition with every atom's share on one agent.
    pub fn to_atomic(&self) -> Option<Vec<usize>> {
        match self {
            Composition::Atomic(a) => Some(a.clone()),
            Composition::Fractional(s) => (0..self.atoms())
                .map(|j| (0..s.len()).find(|&i| s[i][j] == 1.0))
                .collect(),
        }
    }
}

/// A piece of an atom held by one agent; allocations are vectors over these.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubAtom {
    pub atom: usize,
    pub agent: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub agent: usize,
    /// Capacity of the agent's piece of the tail.
    pub load: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharingResult {
    pub value: ExtendedReal,
    pub composition: Composition,
    /// Atoms of `{X > x*}` (all atoms when the value is `-inf`).
    pub tail: Vec<usize>,
    pub sub_atoms: Vec<SubAtom>,
    /// `X_i*` per agent, indexed by `sub_atoms`; empty when the value is `-inf`.
    pub allocations: Vec<SimpleRandomVariable>,
    pub certificates: Vec<Certificate>,
    /// `Σ_i ρ_i(X/n)`.
    pub initial: f64,
    /// `Σ_i ρ_i(X_i*)`, recomputed from the allocations.
    pub post: Option<f64>,
    pub reduction: Option<f64>,
    pub y_shift: Option<f64>,
    /// Smallest threshold the whole-atom search could not refute when it
    /// ran out of budget below `value`; `None` when `value` is optimal.
    pub lower_bound: Option<ExtendedReal>,
}

/// Outcome of a null-set membership query.
#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub member: bool,
    /// `A_i` per agent with `A = ∪ A_i` and each `A_i` null for `v_i`.
    pub witness: Option<Vec<Event>>,
}

/// Priors and level when `v` is `1{sup_Q Q > a}` for finitely many `Q`.
fn prior_threshold(v: &BinaryCapacity) -> Option<(Vec<Vec<f64>>, f64)> {
    let BinaryCapacity::Threshold {
        base,
        level,
        side: Side::Left,
    } = v
    else {
        return None;
    };
    match base.as_ref() {
        Capacity::Distorted(d) => Some((vec![d.base().weights().to_vec()], d.distortion().inverse(*level))),
        w => w
            .as_sup_probability()
            .map(|s| (s.members().iter().map(|p| p.weights().to_vec()).collect(), *level)),
    }
}

fn check_agents_space(vs: &[BinaryCapacity], m: usize) -> Result<()> {
    if vs.is_empty() {
        return Err(Error::EmptyList);
    }
    if let Some(v) = vs.iter().find(|v| v.atoms() != m) {
        return Err(Error::SpaceMismatch {
            expected: m,
            found: v.atoms(),
        });
    }
    Ok(())
}

/// Whether `a` is a union of null events of the `vs`, with a witness.
///
/// Thresholds over finitely many priors (possibly distorted) use the prior
/// load search on any space size; other capacities use an exhaustive
/// colouring of `a`'s atoms, limited to [`MAX_GENERIC_ATOMS`].
pub fn infconv_null_member(vs: &[BinaryCapacity], a: &Event) -> Result<Membership> {
    check_agents_space(vs, a.space_atoms())?;
    member_with_budget(vs, a, DEFAULT_NODE_BUDGET)
}

fn member_with_budget(vs: &[BinaryCapacity], a: &Event, budget: u64) -> Result<Membership> {
    let m = a.space_atoms();
    let n = vs.len();
    let atoms = a.to_vec();
    let structured: Option<Vec<_>> = vs.iter().map(prior_threshold).collect();
    let colours = match structured {
        Some(list) => {
            let (priors, levels) = list.into_iter().unzip();
            CoverProblem { priors, levels }.atomic(&atoms, budget)?
        }
        None => {
            if m > MAX_GENERIC_ATOMS {
                return Err(Error::SpaceTooLarge {
                    m,
                    max: MAX_GENERIC_ATOMS,
                });
            }
            let mut sets = vec![Event::empty(m); n];
            colour(vs, &atoms, &mut sets).then(|| {
                atoms
                    .iter()
                    .map(|&j| sets.iter().position(|s| s.contains(j)).unwrap())
                    .collect()
            })
        }
    };
    Ok(match colours {
        Some(c) => {
            let mut sets = vec![Event::empty(m); n];
            for (&j, &i) in atoms.iter().zip(&c) {
                sets[i].insert(j);
            }
            Membership {
                member: true,
                witness: Some(sets),
            }
        }
        None => Membership {
            member: false,
            witness: None,
        },
    })
}

fn colour(vs: &[BinaryCapacity], rest: &[usize], sets: &mut [Event]) -> bool {
    let Some((&j, tail)) = rest.split_first() else {
        return true;
    };
    for i in 0..vs.len() {
        sets[i].insert(j);
        if vs[i].is_null(&sets[i]) && colour(vs, tail, sets) {
            return true;
        }
        sets[i].remove(j);
    }
    false
}

/// Result of a threshold search: the value and a decomposition of its tail.
#[derive(Debug, Clone, PartialEq)]
pub struct InfconvSolution {
    pub value: ExtendedReal,
    pub witness: Vec<Event>,
}

/// `inf { x : {X > x} is null for v }`, with `-inf` when `Ω` itself is null.
pub fn infconv_value(vs: &[BinaryCapacity], x: &SimpleRandomVariable) -> Result<ExtendedReal> {
    Ok(infconv_solve(vs, x, false)?.value)
}

/// As [`infconv_value`], also returning the decomposition. With `linear_scan`
/// every threshold is tested and the feasibility pattern must be a single
/// false-to-true transition.
pub fn infconv_solve(vs: &[BinaryCapacity], x: &SimpleRandomVariable, linear_scan: bool) -> Result<InfconvSolution> {
    let m = x.atoms();
    check_agents_space(vs, m)?;
    let test = |e: &Event| member_with_budget(vs, e, DEFAULT_NODE_BUDGET);
    let full = test(&Event::full(m))?;
    if full.member {
        return Ok(InfconvSolution {
            value: ExtendedReal::NegativeInfinity,
            witness: full.witness.unwrap(),
        });
    }
    let values = x.distinct_sorted();
    let (k, witness) = threshold_search(&values, linear_scan, |&v, _| {
        let r = test(&x.tail(v))?;
        Ok(r.witness)
    })?;
    Ok(InfconvSolution {
        value: ExtendedReal::Finite(values[k]),
        witness,
    })
}

/// Smallest index whose test yields a witness. The top value always passes.
pub(crate) fn threshold_search<T, W>(
    values: &[T],
    linear_scan: bool,
    mut test: impl FnMut(&T, usize) -> Result<Option<W>>,
) -> Result<(usize, W)> {
    let last = values.len() - 1;
    if linear_scan {
        let mut pattern = Vec::with_capacity(values.len());
        for (k, v) in values.iter().enumerate() {
            pattern.push(test(v, k)?);
        }
        let first = pattern.iter().position(Option::is_some).unwrap_or(last);
        if pattern[first..].iter().any(Option::is_none) {
            return Err(Error::NumericBreakdown(
                "threshold feasibility is not monotone".into(),
            ));
        }
        let w = pattern.swap_remove(first).expect("top threshold has an empty tail");
        return Ok((first, w));
    }
    let mut hi = last;
    let mut best = test(&values[last], last)?.expect("top threshold has an empty tail");
    let mut lo = 0;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match test(&values[mid], mid)? {
            Some(w) => {
                hi = mid;
                best = w;
            }
            None => lo = mid + 1,
        }
    }
    Ok((hi, best))
}

/// Exhaustive oracle outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForce {
    pub value: ExtendedReal,
    /// Agent per atom of the best colouring.
    pub colouring: Vec<usize>,
    /// The `y` attaining the minimum (absent for `-inf`).
    pub y: Option<f64>,
}

/// `I_v(Y)` for a {0,1} table: the smallest value of `Y` whose strict upper
/// set is null.
fn integral_from_table(table: &[f64], order: &[usize], y: &[f64]) -> f64 {
    // order sorts atoms by y ascending; masks[k] is the set strictly above
    // the k-th smallest atom
    let m = order.len();
    let mut above = 0usize;
    let mut best = y[order[m - 1]];
    let mut k = m;
    while k > 0 {
        let v = y[order[k - 1]];
        if table[above] != 0.0 {
            break;
        }
        best = v;
        while k > 0 && y[order[k - 1]] == v {
            above |= 1 << order[k - 1];
            k -= 1;
        }
    }
    best
}

/// Minimum of `Σ_i I_{v_i}((X - y) 1_{A_i} + y/n)` over every colouring of
/// the atoms and every `y` among the values of `X`.
///
/// Returns `-inf` when some colouring makes every `A_i` null, since the total
/// then falls without bound as `y` decreases.
pub fn brute_force_infconv(vs: &[BinaryCapacity], x: &SimpleRandomVariable) -> Result<BruteForce> {
    let m = x.atoms();
    let n = vs.len();
    check_agents_space(vs, m)?;
    if m > MAX_ORACLE_ATOMS || n > MAX_ORACLE_AGENTS {
        return Err(Error::SpaceTooLarge {
            m: m.max(n),
            max: MAX_ORACLE_ATOMS,
        });
    }
    let tables: Vec<Vec<f64>> = vs
        .iter()
        .map(|v| Capacity::Binary(v.clone()).tabulate())
        .collect::<Result<_>>()?;
    let values = x.distinct_sorted();
    let xs = x.values();
    let total = n.pow(m as u32);
    let mut best = BruteForce {
        value: ExtendedReal::Finite(f64::INFINITY),
        colouring: vec![0; m],
        y: None,
    };
    let mut colouring = vec![0usize; m];
    let mut yi = vec![0.0; m];
    for code in 0..total {
        let mut c = code;
        let mut masks = vec![0usize; n];
        for j in 0..m {
            colouring[j] = c % n;
            c /= n;
            masks[colouring[j]] |= 1 << j;
        }
        if (0..n).all(|i| tables[i][masks[i]] == 0.0) {
            return Ok(BruteForce {
                value: ExtendedReal::NegativeInfinity,
                colouring,
                y: None,
            });
        }
        for &y in &values {
            let mut sum = 0.0;
            for i in 0..n {
                for j in 0..m {
                    yi[j] = if colouring[j] == i { xs[j] - y } else { 0.0 };
                }
                let mut order: Vec<usize> = (0..m).collect();
                order.sort_by(|&a, &b| yi[a].total_cmp(&yi[b]));
                sum += integral_from_table(&tables[i], &order, &yi);
            }
            // the y/n lumps add up to y by translation invariance
            sum += y;
            if sum < best.value.to_f64() {
                best = BruteForce {
                    value: ExtendedReal::Finite(sum),
                    colouring: colouring.clone(),
                    y: Some(y),
                };
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{binary_from_level, ProbabilityVector};

    fn quarter_agents(alpha: f64, n: usize) -> Vec<BinaryCapacity> {
        let p: Capacity = ProbabilityVector::uniform(4).into();
        (0..n)
            .map(|_| BinaryCapacity::threshold(p.clone(), alpha, Side::Left).unwrap())
            .collect()
    }

    fn ev(atoms: &[usize]) -> Event {
        Event::from_atoms(4, atoms.iter().map(|a| a - 1)).unwrap()
    }

    fn x1234() -> SimpleRandomVariable {
        SimpleRandomVariable::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap()
    }

    #[test]
    fn membership_examples() {
        let vs = quarter_agents(0.25, 2);
        let r = infconv_null_member(&vs, &ev(&[])).unwrap();
        assert!(r.member);
        assert!(r.witness.unwrap().iter().all(Event::is_empty));

        let r = infconv_null_member(&vs, &ev(&[3, 4])).unwrap();
        assert!(r.member);
        let w = r.witness.unwrap();
        assert_eq!(w[0].len(), 1);
        assert_eq!(w[0].union(&w[1]), ev(&[3, 4]));

        assert!(!infconv_null_member(&vs, &ev(&[2, 3, 4])).unwrap().member);
    }

    #[test]
    fn generic_path_agrees_with_prior_path() {
        // right-side thresholds force the exhaustive colouring
        let p: Capacity = ProbabilityVector::uniform(4).into();
        let generic = vec![binary_from_level(&p, 0.74, Side::Right).unwrap(); 2];
        let prior = quarter_agents(0.25, 2);
        for mask in 0..16 {
            let e = Event::from_mask(4, mask).unwrap();
            assert_eq!(
                infconv_null_member(&generic, &e).unwrap().member,
                infconv_null_member(&prior, &e).unwrap().member,
                "{e:?}"
            );
        }
    }

    #[test]
    fn single_agent_membership_is_nullity() {
        let vs = quarter_agents(0.5, 1);
        for mask in 0..16 {
            let e = Event::from_mask(4, mask).unwrap();
            assert_eq!(infconv_null_member(&vs, &e).unwrap().member, vs[0].is_null(&e));
        }
    }

    #[test]
    fn value_examples() {
        let x = x1234();
        assert_eq!(infconv_value(&quarter_agents(0.25, 2), &x).unwrap(), ExtendedReal::Finite(2.0));
        assert_eq!(infconv_value(&quarter_agents(0.5, 2), &x).unwrap(), ExtendedReal::NegativeInfinity);
        let one = quarter_agents(0.25, 1);
        let direct = crate::choquet::choquet_integral(&Capacity::Binary(one[0].clone()), &x).unwrap();
        assert_eq!(infconv_value(&one, &x).unwrap(), ExtendedReal::Finite(direct));
    }

    #[test]
    fn linear_scan_agrees() {
        let x = x1234();
        let vs = quarter_agents(0.25, 2);
        let a = infconv_solve(&vs, &x, false).unwrap();
        let b = infconv_solve(&vs, &x, true).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn brute_force_examples() {
        let x = x1234();
        let b = brute_force_infconv(&quarter_agents(0.25, 2), &x).unwrap();
        assert_eq!(b.value, ExtendedReal::Finite(2.0));
        let b = brute_force_infconv(&quarter_agents(0.5, 2), &x).unwrap();
        assert_eq!(b.value, ExtendedReal::NegativeInfinity);
        let one = quarter_agents(0.25, 1);
        let b = brute_force_infconv(&one, &x).unwrap();
        assert_eq!(b.value, ExtendedReal::Finite(3.0));
    }

    #[test]
    fn table_integral_matches_choquet() {
        let w: Capacity = ProbabilityVector::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap().into();
        let x = SimpleRandomVariable::new(vec![3.0, -1.0, 3.0, 0.5]).unwrap();
        for alpha in [0.05, 0.15, 0.35, 0.65, 0.95] {
            let v: Capacity = BinaryCapacity::threshold(w.clone(), alpha, Side::Left).unwrap().into();
            let t = v.tabulate().unwrap();
            let expect = crate::choquet::choquet_integral(&v, &x).unwrap();
            assert_eq!(integral_from_table(&t, &x.order(), x.values()), expect);
        }
    }
}
