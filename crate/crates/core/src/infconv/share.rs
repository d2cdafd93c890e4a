//! Risk sharing among VaR agents with finitely many priors.

use crate::capacity::{Capacity, DistortedProbability, ProbabilityVector, SupProbability, TIE_EPS};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::rv::{IncreasingMap, SimpleRandomVariable};
use crate::space::{Event, FiniteSpace};

use super::cover::CoverProblem;
use super::{threshold_search, AgentSpec, Certificate, Composition, MeasureKind, SharingResult, SubAtom};

pub const DEFAULT_NODE_BUDGET: u64 = 2_000_000;

/// Tolerance on `Σ_i ρ_i(X_i*) = x*`, relative to `max(1, |x*|)`.
const TOTAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShareOptions {
    /// Node limit for each whole-atom assignment search.
    pub node_budget: u64,
    /// Test every threshold and check the single transition.
    pub linear_scan: bool,
    /// Use `X_i = (X - y) 1_{A_i} + y/n` with this `y <= x*`.
    pub y_shift: Option<f64>,
    /// Whole-atom mode: thresholds whose search exhausts the budget are
    /// skipped instead of failing, and the result records the smallest
    /// one as `lower_bound`.
    pub allow_gap: bool,
}

impl Default for ShareOptions {
    fn default() -> Self {
        Self {
            node_budget: DEFAULT_NODE_BUDGET,
            linear_scan: false,
            y_shift: None,
            allow_gap: false,
        }
    }
}

/// Prior masses and effective levels. A distorted agent `g ∘ Q` at level
/// `alpha` is the probability agent `Q` at level `g^{-1}(alpha)`.
pub(crate) fn cover_problem(agents: &[AgentSpec], x: &SimpleRandomVariable) -> Result<CoverProblem> {
    if agents.is_empty() {
        return Err(Error::EmptyList);
    }
    let mut priors = Vec::with_capacity(agents.len());
    let mut levels = Vec::with_capacity(agents.len());
    for (i, a) in agents.iter().enumerate() {
        if a.kind != MeasureKind::VaR {
            return Err(Error::UnsupportedMeasure(i));
        }
        if a.capacity.atoms() != x.atoms() {
            return Err(Error::SpaceMismatch {
                expected: x.atoms(),
                found: a.capacity.atoms(),
            });
        }
        let (p, level) = match &a.capacity {
            Capacity::Distorted(d) => (vec![d.base().weights().to_vec()], d.distortion().inverse(a.alpha)),
            w => {
                let s = w.as_sup_probability().ok_or(Error::NotSupProbability(i))?;
                (s.members().iter().map(|p| p.weights().to_vec()).collect(), a.alpha)
            }
        };
        priors.push(p);
        levels.push(level);
    }
    Ok(CoverProblem { priors, levels })
}

fn tail_of(x: &SimpleRandomVariable, value: ExtendedReal) -> Vec<usize> {
    match value {
        ExtendedReal::Finite(v) => x.tail(v).to_vec(),
        ExtendedReal::NegativeInfinity => (0..x.atoms()).collect(),
    }
}

/// Fractional sharing: atoms of the tail may be split between agents.
///
/// Requires reference weights `μ` on the space; every prior must vanish
/// where `μ` does.
pub fn share_atomless(agents: &[AgentSpec], x: &SimpleRandomVariable, space: &FiniteSpace) -> Result<SharingResult> {
    share_atomless_with(agents, x, space, ShareOptions::default())
}

pub fn share_atomless_with(
    agents: &[AgentSpec],
    x: &SimpleRandomVariable,
    space: &FiniteSpace,
    opts: ShareOptions,
) -> Result<SharingResult> {
    if space.atoms() != x.atoms() {
        return Err(Error::SpaceMismatch {
            expected: space.atoms(),
            found: x.atoms(),
        });
    }
    let mu = space.ref_weights().ok_or(Error::MissingRefWeights)?;
    let cover = cover_problem(agents, x)?;
    for (i, priors) in cover.priors.iter().enumerate() {
        for (k, q) in priors.iter().enumerate() {
            if let Some(j) = (0..mu.len()).find(|&j| mu[j] == 0.0 && q[j] > 0.0) {
                return Err(Error::NotAbsolutelyContinuous {
                    agent: i,
                    prior: k,
                    atom: j,
                });
            }
        }
    }
    let n = agents.len();
    let m = x.atoms();
    let to_full = |atoms: &[usize], s: Vec<Vec<f64>>| {
        let mut full = vec![vec![0.0; m]; n];
        full[0] = vec![1.0; m];
        for (pos, &j) in atoms.iter().enumerate() {
            let total: f64 = (0..n).map(|i| s[i][pos]).sum();
            for i in 0..n {
                full[i][j] = s[i][pos] / total;
            }
        }
        Composition::Fractional(full)
    };
    let levels: Vec<ExtendedReal> = std::iter::once(ExtendedReal::NegativeInfinity)
        .chain(x.distinct_sorted().into_iter().map(ExtendedReal::Finite))
        .collect();
    let (k, (atoms, s)) = threshold_search(&levels, opts.linear_scan, |&v, _| {
        let atoms = tail_of(x, v);
        Ok(cover.fractional(&atoms)?.map(|s| (atoms, s)))
    })?;
    finish(agents, x, levels[k], to_full(&atoms, s), opts.y_shift)
}

/// Whole-atom sharing: each atom goes to exactly one agent.
pub fn share_discrete(agents: &[AgentSpec], x: &SimpleRandomVariable) -> Result<SharingResult> {
    share_discrete_with(agents, x, ShareOptions::default())
}

/// Thresholds are `-inf` followed by the values of `X`. A whole-atom
/// split is in particular a fractional one, so the search starts at the
/// fractional boundary (found by bisection) and moves up one threshold at
/// a time.
pub fn share_discrete_with(agents: &[AgentSpec], x: &SimpleRandomVariable, opts: ShareOptions) -> Result<SharingResult> {
    let cover = cover_problem(agents, x)?;
    let m = x.atoms();
    let to_full = |atoms: &[usize], a: Vec<usize>| {
        let mut full = vec![0; m];
        for (&j, i) in atoms.iter().zip(a) {
            full[j] = i;
        }
        Composition::Atomic(full)
    };
    let levels: Vec<ExtendedReal> = std::iter::once(ExtendedReal::NegativeInfinity)
        .chain(x.distinct_sorted().into_iter().map(ExtendedReal::Finite))
        .collect();
    let tail = |k: usize| tail_of(x, levels[k]);

    if opts.linear_scan {
        let (k, (atoms, a)) = threshold_search(&levels, true, |_, k| {
            let atoms = tail(k);
            Ok(cover.atomic(&atoms, opts.node_budget)?.map(|a| (atoms, a)))
        })?;
        return finish(agents, x, levels[k], to_full(&atoms, a), opts.y_shift);
    }
    let (start, _) = threshold_search(&levels, false, |_, k| Ok(cover.fractional(&tail(k))?.map(|_| ())))?;
    let mut lower = start;
    for k in start..levels.len() {
        let atoms = tail(k);
        match cover.atomic(&atoms, opts.node_budget) {
            Ok(Some(a)) => {
                let mut res = finish(agents, x, levels[k], to_full(&atoms, a), opts.y_shift)?;
                res.lower_bound = (lower < k).then(|| levels[lower]);
                return Ok(res);
            }
            Ok(None) if lower == k => lower = k + 1,
            Ok(None) => {}
            Err(Error::SearchBudgetExceeded(_)) if opts.allow_gap => {}
            Err(e) => return Err(e),
        }
    }
    unreachable!("the empty tail is always covered")
}

fn check_composition(comp: &Composition, n: usize, m: usize) -> Result<()> {
    if comp.atoms() != m {
        return Err(Error::SpaceMismatch {
            expected: m,
            found: comp.atoms(),
        });
    }
    match comp {
        Composition::Atomic(a) => {
            if let Some(j) = a.iter().position(|&i| i >= n) {
                return Err(Error::CoverViolation(j));
            }
        }
        Composition::Fractional(s) => {
            if s.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{} share rows for {n} agents",
                    s.len()
                )));
            }
            for j in 0..m {
                let total: f64 = s.iter().map(|r| r[j]).sum();
                if (total - 1.0).abs() > 1e-9 || s.iter().any(|r| !(0.0..=1.0 + 1e-12).contains(&r[j])) {
                    return Err(Error::CoverViolation(j));
                }
            }
        }
    }
    Ok(())
}

/// The pieces allocations are defined on: one per atom for an atomic
/// composition, one per (atom, agent) with a positive share otherwise.
pub fn sub_atoms(comp: &Composition, n: usize) -> Vec<SubAtom> {
    let mut out = Vec::new();
    for j in 0..comp.atoms() {
        match comp {
            Composition::Atomic(a) => out.push(SubAtom {
                atom: j,
                agent: a[j],
                fraction: 1.0,
            }),
            Composition::Fractional(s) => {
                for (i, row) in s.iter().enumerate().take(n) {
                    if row[j] > 0.0 {
                        out.push(SubAtom {
                            atom: j,
                            agent: i,
                            fraction: row[j],
                        });
                    }
                }
            }
        }
    }
    out
}

/// `X_i = (X - y) 1_{A_i} + y/n` on the pieces of `comp`, with `y = x*` by
/// default. The last agent receives the residual so the allocations add up
/// to `X` on every piece.
pub fn build_allocation(
    x: &SimpleRandomVariable,
    x_star: f64,
    comp: &Composition,
    n: usize,
    y_shift: Option<f64>,
) -> Result<(Vec<SubAtom>, Vec<SimpleRandomVariable>)> {
    check_composition(comp, n, x.atoms())?;
    let y = y_shift.unwrap_or(x_star);
    if y > x_star {
        return Err(Error::InvalidShift {
            shift: y,
            value: x_star,
        });
    }
    if y < x_star {
        // pieces below the threshold carry X - y > 0 unless agent 1 holds them
        if let Some(j) = (0..x.atoms()).find(|&j| x.values()[j] <= x_star && comp.share(0, j) != 1.0) {
            return Err(Error::CoverViolation(j));
        }
    }
    let subs = sub_atoms(comp, n);
    let lump = y / n as f64;
    let xs = x.values();
    let mut alloc = vec![vec![lump; subs.len()]; n];
    for (s, sub) in subs.iter().enumerate() {
        alloc[sub.agent][s] += xs[sub.atom] - y;
        let others: f64 = alloc[..n - 1].iter().map(|a| a[s]).sum();
        alloc[n - 1][s] = xs[sub.atom] - others;
    }
    let alloc = alloc
        .into_iter()
        .map(SimpleRandomVariable::new)
        .collect::<Result<Vec<_>>>()?;
    Ok((subs, alloc))
}

/// Moves a capacity on atoms to the pieces: piece `(j, f)` gets mass
/// `f q_j` under every prior.
pub(crate) fn lift_capacity(w: &Capacity, subs: &[SubAtom]) -> Result<Capacity> {
    if subs.len() == w.atoms() && subs.iter().enumerate().all(|(s, p)| p.atom == s && p.fraction == 1.0) {
        return Ok(w.clone());
    }
    let lift = |p: &ProbabilityVector| {
        let q = p.weights();
        ProbabilityVector::new(subs.iter().map(|s| q[s.atom] * s.fraction).collect())
    };
    Ok(match w {
        Capacity::Probability(p) => Capacity::Probability(lift(p)?),
        Capacity::SupProbability(s) => Capacity::SupProbability(SupProbability::new(
            s.members().iter().map(lift).collect::<Result<_>>()?,
        )?),
        Capacity::Distorted(d) => {
            Capacity::Distorted(DistortedProbability::new(lift(d.base())?, d.distortion().clone()))
        }
        _ => {
            return Err(Error::ModeUnsupported(
                "only prior-based capacities can be split across pieces".into(),
            ))
        }
    })
}

fn lift_rv(x: &SimpleRandomVariable, subs: &[SubAtom]) -> Result<SimpleRandomVariable> {
    SimpleRandomVariable::new(subs.iter().map(|s| x.values()[s.atom]).collect())
}

/// Assembles and verifies a result: allocations, certificates, totals.
pub(crate) fn finish(
    agents: &[AgentSpec],
    x: &SimpleRandomVariable,
    value: ExtendedReal,
    composition: Composition,
    y_shift: Option<f64>,
) -> Result<SharingResult> {
    let n = agents.len();
    let tail = tail_of(x, value);
    check_composition(&composition, n, x.atoms())?;
    let lifted: Vec<Capacity> = {
        let subs = sub_atoms(&composition, n);
        agents
            .iter()
            .map(|a| lift_capacity(&a.capacity, &subs))
            .collect::<Result<_>>()?
    };
    let subs = sub_atoms(&composition, n);
    let in_tail: Vec<bool> = {
        let mut t = vec![false; x.atoms()];
        tail.iter().for_each(|&j| t[j] = true);
        t
    };
    let mut certificates = Vec::with_capacity(n);
    for (i, a) in agents.iter().enumerate() {
        let mut piece = Event::empty(subs.len());
        for (s, sub) in subs.iter().enumerate() {
            if sub.agent == i && in_tail[sub.atom] {
                piece.insert(s);
            }
        }
        let load = lifted[i].value(&piece);
        if load > a.alpha + TIE_EPS {
            return Err(Error::NumericBreakdown(format!(
                "agent {i} carries load {load} above its level {}",
                a.alpha
            )));
        }
        certificates.push(Certificate {
            agent: i,
            load,
            alpha: a.alpha,
        });
    }
    let share = x.map(|v| v / n as f64)?;
    let initial = agents.iter().map(|a| a.risk(&share)).sum::<Result<f64>>()?;

    let ExtendedReal::Finite(x_star) = value else {
        return Ok(SharingResult {
            value,
            composition,
            tail,
            sub_atoms: subs,
            allocations: Vec::new(),
            certificates,
            initial,
            post: None,
            reduction: None,
            y_shift: None,
            lower_bound: None,
        });
    };
    let (subs, allocations) = build_allocation(x, x_star, &composition, n, y_shift)?;
    let mut post = 0.0;
    for (i, a) in agents.iter().enumerate() {
        let spec = AgentSpec {
            capacity: lifted[i].clone(),
            ..a.clone()
        };
        post += spec.risk(&allocations[i])?;
    }
    if (post - x_star).abs() > TOTAL_TOL * x_star.abs().max(1.0) {
        return Err(Error::NumericBreakdown(format!(
            "allocations total {post}, expected {x_star}"
        )));
    }
    let total = lift_rv(x, &subs)?;
    for s in 0..subs.len() {
        let sum: f64 = allocations.iter().map(|a| a.values()[s]).sum();
        if (sum - total.values()[s]).abs() > 1e-12 * total.values()[s].abs().max(1.0) {
            return Err(Error::CoverViolation(subs[s].atom));
        }
    }
    let reduction = (initial > 0.0).then(|| 1.0 - post / initial);
    Ok(SharingResult {
        value,
        composition,
        tail,
        sub_atoms: subs,
        allocations,
        certificates,
        initial,
        post: Some(post),
        reduction,
        y_shift,
        lower_bound: None,
    })
}

/// The sharing result for `φ(X)` from one for `X`: value `φ(x*)`, the same
/// composition, and allocations rebuilt around `φ(x*)`.
pub fn transform_result(
    res: &SharingResult,
    phi: &IncreasingMap,
    x: &SimpleRandomVariable,
    agents: &[AgentSpec],
) -> Result<SharingResult> {
    let y = phi.apply_rv(x);
    let value = res.value.map(|v| phi.apply(v));
    let shift = res.y_shift.map(|s| phi.apply(s));
    let mut out = finish(agents, &y, value, res.composition.clone(), shift)?;
    out.lower_bound = res.lower_bound.map(|v| v.map(|v| phi.apply(v)));
    Ok(out)
}
