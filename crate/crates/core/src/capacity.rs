//! Capacities: monotone set functions with `w(empty) = 0` and `w(full) = 1`.
//!
//! Every variant is immutable once built. Constructors validate their input,
//! so any `Capacity` value in hand is monotone and normalized.

use serde::{Deserialize, Serialize};

use crate::distortion::Distortion;
use crate::error::{Error, Result};
use crate::space::{check_distribution, Event, WORD_ATOMS};

/// Tie tolerance for comparing capacity values against a level.
pub const TIE_EPS: f64 = 1e-9;

/// Tolerance for boundary values, sums of weights and monotonicity.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Largest space for a tabulated [`ExplicitCapacity`].
pub const MAX_EXPLICIT_ATOMS: usize = 20;

/// Largest space for the exhaustive structural checks.
pub const MAX_STRUCTURAL_ATOMS: usize = 16;

/// Which of the two quantile conventions (strict or non-strict threshold).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combine {
    Sup,
    Inf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    p: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidProbability("no atoms".into()));
        }
        check_distribution(&p, BOUNDARY_TOL)?;
        Ok(Self { p })
    }

    pub fn uniform(m: usize) -> Self {
        Self {
            p: vec![1.0 / m as f64; m],
        }
    }

    pub fn atoms(&self) -> usize {
        self.p.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.p
    }

    pub fn mass(&self, a: &Event) -> f64 {
        a.iter().map(|j| self.p[j]).sum()
    }

    pub fn expectation(&self, x: &[f64]) -> f64 {
        self.p.iter().zip(x).map(|(p, x)| p * x).sum()
    }
}

/// Pointwise supremum of a finite ambiguity set.
#[derive(Debug, Clone, PartialEq)]
pub struct SupProbability {
    members: Vec<ProbabilityVector>,
}

impl SupProbability {
    pub fn new(members: Vec<ProbabilityVector>) -> Result<Self> {
        let first = members.first().ok_or(Error::EmptyAmbiguitySet)?;
        let m = first.atoms();
        for q in &members {
            if q.atoms() != m {
                return Err(Error::SpaceMismatch {
                    expected: m,
                    found: q.atoms(),
                });
            }
        }
        Ok(Self { members })
    }

    pub fn atoms(&self) -> usize {
        self.members[0].atoms()
    }

    pub fn members(&self) -> &[ProbabilityVector] {
        &self.members
    }

    pub fn value(&self, a: &Event) -> f64 {
        self.members
            .iter()
            .map(|q| q.mass(a))
            .fold(0.0, f64::max)
    }
}

/// `g ∘ Q` for a distortion `g` and a probability `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortedProbability {
    base: ProbabilityVector,
    g: Distortion,
}

impl DistortedProbability {
    pub fn new(base: ProbabilityVector, g: Distortion) -> Self {
        Self { base, g }
    }

    pub fn base(&self) -> &ProbabilityVector {
        &self.base
    }

    pub fn distortion(&self) -> &Distortion {
        &self.g
    }
}

/// A capacity given by its full table, indexed by event bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitCapacity {
    m: usize,
    table: Vec<f64>,
}

impl ExplicitCapacity {
    /// Validates monotonicity over all covering pairs `(A, A ∪ {j})`, then
    /// the boundary values.
    pub fn new(m: usize, table: Vec<f64>) -> Result<Self> {
        if m == 0 || m > MAX_EXPLICIT_ATOMS {
            return Err(Error::SpaceTooLarge {
                m,
                max: MAX_EXPLICIT_ATOMS,
            });
        }
        if table.len() != 1 << m {
            return Err(Error::SpaceMismatch {
                expected: 1 << m,
                found: table.len(),
            });
        }
        if let Some(k) = table.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidProbability(format!(
                "table entry {k} is not finite"
            )));
        }
        let full = (1usize << m) - 1;
        for mask in 0..=full {
            for j in 0..m {
                let up = mask | 1 << j;
                if up != mask && table[mask] > table[up] + BOUNDARY_TOL {
                    return Err(Error::NonMonotone {
                        smaller: mask_atoms(mask as u64, m),
                        larger: mask_atoms(up as u64, m),
                        lower: table[mask],
                        upper: table[up],
                    });
                }
            }
        }
        if table[0].abs() > BOUNDARY_TOL || (table[full] - 1.0).abs() > BOUNDARY_TOL {
            return Err(Error::BadBoundary {
                empty: table[0],
                full: table[full],
            });
        }
        Ok(Self { m, table })
    }

    pub fn atoms(&self) -> usize {
        self.m
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }
}

fn mask_atoms(mask: u64, m: usize) -> Vec<usize> {
    (0..m).filter(|j| mask >> j & 1 == 1).collect()
}

/// A {0,1}-valued capacity, determined by its null-set family.
#[derive(Debug, Clone, PartialEq)]
pub enum BinaryCapacity {
    /// Null events are the subsets of the listed maximal null events.
    NullSet { m: usize, maximal: Vec<Event> },
    /// Left: `v(A) = 1` iff `w(A) > level`; right: iff `w(A) >= level`.
    /// Values within [`TIE_EPS`] of `level` count as equal to it.
    Threshold {
        base: Box<Capacity>,
        level: f64,
        side: Side,
    },
}

impl BinaryCapacity {
    /// Builds the null family generated by `generators`; non-maximal
    /// generators are dropped so the stored list is an antichain.
    pub fn from_null_events(m: usize, generators: Vec<Event>) -> Result<Self> {
        let mut maximal: Vec<Event> = Vec::new();
        for e in generators {
            if e.space_atoms() != m {
                return Err(Error::SpaceMismatch {
                    expected: m,
                    found: e.space_atoms(),
                });
            }
            if e.is_full() {
                return Err(Error::InvalidNullSet(
                    "the full space cannot be a null event".into(),
                ));
            }
            if maximal.iter().any(|x| e.is_subset(x)) {
                continue;
            }
            maximal.retain(|x| !x.is_subset(&e));
            maximal.push(e);
        }
        if maximal.is_empty() {
            maximal.push(Event::empty(m));
        }
        Ok(BinaryCapacity::NullSet { m, maximal })
    }

    /// `v(A) = 1{w(A) > level}` (left) or `1{w(A) >= level}` (right).
    pub fn threshold(base: Capacity, level: f64, side: Side) -> Result<Self> {
        let ok = match side {
            Side::Left => (0.0..1.0).contains(&level),
            Side::Right => level > 0.0 && level <= 1.0,
        };
        if !ok || !level.is_finite() {
            return Err(Error::AlphaOutOfRange(level));
        }
        Ok(BinaryCapacity::Threshold {
            base: Box::new(base),
            level,
            side,
        })
    }

    pub fn atoms(&self) -> usize {
        match self {
            BinaryCapacity::NullSet { m, .. } => *m,
            BinaryCapacity::Threshold { base, .. } => base.atoms(),
        }
    }

    pub fn is_null(&self, a: &Event) -> bool {
        match self {
            BinaryCapacity::NullSet { maximal, .. } => maximal.iter().any(|x| a.is_subset(x)),
            BinaryCapacity::Threshold { base, level, side } => {
                !exceeds(base.value(a), *level, *side)
            }
        }
    }

    /// The maximal null events. Threshold variants are enumerated, so the
    /// space must be small.
    pub fn maximal_null_events(&self) -> Result<Vec<Event>> {
        match self {
            BinaryCapacity::NullSet { maximal, .. } => Ok(maximal.clone()),
            BinaryCapacity::Threshold { .. } => {
                let m = self.atoms();
                check_structural(m)?;
                let full = (1u64 << m) - 1;
                let null: Vec<bool> = (0..=full)
                    .map(|mask| self.is_null(&Event::from_mask(m, mask).unwrap()))
                    .collect();
                let mut out = Vec::new();
                for mask in 0..=full {
                    if !null[mask as usize] {
                        continue;
                    }
                    let maximal =
                        (0..m).all(|j| mask >> j & 1 == 1 || !null[(mask | 1 << j) as usize]);
                    if maximal {
                        out.push(Event::from_mask(m, mask).unwrap());
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Threshold test shared by binary capacities and quantiles.
pub(crate) fn exceeds(value: f64, level: f64, side: Side) -> bool {
    match side {
        Side::Left => value > level + TIE_EPS,
        Side::Right => value >= level - TIE_EPS,
    }
}

pub(crate) fn check_structural(m: usize) -> Result<()> {
    if m > MAX_STRUCTURAL_ATOMS {
        return Err(Error::SpaceTooLarge {
            m,
            max: MAX_STRUCTURAL_ATOMS,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Capacity {
    Probability(ProbabilityVector),
    SupProbability(SupProbability),
    Distorted(DistortedProbability),
    Explicit(ExplicitCapacity),
    Binary(BinaryCapacity),
    /// Lazy pointwise max or min of capacities on one space.
    Combined { mode: Combine, members: Vec<Capacity> },
    /// `A -> min(w(A) / alpha, 1)`.
    Scaled { base: Box<Capacity>, alpha: f64 },
}

impl From<ProbabilityVector> for Capacity {
    fn from(p: ProbabilityVector) -> Self {
        Capacity::Probability(p)
    }
}

impl From<SupProbability> for Capacity {
    fn from(p: SupProbability) -> Self {
        Capacity::SupProbability(p)
    }
}

impl From<DistortedProbability> for Capacity {
    fn from(d: DistortedProbability) -> Self {
        Capacity::Distorted(d)
    }
}

impl From<ExplicitCapacity> for Capacity {
    fn from(w: ExplicitCapacity) -> Self {
        Capacity::Explicit(w)
    }
}

impl From<BinaryCapacity> for Capacity {
    fn from(v: BinaryCapacity) -> Self {
        Capacity::Binary(v)
    }
}

impl Capacity {
    pub fn atoms(&self) -> usize {
        match self {
            Capacity::Probability(p) => p.atoms(),
            Capacity::SupProbability(s) => s.atoms(),
            Capacity::Distorted(d) => d.base.atoms(),
            Capacity::Explicit(e) => e.m,
            Capacity::Binary(b) => b.atoms(),
            Capacity::Combined { members, .. } => members[0].atoms(),
            Capacity::Scaled { base, .. } => base.atoms(),
        }
    }

    pub fn check_event(&self, a: &Event) -> Result<()> {
        if a.space_atoms() != self.atoms() {
            return Err(Error::SpaceMismatch {
                expected: self.atoms(),
                found: a.space_atoms(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, a: &Event) -> Result<f64> {
        self.check_event(a)?;
        Ok(self.value(a))
    }

    /// Evaluation without the space check; `a` must come from this space.
    pub fn value(&self, a: &Event) -> f64 {
        debug_assert_eq!(a.space_atoms(), self.atoms());
        if a.is_empty() {
            return 0.0;
        }
        match self {
            Capacity::Probability(p) => p.mass(a),
            Capacity::SupProbability(s) => s.value(a),
            Capacity::Distorted(d) => d.g.apply(d.base.mass(a)),
            Capacity::Explicit(e) => e.table[a.mask().expect("explicit spaces fit a word") as usize],
            Capacity::Binary(b) => {
                if b.is_null(a) {
                    0.0
                } else {
                    1.0
                }
            }
            Capacity::Combined { mode, members } => {
                let vals = members.iter().map(|w| w.value(a));
                match mode {
                    Combine::Sup => vals.fold(f64::NEG_INFINITY, f64::max),
                    Combine::Inf => vals.fold(f64::INFINITY, f64::min),
                }
            }
            Capacity::Scaled { base, alpha } => (base.value(a) / alpha).min(1.0),
        }
    }

    /// The values of every event, indexed by bitmask.
    pub fn tabulate(&self) -> Result<Vec<f64>> {
        let m = self.atoms();
        if m > MAX_EXPLICIT_ATOMS {
            return Err(Error::SpaceTooLarge {
                m,
                max: MAX_EXPLICIT_ATOMS,
            });
        }
        let n = 1usize << m;
        let additive = |p: &ProbabilityVector| {
            let mut t = vec![0.0; n];
            for mask in 1..n {
                let low = mask.trailing_zeros() as usize;
                t[mask] = t[mask & (mask - 1)] + p.p[low];
            }
            t
        };
        Ok(match self {
            Capacity::Probability(p) => additive(p),
            Capacity::SupProbability(s) => {
                let mut t = vec![0.0f64; n];
                for q in &s.members {
                    for (x, y) in t.iter_mut().zip(additive(q)) {
                        *x = x.max(y);
                    }
                }
                t
            }
            Capacity::Distorted(d) => additive(&d.base).into_iter().map(|x| d.g.apply(x)).collect(),
            Capacity::Explicit(e) => e.table.clone(),
            Capacity::Scaled { base, alpha } => base
                .tabulate()?
                .into_iter()
                .map(|x| (x / alpha).min(1.0))
                .collect(),
            Capacity::Combined { mode, members } => {
                let mut t = members[0].tabulate()?;
                for w in &members[1..] {
                    for (x, y) in t.iter_mut().zip(w.tabulate()?) {
                        *x = match mode {
                            Combine::Sup => x.max(y),
                            Combine::Inf => x.min(y),
                        };
                    }
                }
                t
            }
            Capacity::Binary(BinaryCapacity::Threshold { base, level, side }) => base
                .tabulate()?
                .into_iter()
                .enumerate()
                .map(|(mask, x)| {
                    if mask != 0 && exceeds(x, *level, *side) {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect(),
            Capacity::Binary(_) => (0..n as u64)
                .map(|mask| self.value(&Event::from_mask(m, mask).unwrap()))
                .collect(),
        })
    }

    pub fn as_sup_probability(&self) -> Option<SupProbability> {
        match self {
            Capacity::Probability(p) => Some(SupProbability {
                members: vec![p.clone()],
            }),
            Capacity::SupProbability(s) => Some(s.clone()),
            _ => None,
        }
    }
}

/// Lazy pointwise sup or inf of a nonempty list on one space.
pub fn combine_capacities(mode: Combine, members: Vec<Capacity>) -> Result<Capacity> {
    let m = members.first().ok_or(Error::EmptyList)?.atoms();
    if let Some(w) = members.iter().find(|w| w.atoms() != m) {
        return Err(Error::SpaceMismatch {
            expected: m,
            found: w.atoms(),
        });
    }
    Ok(Capacity::Combined { mode, members })
}

/// `A -> min(w(A)/alpha, 1)` for `alpha` in `(0, 1]`.
pub fn scale_alpha(w: &Capacity, alpha: f64) -> Result<Capacity> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    Ok(Capacity::Scaled {
        base: Box::new(w.clone()),
        alpha,
    })
}

/// `v(A) = 1{w(A) > 1 - alpha}` (left, alpha in `(0,1]`) or
/// `1{w(A) >= 1 - alpha}` (right, alpha in `[0,1)`).
pub fn binary_from_level(w: &Capacity, alpha: f64, side: Side) -> Result<BinaryCapacity> {
    let ok = match side {
        Side::Left => alpha > 0.0 && alpha <= 1.0,
        Side::Right => (0.0..1.0).contains(&alpha),
    };
    if !ok {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    BinaryCapacity::threshold(w.clone(), 1.0 - alpha, side)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubmodularityCheck {
    pub holds: bool,
    /// `(A, B)` with `w(A ∪ B) + w(A ∩ B) > w(A) + w(B)`.
    pub witness: Option<(Event, Event)>,
}

/// Exhaustive submodularity test.
///
/// Uses the local form `w(S+i) + w(S+j) >= w(S+i+j) + w(S)` over all `S` and
/// `i, j` outside `S`, which is equivalent to the inequality over all pairs.
pub fn is_submodular(w: &Capacity) -> Result<SubmodularityCheck> {
    let m = w.atoms();
    check_structural(m)?;
    let t = w.tabulate()?;
    let full = (1usize << m) - 1;
    for s in 0..=full {
        for i in 0..m {
            if s >> i & 1 == 1 {
                continue;
            }
            for j in (i + 1)..m {
                if s >> j & 1 == 1 {
                    continue;
                }
                let (si, sj, sij) = (s | 1 << i, s | 1 << j, s | 1 << i | 1 << j);
                if t[sij] + t[s] > t[si] + t[sj] + BOUNDARY_TOL {
                    return Ok(SubmodularityCheck {
                        holds: false,
                        witness: Some((
                            Event::from_mask(m, si as u64)?,
                            Event::from_mask(m, sj as u64)?,
                        )),
                    });
                }
            }
        }
    }
    Ok(SubmodularityCheck {
        holds: true,
        witness: None,
    })
}

/// Whether the null family of `v` is closed under finite unions.
///
/// A downward-closed family is union-closed exactly when the union of all its
/// members is itself null.
pub fn null_set_closed_under_union(v: &BinaryCapacity) -> Result<bool> {
    let m = v.atoms();
    check_structural(m)?;
    match v {
        BinaryCapacity::NullSet { maximal, .. } => Ok(maximal.len() == 1),
        BinaryCapacity::Threshold { .. } => {
            let mut union = Event::empty(m);
            for mask in 0..1u64 << m {
                let e = Event::from_mask(m, mask)?;
                if v.is_null(&e) {
                    union = union.union(&e);
                }
            }
            Ok(v.is_null(&union))
        }
    }
}

/// Exhaustive monotonicity check, returning the first violating covering pair.
pub fn check_monotone(w: &Capacity) -> Result<Option<(Event, Event)>> {
    let m = w.atoms();
    if m > WORD_ATOMS.min(MAX_EXPLICIT_ATOMS) {
        return Err(Error::SpaceTooLarge {
            m,
            max: MAX_EXPLICIT_ATOMS,
        });
    }
    let t = w.tabulate()?;
    for mask in 0..t.len() {
        for j in 0..m {
            let up = mask | 1 << j;
            if up != mask && t[mask] > t[up] + BOUNDARY_TOL {
                return Ok(Some((
                    Event::from_mask(m, mask as u64)?,
                    Event::from_mask(m, up as u64)?,
                )));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(p: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(p.to_vec()).unwrap()
    }

    fn ev(m: usize, atoms: &[usize]) -> Event {
        Event::from_atoms(m, atoms.iter().map(|a| a - 1)).unwrap()
    }

    fn example_sup() -> Capacity {
        SupProbability::new(vec![pv(&[0.5, 0.3, 0.2]), pv(&[0.2, 0.3, 0.5])])
            .unwrap()
            .into()
    }

    #[test]
    fn explicit_probability_table_is_valid() {
        let w = ExplicitCapacity::new(2, vec![0.0, 0.5, 0.5, 1.0]).unwrap();
        assert_eq!(w.table()[1], 0.5);
    }

    #[test]
    fn explicit_non_monotone_reports_witness() {
        let err = ExplicitCapacity::new(2, vec![0.0, 0.7, 0.5, 0.6]).unwrap_err();
        assert_eq!(
            err,
            Error::NonMonotone {
                smaller: vec![0],
                larger: vec![0, 1],
                lower: 0.7,
                upper: 0.6
            }
        );
    }

    #[test]
    fn explicit_boundary_checked() {
        assert!(matches!(
            ExplicitCapacity::new(1, vec![0.1, 1.0]),
            Err(Error::BadBoundary { .. })
        ));
    }

    #[test]
    fn sup_probability_evaluates_pointwise_max() {
        let w = example_sup();
        assert_eq!(w.eval(&ev(3, &[3])).unwrap(), 0.5);
        assert!((w.eval(&ev(3, &[1, 3])).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(w.eval(&Event::empty(3)).unwrap(), 0.0);
        assert!(matches!(
            w.eval(&Event::empty(4)),
            Err(Error::SpaceMismatch { .. })
        ));
    }

    #[test]
    fn empty_ambiguity_set_is_rejected() {
        assert_eq!(SupProbability::new(vec![]), Err(Error::EmptyAmbiguitySet));
    }

    #[test]
    fn distorted_square_on_uniform() {
        let w = Capacity::Distorted(DistortedProbability::new(
            ProbabilityVector::uniform(4),
            Distortion::power(2.0, 20).unwrap(),
        ));
        assert_eq!(w.eval(&ev(4, &[1, 2])).unwrap(), 0.25);
    }

    #[test]
    fn inf_of_two_probabilities() {
        let w = combine_capacities(
            Combine::Inf,
            vec![pv(&[0.5, 0.5]).into(), pv(&[0.25, 0.75]).into()],
        )
        .unwrap();
        assert_eq!(w.eval(&ev(2, &[1])).unwrap(), 0.25);
        assert_eq!(w.eval(&Event::full(2)).unwrap(), 1.0);
        assert_eq!(combine_capacities(Combine::Sup, vec![]), Err(Error::EmptyList));
    }

    #[test]
    fn scale_alpha_examples() {
        let p: Capacity = ProbabilityVector::uniform(4).into();
        let w = scale_alpha(&p, 0.5).unwrap();
        assert_eq!(w.eval(&ev(4, &[4])).unwrap(), 0.5);
        assert_eq!(w.eval(&ev(4, &[3, 4])).unwrap(), 1.0);
        assert!(scale_alpha(&p, 0.0).is_err());
        assert!(scale_alpha(&p, 1.5).is_err());
        let same = scale_alpha(&p, 1.0).unwrap();
        assert_eq!(same.tabulate().unwrap(), p.tabulate().unwrap());
    }

    #[test]
    fn submodularity_examples() {
        let p: Capacity = pv(&[0.1, 0.2, 0.3, 0.4]).into();
        assert!(is_submodular(&p).unwrap().holds);
        assert!(is_submodular(&scale_alpha(&p, 0.35).unwrap()).unwrap().holds);
        let v = BinaryCapacity::from_null_events(2, vec![ev(2, &[1]), ev(2, &[2])]).unwrap();
        let check = is_submodular(&v.into()).unwrap();
        assert!(!check.holds);
        assert_eq!(check.witness, Some((ev(2, &[1]), ev(2, &[2]))));
        let big: Capacity = ProbabilityVector::uniform(17).into();
        assert!(matches!(is_submodular(&big), Err(Error::SpaceTooLarge { .. })));
    }

    #[test]
    fn binary_from_level_examples() {
        let p: Capacity = ProbabilityVector::uniform(4).into();
        let left = binary_from_level(&p, 0.25, Side::Left).unwrap();
        assert!(!left.is_null(&Event::full(4)));
        assert!(left.is_null(&ev(4, &[1, 2, 3])));
        let right = binary_from_level(&p, 0.25, Side::Right).unwrap();
        assert!(!right.is_null(&ev(4, &[1, 2, 3])));
        assert!(right.is_null(&ev(4, &[1, 2])));
        let one = binary_from_level(&p, 1.0, Side::Left).unwrap();
        assert!(!one.is_null(&ev(4, &[2])));
        assert!(one.is_null(&Event::empty(4)));
        assert!(binary_from_level(&p, 0.0, Side::Left).is_err());
        assert!(binary_from_level(&p, 1.0, Side::Right).is_err());
    }

    #[test]
    fn union_closure_examples() {
        let v = BinaryCapacity::from_null_events(4, vec![ev(4, &[1, 2])]).unwrap();
        assert!(null_set_closed_under_union(&v).unwrap());
        let p: Capacity = ProbabilityVector::uniform(4).into();
        let quarter = BinaryCapacity::threshold(p, 0.25, Side::Left).unwrap();
        assert!(!null_set_closed_under_union(&quarter).unwrap());
        let trivial = BinaryCapacity::from_null_events(4, vec![]).unwrap();
        assert!(null_set_closed_under_union(&trivial).unwrap());
    }

    #[test]
    fn null_generators_reduce_to_antichain() {
        let v = BinaryCapacity::from_null_events(
            3,
            vec![ev(3, &[1]), ev(3, &[1, 2]), ev(3, &[3]), ev(3, &[2])],
        )
        .unwrap();
        assert_eq!(v.maximal_null_events().unwrap(), vec![ev(3, &[1, 2]), ev(3, &[3])]);
        assert!(BinaryCapacity::from_null_events(2, vec![Event::full(2)]).is_err());
    }

    #[test]
    fn threshold_maximal_events_match_enumeration() {
        let p: Capacity = ProbabilityVector::uniform(4).into();
        let v = BinaryCapacity::threshold(p, 0.25, Side::Left).unwrap();
        let max = v.maximal_null_events().unwrap();
        assert_eq!(max.len(), 4);
        assert!(max.iter().all(|e| e.len() == 1));
    }
}
