//! Finite measurable spaces and events.
//!
//! Atoms are indexed `0..m`. Events on spaces with at most 64 atoms are a
//! single machine word; larger spaces (up to [`MAX_ATOMS`]) use a word vector.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of atoms a [`FiniteSpace`] may carry.
pub const MAX_ATOMS: usize = 4096;

/// Largest space for which events fit in one `u64`.
pub const WORD_ATOMS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSpace {
    m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ref_weights: Option<Vec<f64>>,
}

impl FiniteSpace {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 || m > MAX_ATOMS {
            return Err(Error::SpaceTooLarge { m, max: MAX_ATOMS });
        }
        Ok(Self {
            m,
            labels: None,
            ref_weights: None,
        })
    }

    /// Space whose reference measure puts `1/m` on every atom.
    pub fn equiprobable(m: usize) -> Result<Self> {
        let w = vec![1.0 / m as f64; m];
        Self::new(m)?.with_ref_weights(w)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.m {
            return Err(Error::SpaceMismatch {
                expected: self.m,
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_ref_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.m {
            return Err(Error::SpaceMismatch {
                expected: self.m,
                found: weights.len(),
            });
        }
        check_distribution(&weights, 1e-12)?;
        self.ref_weights = Some(weights);
        Ok(self)
    }

    pub fn atoms(&self) -> usize {
        self.m
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn ref_weights(&self) -> Option<&[f64]> {
        self.ref_weights.as_deref()
    }

    pub fn label(&self, atom: usize) -> String {
        match &self.labels {
            Some(l) => l[atom].clone(),
            None => format!("{}", atom + 1),
        }
    }

    pub fn empty_event(&self) -> Event {
        Event::empty(self.m)
    }

    pub fn full_event(&self) -> Event {
        Event::full(self.m)
    }
}

/// Checks nonnegativity and unit mass within `tol`.
pub(crate) fn check_distribution(p: &[f64], tol: f64) -> Result<()> {
    let mut sum = 0.0;
    for (j, &x) in p.iter().enumerate() {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::InvalidProbability(format!(
                "weight {x} at atom {j} is negative or not finite"
            )));
        }
        sum += x;
    }
    if (sum - 1.0).abs() > tol {
        return Err(Error::InvalidProbability(format!(
            "weights sum to {sum}, not 1"
        )));
    }
    Ok(())
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Bits {
    Word(u64),
    Words(Vec<u64>),
}

/// A subset of the atoms of a space with `m` atoms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Event {
    m: usize,
    bits: Bits,
}

fn low_mask(m: usize) -> u64 {
    if m >= 64 {
        u64::MAX
    } else {
        (1u64 << m) - 1
    }
}

impl Event {
    pub fn empty(m: usize) -> Self {
        let bits = if m <= WORD_ATOMS {
            Bits::Word(0)
        } else {
            Bits::Words(vec![0; m.div_ceil(64)])
        };
        Self { m, bits }
    }

    pub fn full(m: usize) -> Self {
        let mut e = Self::empty(m);
        match &mut e.bits {
            Bits::Word(w) => *w = low_mask(m),
            Bits::Words(ws) => {
                for (k, w) in ws.iter_mut().enumerate() {
                    let rem = m - 64 * k;
                    *w = low_mask(rem.min(64));
                }
            }
        }
        e
    }

    /// Event from a bitmask; bits at or above `m` are rejected.
    pub fn from_mask(m: usize, mask: u64) -> Result<Self> {
        if m > WORD_ATOMS {
            return Err(Error::SpaceTooLarge { m, max: WORD_ATOMS });
        }
        if mask & !low_mask(m) != 0 {
            return Err(Error::SpaceMismatch {
                expected: m,
                found: 64 - mask.leading_zeros() as usize,
            });
        }
        Ok(Self {
            m,
            bits: Bits::Word(mask),
        })
    }

    pub fn from_atoms<I: IntoIterator<Item = usize>>(m: usize, atoms: I) -> Result<Self> {
        let mut e = Self::empty(m);
        for j in atoms {
            if j >= m {
                return Err(Error::SpaceMismatch {
                    expected: m,
                    found: j + 1,
                });
            }
            e.insert(j);
        }
        Ok(e)
    }

    pub fn from_indicator(flags: &[bool]) -> Self {
        let mut e = Self::empty(flags.len());
        for (j, &f) in flags.iter().enumerate() {
            if f {
                e.insert(j);
            }
        }
        e
    }

    /// The word representation when `m <= 64`.
    pub fn mask(&self) -> Option<u64> {
        match self.bits {
            Bits::Word(w) => Some(w),
            Bits::Words(_) => None,
        }
    }

    pub fn space_atoms(&self) -> usize {
        self.m
    }

    pub fn contains(&self, j: usize) -> bool {
        if j >= self.m {
            return false;
        }
        match &self.bits {
            Bits::Word(w) => w >> j & 1 == 1,
            Bits::Words(ws) => ws[j / 64] >> (j % 64) & 1 == 1,
        }
    }

    pub fn insert(&mut self, j: usize) {
        assert!(j < self.m, "atom {j} outside space of {} atoms", self.m);
        match &mut self.bits {
            Bits::Word(w) => *w |= 1 << j,
            Bits::Words(ws) => ws[j / 64] |= 1 << (j % 64),
        }
    }

    pub fn remove(&mut self, j: usize) {
        if j >= self.m {
            return;
        }
        match &mut self.bits {
            Bits::Word(w) => *w &= !(1 << j),
            Bits::Words(ws) => ws[j / 64] &= !(1 << (j % 64)),
        }
    }

    pub fn len(&self) -> usize {
        match &self.bits {
            Bits::Word(w) => w.count_ones() as usize,
            Bits::Words(ws) => ws.iter().map(|w| w.count_ones() as usize).sum(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match &self.bits {
            Bits::Word(w) => *w == 0,
            Bits::Words(ws) => ws.iter().all(|&w| w == 0),
        }
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.m
    }

    fn zip_with(&self, other: &Event, f: impl Fn(u64, u64) -> u64) -> Event {
        assert_eq!(self.m, other.m, "events from different spaces");
        let bits = match (&self.bits, &other.bits) {
            (Bits::Word(a), Bits::Word(b)) => Bits::Word(f(*a, *b)),
            (Bits::Words(a), Bits::Words(b)) => {
                Bits::Words(a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect())
            }
            _ => unreachable!("representation is fixed by m"),
        };
        Event { m: self.m, bits }
    }

    pub fn union(&self, other: &Event) -> Event {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Event) -> Event {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &Event) -> Event {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> Event {
        Event::full(self.m).difference(self)
    }

    pub fn is_subset(&self, other: &Event) -> bool {
        assert_eq!(self.m, other.m, "events from different spaces");
        match (&self.bits, &other.bits) {
            (Bits::Word(a), Bits::Word(b)) => a & !b == 0,
            (Bits::Words(a), Bits::Words(b)) => a.iter().zip(b).all(|(x, y)| x & !y == 0),
            _ => unreachable!("representation is fixed by m"),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.m).filter(move |&j| self.contains(j))
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All `2^m` events of a word-sized space, in mask order.
    pub fn all(m: usize) -> Result<impl Iterator<Item = Event>> {
        if m > 30 {
            return Err(Error::SpaceTooLarge { m, max: 30 });
        }
        Ok((0..1u64 << m).map(move |mask| Event {
            m,
            bits: Bits::Word(mask),
        }))
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atoms: Vec<usize> = self.iter().map(|j| j + 1).collect();
        write!(f, "{{")?;
        for (k, a) in atoms.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_and_vector_events_agree() {
        for m in [3usize, 64, 65, 200] {
            let mut a = Event::empty(m);
            let mut b = Event::empty(m);
            for j in (0..m).step_by(3) {
                a.insert(j);
            }
            for j in (0..m).step_by(2) {
                b.insert(j);
            }
            let u = a.union(&b);
            let i = a.intersection(&b);
            assert_eq!(u.len() + i.len(), a.len() + b.len());
            assert!(i.is_subset(&a) && i.is_subset(&b));
            assert!(a.is_subset(&u));
            assert_eq!(a.complement().len(), m - a.len());
            assert!(Event::full(m).is_full());
            assert!(Event::empty(m).is_empty());
        }
    }

    #[test]
    fn mask_bounds_are_checked() {
        assert!(Event::from_mask(3, 0b111).is_ok());
        assert!(Event::from_mask(3, 0b1000).is_err());
        assert!(Event::from_atoms(3, [3]).is_err());
    }

    #[test]
    fn ref_weights_must_sum_to_one() {
        let s = FiniteSpace::new(2).unwrap();
        assert!(s.clone().with_ref_weights(vec![0.5, 0.5]).is_ok());
        assert!(s.clone().with_ref_weights(vec![0.5, 0.6]).is_err());
        assert!(s.with_ref_weights(vec![-0.5, 1.5]).is_err());
        assert!(FiniteSpace::new(0).is_err());
    }

    #[test]
    fn debug_uses_one_based_atoms() {
        let e = Event::from_atoms(4, [0, 3]).unwrap();
        assert_eq!(format!("{e:?}"), "{1,4}");
    }
}
