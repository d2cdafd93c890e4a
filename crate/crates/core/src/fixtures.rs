//! Seeded generators for test instances and synthetic market data.

use chrono::{Datelike, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StudentT};

use crate::capacity::{
    BinaryCapacity, Capacity, DistortedProbability, ExplicitCapacity, ProbabilityVector, Side, SupProbability,
};
use crate::distortion::Distortion;
use crate::infconv::{AgentSpec, MAX_ORACLE_AGENTS, MAX_ORACLE_ATOMS};
use crate::rv::{IncreasingMap, SimpleRandomVariable};
use crate::space::Event;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Weekday closing prices of a geometric random walk with t(5) daily
/// returns, 1% daily volatility, starting at 100 on the first weekday of
/// `first_year`.
pub fn synthetic_prices(seed: u64, first_year: i32, years: i32) -> Vec<(NaiveDate, f64)> {
    let mut r = rng(seed);
    let t = StudentT::new(5.0).unwrap();
    let scale = 0.01 / (5.0f64 / 3.0).sqrt();
    let mut d = NaiveDate::from_ymd_opt(first_year, 1, 1).unwrap();
    let mut price = 100.0;
    let mut out = Vec::new();
    while d.year() < first_year + years {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            if !out.is_empty() {
                let z: f64 = t.sample(&mut r);
                price *= (0.0003 + scale * z).exp();
            }
            // eight decimals keep the CSV round trip exact enough for the tests
            price = (price * 1e8).round() / 1e8;
            out.push((d, price));
        }
        d = d.succ_opt().unwrap();
    }
    out
}

pub fn prices_csv(rows: &[(NaiveDate, f64)]) -> String {
    let mut s = String::from("date,close\n");
    for (d, p) in rows {
        s.push_str(&format!("{d},{p:.8}\n"));
    }
    s
}

/// `mu + sigma * T` with `T ~ t(nu)`.
pub fn student_t_sample(seed: u64, n: usize, nu: f64, mu: f64, sigma: f64) -> Vec<f64> {
    let mut r = rng(seed);
    let t = StudentT::new(nu).unwrap();
    (0..n).map(|_| mu + sigma * t.sample(&mut r)).collect()
}

/// Normalized exponentials; each atom is zeroed with probability `sparsity`
/// (at least one atom keeps mass).
pub fn random_probability<R: Rng>(r: &mut R, m: usize, sparsity: f64) -> ProbabilityVector {
    loop {
        let w: Vec<f64> = (0..m)
            .map(|_| {
                let e: f64 = Exp1.sample(r);
                if r.random::<f64>() < sparsity {
                    0.0
                } else {
                    e
                }
            })
            .collect();
        let s: f64 = w.iter().sum();
        if s > 0.0 {
            return ProbabilityVector::new(w.iter().map(|v| v / s).collect()).unwrap();
        }
    }
}

pub fn random_sup_probability<R: Rng>(r: &mut R, m: usize, priors: usize) -> SupProbability {
    SupProbability::new((0..priors).map(|_| random_probability(r, m, 0.2)).collect()).unwrap()
}

/// Integer values in `0..levels`, so ties are common.
pub fn random_rv<R: Rng>(r: &mut R, m: usize, levels: u32) -> SimpleRandomVariable {
    SimpleRandomVariable::new((0..m).map(|_| r.random_range(0..levels) as f64).collect()).unwrap()
}

/// Monotone table built as the running max of uniform draws over subsets,
/// with `w(empty) = 0` and `w(full) = 1`.
pub fn random_explicit<R: Rng>(r: &mut R, m: usize) -> ExplicitCapacity {
    let full = (1usize << m) - 1;
    let mut t = vec![0.0; full + 1];
    for mask in 1..full {
        let below = (0..m)
            .filter(|j| mask >> j & 1 == 1)
            .map(|j| t[mask & !(1 << j)])
            .fold(0.0, f64::max);
        t[mask] = below.max(r.random::<f64>());
    }
    t[full] = 1.0;
    ExplicitCapacity::new(m, t).unwrap()
}

/// Strictly increasing table with 2 to 5 interior breakpoints.
pub fn random_distortion<R: Rng>(r: &mut R) -> Distortion {
    let k = r.random_range(2..=5);
    let mut ts: Vec<f64> = (0..k).map(|_| r.random_range(0.01..0.99)).collect();
    let mut gs: Vec<f64> = (0..k).map(|_| r.random_range(0.01..0.99)).collect();
    ts.sort_by(f64::total_cmp);
    gs.sort_by(f64::total_cmp);
    let mut pts = vec![(0.0, 0.0)];
    for (t, g) in ts.into_iter().zip(gs) {
        let last = *pts.last().unwrap();
        if t > last.0 && g > last.1 {
            pts.push((t, g));
        }
    }
    pts.push((1.0, 1.0));
    Distortion::new(pts).unwrap()
}

/// Continuous increasing piecewise-linear map with slopes in `[0.1, 3]`.
pub fn random_increasing_map<R: Rng>(r: &mut R) -> IncreasingMap {
    let k = r.random_range(2..=6);
    let mut x = r.random_range(-3.0..0.0);
    let mut y = r.random_range(-5.0..5.0);
    let mut pts = vec![(x, y)];
    for _ in 1..k {
        let dx = r.random_range(0.2..2.0);
        x += dx;
        y += dx * r.random_range(0.1..3.0);
        pts.push((x, y));
    }
    IncreasingMap::new(pts).unwrap()
}

/// Null family generated by up to three random events (never the full space).
pub fn random_null_family<R: Rng>(r: &mut R, m: usize) -> BinaryCapacity {
    let k = r.random_range(1..=3);
    let gens = (0..k)
        .map(|_| {
            let mut e = Event::empty(m);
            for j in 0..m {
                if r.random::<f64>() < 0.4 {
                    e.insert(j);
                }
            }
            if e.is_full() {
                e.remove(r.random_range(0..m));
            }
            e
        })
        .collect();
    BinaryCapacity::from_null_events(m, gens).unwrap()
}

/// One of: probability, sup-probability, distorted probability, explicit
/// table (`m <= 10`), or a binary capacity.
pub fn random_capacity<R: Rng>(r: &mut R, m: usize) -> Capacity {
    let kinds = if m <= 10 { 5 } else { 4 };
    match r.random_range(0..kinds) {
        0 => random_probability(r, m, 0.2).into(),
        1 => {
            let k = r.random_range(1..=3);
            random_sup_probability(r, m, k).into()
        }
        2 => DistortedProbability::new(random_probability(r, m, 0.2), random_distortion(r)).into(),
        3 => random_binary(r, m).into(),
        _ => random_explicit(r, m).into(),
    }
}

/// Either a null family or a threshold of a sup-probability.
pub fn random_binary<R: Rng>(r: &mut R, m: usize) -> BinaryCapacity {
    if r.random::<bool>() {
        random_null_family(r, m)
    } else {
        let k = r.random_range(1..=3);
        let side = if r.random::<bool>() { Side::Left } else { Side::Right };
        let level = r.random_range(0.05..0.95);
        BinaryCapacity::threshold(random_sup_probability(r, m, k).into(), level, side).unwrap()
    }
}

/// A small sharing instance: agents with sup-probabilities of up to three
/// priors, levels in `(0.05, 0.6)`, and an integer-valued `X`.
#[derive(Debug, Clone)]
pub struct SharingFixture {
    pub agents: Vec<AgentSpec>,
    pub x: SimpleRandomVariable,
}

impl SharingFixture {
    pub fn binaries(&self) -> Vec<BinaryCapacity> {
        self.agents.iter().map(|a| a.binary().unwrap()).collect()
    }
}

pub fn sharing_fixture(seed: u64) -> SharingFixture {
    let mut r = rng(seed);
    let m = r.random_range(1..=MAX_ORACLE_ATOMS);
    let n = r.random_range(1..=MAX_ORACLE_AGENTS);
    let agents = (0..n)
        .map(|i| {
            let k = r.random_range(1..=3);
            let cap: Capacity = random_sup_probability(&mut r, m, k).into();
            let alpha = r.random_range(0.05..0.6);
            AgentSpec::var(format!("agent {}", i + 1), cap, alpha).unwrap()
        })
        .collect();
    let x = random_rv(&mut r, m, 6);
    SharingFixture { agents, x }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(synthetic_prices(3, 2014, 1), synthetic_prices(3, 2014, 1));
        assert_eq!(student_t_sample(1, 5, 5.0, 0.0, 1.0), student_t_sample(1, 5, 5.0, 0.0, 1.0));
        let a = sharing_fixture(9);
        let b = sharing_fixture(9);
        assert_eq!(a.x, b.x);
        assert_eq!(a.agents, b.agents);
    }

    #[test]
    fn ten_years_of_weekdays() {
        let p = synthetic_prices(1, 2014, 10);
        assert_eq!(p.first().unwrap().0, NaiveDate::from_ymd_opt(2014, 1, 1).unwrap());
        assert_eq!(p.last().unwrap().0.year(), 2023);
        assert!(p.len() > 2500 && p.len() < 2700);
        assert!(p.iter().all(|&(_, v)| v > 0.0));
    }
}
