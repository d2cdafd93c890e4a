//! Seeded cross-checks of the solvers against independent computations.
//!
//! Each identity runs over its own fixture stream, so adding cases to one
//! check does not move the fixtures of another.

use rand::Rng;
use serde::Serialize;

use crate::capacity::{combine_capacities, is_submodular, scale_alpha, BinaryCapacity, Capacity, Combine, Side};
use crate::choquet::{quantile, var};
use crate::error::Result;
use crate::es::{choquet_es, es_dual, ru_minimize, EsMethod};
use crate::extended::ExtendedReal;
use crate::fixtures::{
    random_capacity, random_increasing_map, random_rv, random_sup_probability, rng, sharing_fixture, SharingFixture,
};
use crate::infconv::{brute_force_infconv, infconv_value, share_discrete, transform_result, SCHEMA_VERSION};
use crate::space::Event;

pub const DEFAULT_ORACLE_CASES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    InfconvEqualsBruteForce,
    SingleAgentIsVar,
    EsDefinitionsAgree,
    RuMinimumAndArgmin,
    DualEqualsPrimal,
    SupInfClosure,
    Invariance,
}

impl Identity {
    pub const ALL: [Identity; 7] = [
        Identity::InfconvEqualsBruteForce,
        Identity::SingleAgentIsVar,
        Identity::EsDefinitionsAgree,
        Identity::RuMinimumAndArgmin,
        Identity::DualEqualsPrimal,
        Identity::SupInfClosure,
        Identity::Invariance,
    ];

    fn stream(self) -> u64 {
        self as u64 + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleFailure {
    pub identity: Identity,
    pub case: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub identity: Identity,
    pub cases: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub schema_version: u32,
    pub seed: u64,
    pub perturbed: bool,
    pub passed: bool,
    pub checks: Vec<CheckSummary>,
    pub failures: Vec<OracleFailure>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOptions {
    pub seed: u64,
    pub cases: usize,
    /// Marks the top atom of `X` null for the first agent on the oracle side
    /// of the inf-convolution check. Harness self-test only.
    pub perturb: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            cases: DEFAULT_ORACLE_CASES,
            perturb: false,
        }
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn fixture_seed(seed: u64, id: Identity, case: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(id.stream() << 32)
        .wrapping_add(case as u64)
}

/// `v` with the top atom of `X` added to its null family, when that keeps
/// the full space non-null.
fn perturbed(v: &BinaryCapacity, f: &SharingFixture) -> Result<BinaryCapacity> {
    let m = f.x.atoms();
    let top = (0..m).max_by(|&a, &b| f.x.values()[a].total_cmp(&f.x.values()[b]).then(b.cmp(&a))).unwrap_or(0);
    let mut generators = v.maximal_null_events()?;
    generators.push(Event::from_atoms(m, [top])?);
    match BinaryCapacity::from_null_events(m, generators) {
        Ok(p) => Ok(p),
        Err(_) => Ok(v.clone()),
    }
}

fn check_case(id: Identity, s: u64, perturb: bool) -> Result<Option<String>> {
    match id {
        Identity::InfconvEqualsBruteForce => {
            let f = sharing_fixture(s);
            let vs = f.binaries();
            let mut oracle_vs = vs.clone();
            if perturb {
                oracle_vs[0] = perturbed(&vs[0], &f)?;
            }
            let value = infconv_value(&vs, &f.x)?;
            let oracle = brute_force_infconv(&oracle_vs, &f.x)?.value;
            let shared = share_discrete(&f.agents, &f.x)?.value;
            if value != oracle || shared != value {
                return Ok(Some(format!("solver {value}, sharing {shared}, brute force {oracle}")));
            }
        }
        Identity::SingleAgentIsVar => {
            let f = sharing_fixture(s);
            let a = &f.agents[0];
            let value = share_discrete(std::slice::from_ref(a), &f.x)?.value;
            let direct = var(&a.capacity, a.alpha, Side::Left, &f.x)?;
            if value != ExtendedReal::Finite(direct) {
                return Ok(Some(format!("sharing {value}, VaR {direct}")));
            }
        }
        Identity::EsDefinitionsAgree => {
            let mut r = rng(s);
            let m = r.random_range(1..=8);
            let w = random_capacity(&mut r, m);
            let x = random_rv(&mut r, m, 7);
            let alpha = r.random_range(0.01..=1.0);
            let a = choquet_es(&w, alpha, &x, EsMethod::QuantileIntegral)?;
            let b = choquet_es(&w, alpha, &x, EsMethod::ScaledCapacity)?;
            if (a - b).abs() >= 1e-10 {
                return Ok(Some(format!("quantile integral {a}, scaled capacity {b}")));
            }
        }
        Identity::RuMinimumAndArgmin => {
            let mut r = rng(s);
            let m = r.random_range(1..=8);
            let w: Capacity = if r.random::<bool>() {
                let k = r.random_range(1..=3);
                random_sup_probability(&mut r, m, k).into()
            } else {
                random_capacity(&mut r, m)
            };
            let x = random_rv(&mut r, m, 7);
            let alpha = r.random_range(0.01..0.99);
            let ru = ru_minimize(&w, alpha, &x)?;
            let es = choquet_es(&w, alpha, &x, EsMethod::ScaledCapacity)?;
            let lo = var(&w, alpha, Side::Left, &x)?;
            let hi = var(&w, alpha, Side::Right, &x)?;
            if !close(ru.minimum, es, 1e-10) || ru.argmin_lo != lo || ru.argmin_hi != hi {
                return Ok(Some(format!(
                    "minimum {} vs ES {es}, argmin [{}, {}] vs VaR [{lo}, {hi}]",
                    ru.minimum, ru.argmin_lo, ru.argmin_hi
                )));
            }
        }
        Identity::DualEqualsPrimal => {
            let mut r = rng(s);
            let m = r.random_range(1..=8);
            let k = r.random_range(1..=3);
            let w: Capacity = random_sup_probability(&mut r, m, k).into();
            let x = random_rv(&mut r, m, 7);
            let alpha = r.random_range(0.05..0.99);
            let coherent = is_submodular(&scale_alpha(&w, alpha)?)?.holds;
            match (es_dual(&w, alpha, &x), coherent) {
                (Ok(d), true) => {
                    let es = choquet_es(&w, alpha, &x, EsMethod::ScaledCapacity)?;
                    if !close(d, es, 1e-8) {
                        return Ok(Some(format!("dual {d}, primal {es}")));
                    }
                }
                (Err(crate::Error::NotCoherent), false) => {}
                (other, _) => return Ok(Some(format!("submodular {coherent}, dual {other:?}"))),
            }
        }
        Identity::SupInfClosure => {
            let mut r = rng(s);
            let m = r.random_range(1..=8);
            let n = r.random_range(1..=4);
            let ws: Vec<Capacity> = (0..n).map(|_| random_capacity(&mut r, m)).collect();
            let x = random_rv(&mut r, m, 7);
            let alpha = r.random_range(0.01..0.99);
            let sup = combine_capacities(Combine::Sup, ws.clone())?;
            let inf = combine_capacities(Combine::Inf, ws.clone())?;
            let mut max_left = f64::NEG_INFINITY;
            let mut min_right = f64::INFINITY;
            for w in &ws {
                max_left = max_left.max(quantile(w, alpha, Side::Left, &x)?);
                min_right = min_right.min(quantile(w, alpha, Side::Right, &x)?);
            }
            let (ql, qr) = (quantile(&sup, alpha, Side::Left, &x)?, quantile(&inf, alpha, Side::Right, &x)?);
            if ql != max_left || qr != min_right {
                return Ok(Some(format!("sup {ql} vs {max_left}, inf {qr} vs {min_right}")));
            }
        }
        Identity::Invariance => {
            let f = sharing_fixture(s);
            let phi = random_increasing_map(&mut rng(s));
            let base = share_discrete(&f.agents, &f.x)?;
            let moved = transform_result(&base, &phi, &f.x, &f.agents)?.value;
            let fresh = share_discrete(&f.agents, &phi.apply_rv(&f.x))?.value;
            if moved != fresh {
                return Ok(Some(format!("transformed {moved}, fresh {fresh}")));
            }
        }
    }
    Ok(None)
}

/// Runs every identity on `cases` seeded fixtures. Errors raised by a solver
/// count as failures of that case.
pub fn run_oracle(opts: OracleOptions) -> OracleReport {
    let mut checks = Vec::new();
    let mut failures = Vec::new();
    for id in Identity::ALL {
        let before = failures.len();
        for case in 0..opts.cases {
            let s = fixture_seed(opts.seed, id, case);
            let outcome = check_case(id, s, opts.perturb).unwrap_or_else(|e| Some(format!("error: {e}")));
            if let Some(detail) = outcome {
                failures.push(OracleFailure { identity: id, case, detail });
            }
        }
        checks.push(CheckSummary {
            identity: id,
            cases: opts.cases,
            failures: failures.len() - before,
        });
    }
    OracleReport {
        schema_version: SCHEMA_VERSION,
        seed: opts.seed,
        perturbed: opts.perturb,
        passed: failures.is_empty(),
        checks,
        failures,
    }
}
