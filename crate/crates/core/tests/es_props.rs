use choquet_core::capacity::{is_submodular, scale_alpha};
use choquet_core::choquet::var;
use choquet_core::es::{choquet_es, es_dual, ru_minimize, ru_objective};
use choquet_core::fixtures::{random_capacity, random_increasing_map, random_probability, random_rv, random_sup_probability, rng};
use choquet_core::{Capacity, EsMethod, ProbabilityVector, Side, SimpleRandomVariable, SupProbability};
use proptest::prelude::*;
use rand::Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Average of the top `alpha` mass of `X` under `p`.
fn tail_mean(p: &ProbabilityVector, alpha: f64, x: &SimpleRandomVariable) -> f64 {
    let mut idx: Vec<usize> = (0..x.atoms()).collect();
    idx.sort_by(|&a, &b| x.values()[b].total_cmp(&x.values()[a]));
    let (mut left, mut acc) = (alpha, 0.0);
    for j in idx {
        let take = p.weights()[j].min(left);
        acc += take * x.values()[j];
        left -= take;
        if left <= 0.0 {
            break;
        }
    }
    acc / alpha
}

fn es(w: &Capacity, alpha: f64, x: &SimpleRandomVariable) -> f64 {
    choquet_es(w, alpha, x, EsMethod::ScaledCapacity).unwrap()
}

fn continuous_rv<R: Rng>(r: &mut R, m: usize) -> SimpleRandomVariable {
    SimpleRandomVariable::new((0..m).map(|_| r.random_range(-3.0..3.0)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn both_definitions_agree(seed in any::<u64>(), m in 1usize..=9, alpha in 0.01f64..=1.0) {
        let mut r = rng(seed);
        let w = random_capacity(&mut r, m);
        let x = random_rv(&mut r, m, 7);
        let a = choquet_es(&w, alpha, &x, EsMethod::QuantileIntegral).unwrap();
        let b = choquet_es(&w, alpha, &x, EsMethod::ScaledCapacity).unwrap();
        prop_assert!(close(a, b, 1e-10), "{a} vs {b}");
    }

    #[test]
    fn probability_case_matches_tail_mean(seed in any::<u64>(), m in 1usize..=9, alpha in 0.01f64..=1.0) {
        let mut r = rng(seed);
        let p = random_probability(&mut r, m, 0.2);
        let x = continuous_rv(&mut r, m);
        prop_assert!(close(es(&p.clone().into(), alpha, &x), tail_mean(&p, alpha, &x), 1e-10));
    }

    #[test]
    fn decreasing_in_level_and_above_var(seed in any::<u64>(), m in 1usize..=9, a in 0.01f64..=1.0, b in 0.01f64..=1.0) {
        let mut r = rng(seed);
        let w = random_capacity(&mut r, m);
        let x = random_rv(&mut r, m, 7);
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(es(&w, lo, &x) >= es(&w, hi, &x) - 1e-12);
        if lo < 1.0 {
            prop_assert!(es(&w, lo, &x) >= var(&w, lo, Side::Left, &x).unwrap() - 1e-12);
        }
    }

    #[test]
    fn rockafellar_uryasev_minimum_is_es(seed in any::<u64>(), m in 1usize..=9, alpha in 0.01f64..0.99) {
        let mut r = rng(seed);
        let w = random_capacity(&mut r, m);
        let x = random_rv(&mut r, m, 7);
        let ru = ru_minimize(&w, alpha, &x).unwrap();
        prop_assert!(close(ru.minimum, es(&w, alpha, &x), 1e-10));
        prop_assert!(ru.argmin_lo <= ru.argmin_hi);
        for at in [ru.argmin_lo, ru.argmin_hi, 0.5 * (ru.argmin_lo + ru.argmin_hi)] {
            prop_assert!(close(ru_objective(&w, alpha, at, &x).unwrap(), ru.minimum, 1e-10));
        }
        for _ in 0..8 {
            let at = r.random_range(-2.0..9.0);
            prop_assert!(ru_objective(&w, alpha, at, &x).unwrap() >= ru.minimum - 1e-10);
        }
    }

    #[test]
    fn comonotonic_additivity(seed in any::<u64>(), m in 1usize..=9, alpha in 0.01f64..=1.0) {
        let mut r = rng(seed);
        let w = random_capacity(&mut r, m);
        let x = random_rv(&mut r, m, 6);
        let (fx, gx) = (random_increasing_map(&mut r).apply_rv(&x), random_increasing_map(&mut r).apply_rv(&x));
        let lhs = es(&w, alpha, &fx.add(&gx).unwrap());
        prop_assert!(close(lhs, es(&w, alpha, &fx) + es(&w, alpha, &gx), 1e-10));
    }

    #[test]
    fn coherent_levels_are_subadditive(seed in any::<u64>(), m in 1usize..=7, k in 1usize..=3, alpha in 0.05f64..=1.0) {
        let mut r = rng(seed);
        let w: Capacity = random_sup_probability(&mut r, m, k).into();
        prop_assume!(is_submodular(&scale_alpha(&w, alpha).unwrap()).unwrap().holds);
        for _ in 0..32 {
            let (x, y) = (continuous_rv(&mut r, m), continuous_rv(&mut r, m));
            let sum = x.add(&y).unwrap();
            prop_assert!(es(&w, alpha, &sum) <= es(&w, alpha, &x) + es(&w, alpha, &y) + 1e-10);
        }
    }

    #[test]
    fn dual_matches_primal_when_coherent(seed in any::<u64>(), m in 1usize..=6, k in 1usize..=3, alpha in 0.05f64..0.99) {
        let mut r = rng(seed);
        let w: Capacity = random_sup_probability(&mut r, m, k).into();
        let x = continuous_rv(&mut r, m);
        match es_dual(&w, alpha, &x) {
            Ok(d) => prop_assert!(close(d, es(&w, alpha, &x), 1e-8), "{d}"),
            Err(e) => prop_assert!(!is_submodular(&scale_alpha(&w, alpha).unwrap()).unwrap().holds, "{e}"),
        }
    }

    #[test]
    fn prior_wise_es_is_below_choquet_es(seed in any::<u64>(), m in 1usize..=9, k in 1usize..=4, alpha in 0.01f64..=1.0) {
        let mut r = rng(seed);
        let s = random_sup_probability(&mut r, m, k);
        let x = continuous_rv(&mut r, m);
        let best = s.members().iter().map(|p| tail_mean(p, alpha, &x)).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(best <= es(&s.into(), alpha, &x) + 1e-10);
    }
}

#[test]
fn thousand_pairs_on_a_coherent_fixture() {
    let w: Capacity = SupProbability::new(vec![
        ProbabilityVector::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap(),
        ProbabilityVector::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap(),
    ])
    .unwrap()
    .into();
    let alpha = 0.3;
    assert!(is_submodular(&scale_alpha(&w, alpha).unwrap()).unwrap().holds);
    let mut r = rng(11);
    for _ in 0..1000 {
        let (x, y) = (continuous_rv(&mut r, 4), continuous_rv(&mut r, 4));
        assert!(es(&w, alpha, &x.add(&y).unwrap()) <= es(&w, alpha, &x) + es(&w, alpha, &y) + 1e-10);
    }
}

#[test]
fn ambiguity_makes_the_gap_strict() {
    let p = ProbabilityVector::new(vec![0.3, 0.0, 0.7]).unwrap();
    let q = ProbabilityVector::new(vec![0.0, 0.6, 0.4]).unwrap();
    let w: Capacity = SupProbability::new(vec![p.clone(), q.clone()]).unwrap().into();
    let x = SimpleRandomVariable::new(vec![2.0, 1.0, 0.0]).unwrap();
    let best = tail_mean(&p, 0.5, &x).max(tail_mean(&q, 0.5, &x));
    assert!((best - 1.2).abs() < 1e-12);
    // 1 + (2 - 1) * 0.3 / 0.5
    assert!((es(&w, 0.5, &x) - 1.6).abs() < 1e-12);
}
