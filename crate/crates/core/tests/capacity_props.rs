use choquet_core::capacity::{binary_from_level, check_monotone, combine_capacities, scale_alpha};
use choquet_core::fixtures::{random_binary, random_capacity, random_sup_probability, rng};
use choquet_core::{BinaryCapacity, Capacity, Combine, Event, Side};
use proptest::prelude::*;

fn events(m: usize) -> Vec<Event> {
    Event::all(m).unwrap().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn monotone_on_every_pair(seed in any::<u64>(), m in 1usize..=6) {
        let w = random_capacity(&mut rng(seed), m);
        let all = events(m);
        for a in &all {
            for b in &all {
                if a.is_subset(b) {
                    prop_assert!(w.value(a) <= w.value(b) + 1e-12, "{a:?} {b:?}");
                }
            }
        }
    }

    #[test]
    fn monotone_on_covering_pairs_up_to_ten_atoms(seed in any::<u64>(), m in 7usize..=10) {
        let w = random_capacity(&mut rng(seed), m);
        prop_assert_eq!(check_monotone(&w).unwrap(), None);
    }

    #[test]
    fn sup_probability_is_subadditive(seed in any::<u64>(), m in 1usize..=9, k in 1usize..=4) {
        let w: Capacity = random_sup_probability(&mut rng(seed), m, k).into();
        let t = w.tabulate().unwrap();
        let full = (1usize << m) - 1;
        for a in 0..=full {
            for b in a..=full {
                prop_assert!(t[a | b] <= t[a] + t[b] + 1e-12);
            }
        }
    }

    #[test]
    fn binary_from_level_thresholds_the_base(seed in any::<u64>(), m in 1usize..=7, alpha in 0.01f64..0.99) {
        let mut r = rng(seed);
        let w = random_capacity(&mut r, m);
        let left = binary_from_level(&w, alpha, Side::Left).unwrap();
        let right = binary_from_level(&w, alpha, Side::Right).unwrap();
        let (l, rt) = (Capacity::from(left), Capacity::from(right));
        for e in events(m) {
            let v = w.value(&e);
            let expect_left = if v > 1.0 - alpha + 1e-9 { 1.0 } else { 0.0 };
            let expect_right = if v >= 1.0 - alpha - 1e-9 { 1.0 } else { 0.0 };
            if e.is_empty() {
                prop_assert_eq!(l.value(&e), 0.0);
            } else {
                prop_assert_eq!(l.value(&e), expect_left);
                prop_assert_eq!(rt.value(&e), expect_right);
            }
        }
    }

    #[test]
    fn null_families_of_max_and_min(seed in any::<u64>(), m in 1usize..=7) {
        let mut r = rng(seed);
        let v1 = random_binary(&mut r, m);
        let v2 = random_binary(&mut r, m);
        let sup = combine_capacities(Combine::Sup, vec![v1.clone().into(), v2.clone().into()]).unwrap();
        let inf = combine_capacities(Combine::Inf, vec![v1.clone().into(), v2.clone().into()]).unwrap();
        for e in events(m) {
            let (n1, n2) = (v1.is_null(&e), v2.is_null(&e));
            prop_assert_eq!(sup.value(&e) == 0.0, n1 && n2);
            prop_assert_eq!(inf.value(&e) == 0.0, n1 || n2);
        }
    }

    #[test]
    fn scaled_capacity_is_a_capacity(seed in any::<u64>(), m in 1usize..=8, alpha in 0.01f64..=1.0) {
        let w = random_capacity(&mut rng(seed), m);
        let s = scale_alpha(&w, alpha).unwrap();
        prop_assert_eq!(check_monotone(&s).unwrap(), None);
        prop_assert_eq!(s.value(&Event::empty(m)), 0.0);
        prop_assert_eq!(s.value(&Event::full(m)), 1.0);
        for e in events(m) {
            prop_assert!(s.value(&e) >= w.value(&e) - 1e-12);
        }
    }
}

#[test]
fn null_family_generators_reduce_to_an_antichain() {
    let e = |atoms: &[usize]| Event::from_atoms(4, atoms.iter().copied()).unwrap();
    let v = BinaryCapacity::from_null_events(4, vec![e(&[0]), e(&[0, 1]), e(&[2]), e(&[1, 0])]).unwrap();
    let max = v.maximal_null_events().unwrap();
    assert_eq!(max.len(), 2);
    assert!(v.is_null(&e(&[1])) && v.is_null(&e(&[2])) && !v.is_null(&e(&[1, 2])));
}
