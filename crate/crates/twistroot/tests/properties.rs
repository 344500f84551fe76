//! Exact set predicates against brute force on random cylinder sets.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twistroot::cylsets::{CylinderSet, ZSet};
use twistroot::functionals::{parabolic, random_functional};
use twistroot::rootspace::{FamilyKind, RootSystem};
use twistroot::suite::{brute_closed, brute_symmetric, small_ranks};

fn random_zset(rng: &mut ChaCha8Rng) -> ZSet {
    let mut z = ZSet::empty();
    for _ in 0..rng.gen_range(1..=2) {
        let k = rng.gen_range(-6..=6);
        let per = [1, 2, 4][rng.gen_range(0..3)];
        let piece = match rng.gen_range(0..6) {
            0 => ZSet::points(&[k, k + rng.gen_range(1..4)]),
            1 => ZSet::prog(k, per),
            2 => ZSet::at_least(k),
            3 => ZSet::at_most(k),
            4 => ZSet::up(k, per),
            _ => ZSet::down(k, per),
        };
        z = z.union(&piece);
    }
    z
}

/// Raw random sets, unions of whole cosets, and parabolic sets, so that both
/// verdicts of the closure test occur.
fn random_set(kind: FamilyKind, seed: u64) -> CylinderSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ranks = small_ranks(kind);
    let (m, n) = ranks[rng.gen_range(0..ranks.len())];
    let rs = RootSystem::new(kind, m, n).unwrap();
    let roots: Vec<_> = rs.finite_roots().into_iter().collect();
    match rng.gen_range(0..3) {
        0 => {
            let mut comps = Vec::new();
            for d in &roots {
                if rng.gen_bool(0.3) {
                    comps.push((d.clone(), random_zset(&mut rng)));
                }
            }
            CylinderSet::from_components(&rs, comps)
        }
        1 => {
            let picked: Vec<_> = roots.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
            let s = CylinderSet::cosets(&rs, &picked);
            if rng.gen_bool(0.5) {
                s.union(&s.negate()).unwrap()
            } else {
                s
            }
        }
        _ => {
            let lam = random_functional(m, n, &mut rng);
            let mu = random_functional(m, n, &mut rng);
            parabolic(&rs, &lam, Some(&mu)).unwrap().p
        }
    }
}

fn check_closure(kind: FamilyKind, seed: u64) -> Result<(), TestCaseError> {
    let s = random_set(kind, seed);
    let rep = s.closure_report();
    let depth = 3 * rep.window_bound;
    prop_assert_eq!(rep.closed, brute_closed(&s, depth));
    prop_assert_eq!(s.is_symmetric(), brute_symmetric(&s, depth));
    if let Some(((a, x), (b, y))) = rep.witness {
        prop_assert!(s.member_dot(&a, x) && s.member_dot(&b, y));
        let c = a.add(&b);
        prop_assert!(s.rs().contains_dot(&c, x + y) && !s.member_dot(&c, x + y));
    } else {
        prop_assert!(rep.closed);
    }
    Ok(())
}

fn check_parts(kind: FamilyKind, seed: u64) -> Result<(), TestCaseError> {
    let s = random_set(kind, seed);
    let rs = s.rs();
    let (re, ns, im, cross) = s.parts();
    for (d, k) in s.elements(8) {
        let hits = [re.member_dot(&d, k), ns.member_dot(&d, k), im.member_dot(&d, k)];
        prop_assert_eq!(hits.iter().filter(|&&h| h).count(), 1);
        prop_assert_eq!(cross.member_dot(&d, k), !d.is_zero());
        let form = rs.form_dot(&d, &d);
        prop_assert_eq!(re.member_dot(&d, k), form != 0);
    }
    prop_assert_eq!(re.union(&ns).unwrap(), cross.clone());
    prop_assert_eq!(cross.union(&im).unwrap(), s);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closure_matches_brute_force_a_even_odd(seed in any::<u64>()) {
        check_closure(FamilyKind::AEvenOdd2, seed)?;
    }

    #[test]
    fn closure_matches_brute_force_a_odd_odd(seed in any::<u64>()) {
        check_closure(FamilyKind::AOddOdd2, seed)?;
    }

    #[test]
    fn closure_matches_brute_force_a_even_even(seed in any::<u64>()) {
        check_closure(FamilyKind::AEvenEven4, seed)?;
    }

    #[test]
    fn closure_matches_brute_force_d(seed in any::<u64>()) {
        check_closure(FamilyKind::D2, seed)?;
    }

    #[test]
    fn parts_partition_the_set(seed in any::<u64>(), f in 0usize..4) {
        check_parts(FamilyKind::ALL[f], seed)?;
    }
}

#[test]
fn both_closure_verdicts_occur() {
    let verdicts: Vec<bool> = (0..60).map(|s| random_set(FamilyKind::D2, s).is_closed()).collect();
    assert!(verdicts.contains(&true) && verdicts.contains(&false));
}
