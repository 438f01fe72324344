mod common;

use std::collections::BTreeSet;

use common::*;
use dcause::mapping::{mapping_is_unresponsive, mapping_report, verify_mapping_equivalence, MappingVariable};
use dcause::space;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn table(seed: u64, priced: bool) -> dcause::WorldTable {
    random_table(&mut ChaCha8Rng::seed_from_u64(seed), priced, 64)
}

fn union(a: &[String], b: &[String]) -> Vec<String> {
    let mut v = a.to_vec();
    for x in b {
        if !v.contains(x) {
            v.push(x.clone());
        }
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn limited_unresponsiveness_matches_definition(seed in any::<u64>(), priced in any::<bool>()) {
        let t = table(seed, priced);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let x = subset(&mut rng, &chance_ids(&t));
        let y = subset(&mut rng, &all_ids(&t));
        prop_assert_eq!(t.is_unresponsive_limited(&x, &y).unwrap(), oracle_unresponsive(&t, &x, &y));
    }

    #[test]
    fn laws_of_limited_unresponsiveness(seed in any::<u64>()) {
        let t = table(seed, false);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let u = chance_ids(&t);
        let all = all_ids(&t);
        let x = subset(&mut rng, &u);
        let y = subset(&mut rng, &all);
        let z = subset(&mut rng, &all);
        let w = subset(&mut rng, &all);
        let unr = |a: &[String], b: &[String]| t.is_unresponsive_limited(a, b).unwrap();
        let chance_part = |s: &[String]| -> Vec<String> { s.iter().filter(|v| u.contains(v)).cloned().collect() };

        // a set is unresponsive iff each member is
        let each = x.iter().all(|v| unr(std::slice::from_ref(v), &y));
        prop_assert_eq!(unr(&x, &y), each);
        // the chance part of the limiting set may join X
        prop_assert_eq!(unr(&x, &w), unr(&union(&x, &chance_part(&w)), &w));
        // limited by every decision, anything is unresponsive
        prop_assert!(unr(&x, &decision_ids(&t)));
        // monotone in the limiting set
        if unr(&x, &y) {
            prop_assert!(unr(&x, &union(&y, &z)));
        }
        // transitivity; Y may hold decisions, so its premise is read off the rows
        if unr(&x, &union(&y, &z)) && oracle_unresponsive(&t, &y, &z) {
            prop_assert!(unr(&x, &z));
        }
        // an unresponsive addition keeps x responsive
        if !unr(&x, &z) && unr(&w.iter().filter(|v| u.contains(v)).cloned().collect::<Vec<_>>(), &z) {
            prop_assert!(!unr(&x, &union(&chance_part(&w), &z)));
        }
    }

    #[test]
    fn unresponsive_means_independent_of_the_act(seed in any::<u64>()) {
        let t = table(seed, true);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let x = subset(&mut rng, &chance_ids(&t));
        if t.is_unresponsive_limited(&x, std::iter::empty::<&str>()).unwrap() {
            let first = oracle_induced(&t, 0, &x);
            for a in 1..t.act_count() {
                let other = oracle_induced(&t, a, &x);
                for (k, p) in &first {
                    prop_assert!((p - other.get(k).copied().unwrap_or(0.0)).abs() < TOL);
                }
                let lib = t.induced_distribution(&t.act_at(a), &x).unwrap();
                for (cfg, p) in lib.masses() {
                    prop_assert!((p - first.get(cfg).copied().unwrap_or(0.0)).abs() < TOL);
                }
            }
        }
    }

    #[test]
    fn causes_are_minimal_complete_and_responsive(seed in any::<u64>()) {
        let t = table(seed, false);
        for x in chance_ids(&t) {
            let found = t.find_causes(&x).unwrap();
            let as_set: BTreeSet<BTreeSet<String>> = found.iter().cloned().collect();
            prop_assert_eq!(as_set.len(), found.len());
            prop_assert_eq!(&as_set, &oracle_causes(&t, &x));
            for a in &found {
                for b in &found {
                    prop_assert!(a == b || !a.is_superset(b));
                }
                for w in a.iter().filter(|w| t.variable(w).unwrap().kind == dcause::VarKind::Chance) {
                    prop_assert!(!oracle_unresponsive(&t, std::slice::from_ref(w), &[]));
                }
            }
            prop_assert_eq!(t.find_causes(&x).unwrap(), found);
        }
    }

    #[test]
    fn instance_causes_cover_variable_causes(seed in any::<u64>()) {
        let t = table(seed, false);
        let x = chance_ids(&t)[0].clone();
        let inst = t.find_instance_causes(&x).unwrap();
        for c in t.find_causes(&x).unwrap() {
            let full: usize = c.iter().map(|v| t.variable(v).unwrap().card()).product();
            let hit = inst.iter().find(|ic| ic.variables == c);
            prop_assert!(hit.is_some());
            prop_assert_eq!(hit.unwrap().instances.len(), full);
        }
    }

    #[test]
    fn mapping_equivalence_over_decision_arguments(seed in any::<u64>()) {
        let t = table(seed, false);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 4);
        let x = subset(&mut rng, &chance_ids(&t));
        let y = subset(&mut rng, &decision_ids(&t));
        if x.is_empty() {
            return Ok(());
        }
        prop_assert!(verify_mapping_equivalence(&t, &x, &y).unwrap());
        // X(Y) is unresponsive iff, in each state, the function from Y to X
        // read off the acts does not depend on the other decisions
        let mapping_unresponsive = possible(&t).into_iter().all(|s| {
            (0..t.act_count()).all(|a| (0..t.act_count()).all(|b| {
                let same_y = y.iter().all(|v| value(&t, s, a, v) == value(&t, s, b, v));
                !same_y || x.iter().all(|v| value(&t, s, a, v) == value(&t, s, b, v))
            }))
        });
        prop_assert_eq!(mapping_is_unresponsive(&t, &x, &y).unwrap(), mapping_unresponsive);
        prop_assert_eq!(t.is_unresponsive_limited(&x, &y).unwrap(), mapping_unresponsive);
    }

    #[test]
    fn causal_mappings_are_unresponsive(seed in any::<u64>()) {
        let t = table(seed, false);
        let d = decision_ids(&t);
        for x in chance_ids(&t) {
            prop_assert!(mapping_is_unresponsive(&t, [&x], &d).unwrap());
            for c in t.find_causes(&x).unwrap() {
                if c.iter().all(|v| d.contains(v)) {
                    prop_assert!(mapping_is_unresponsive(&t, [&x], &c).unwrap());
                }
            }
        }
    }

    #[test]
    fn mappings_reconstruct_outcomes(seed in any::<u64>()) {
        let t = table(seed, false);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 5);
        let u = chance_ids(&t);
        let x = vec![u[0].clone()];
        let mut y = subset(&mut rng, &decision_ids(&t));
        if y.is_empty() {
            y = decision_ids(&t);
        }
        let (mv, report) = mapping_report(&t, &x, &y).unwrap();
        let out_card = t.variable(&x[0]).unwrap().card();
        let free: usize = y.iter().map(|v| t.variable(v).unwrap().card()).product();
        prop_assert_eq!(mv.len(), out_card.pow(free as u32));
        for (state, r) in report {
            let Ok(i) = r else { continue };
            let s = t.states().iter().position(|st| st.id == state).unwrap();
            for a in 0..t.act_count() {
                let args: Vec<usize> = y.iter().map(|v| value(&t, s, a, v)).collect();
                prop_assert_eq!(mv.apply(i, &args).unwrap(), value(&t, s, a, &x[0]));
            }
        }
    }
}

#[test]
fn collapse_count_on_an_atomic_argument() {
    let t = dcause::fixtures::medical_g();
    let mv = MappingVariable::enumerate_for(&t, ["t"], ["r", "t_hat"]).unwrap();
    assert_eq!(mv.collapsed(), Some("t_hat"));
    // t_hat = set:x forces t, so only the idle column is free: 2^2
    assert_eq!(mv.len(), 4);
    assert_eq!(mv.free_configs(), 2);
    let plain = MappingVariable::enumerate_for(&t, ["c"], ["t"]).unwrap();
    assert_eq!(plain.len(), 4);
    assert!(mapping_is_unresponsive(&t, ["c"], ["t"]).unwrap());
    assert!(verify_mapping_equivalence(&t, ["c"], ["t"]).unwrap());
    assert_eq!(space::format_set(t.responsive_set()), "{c, t}");
}
