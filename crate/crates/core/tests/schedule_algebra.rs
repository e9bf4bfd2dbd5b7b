use std::collections::HashMap;

use modelsched::{compress, dominates, merge, Cost, CostProfile, Error, ModelRecord, Source, VarSet};
use proptest::prelude::*;

const P: usize = 6;

fn profile() -> CostProfile {
    CostProfile::from_units(&[3.0, 7.0, 2.0, 5.0, 11.0, 1.0]).unwrap()
}

fn record(mask: u8, acc_step: u8, source: Source, profile: &CostProfile) -> ModelRecord {
    let vars = VarSet::new((1..=P).filter(|j| mask & (1 << (j - 1)) != 0).collect());
    // coarse accuracies so equal-accuracy ties are common
    ModelRecord::priced(vars, profile, f64::from(acc_step) / 10.0, source).unwrap()
}

fn records_strategy(max: usize) -> impl Strategy<Value = Vec<ModelRecord>> {
    let sources = prop_oneof![
        Just(Source::ByCost),
        Just(Source::ByImportance),
        Just(Source::BySampling),
        Just(Source::ByL1Path),
    ];
    prop::collection::vec((1u8..64, 0u8..=10, sources), 0..max).prop_map(|v| {
        let prof = profile();
        v.into_iter().map(|(m, a, s)| record(m, a, s, &prof)).collect()
    })
}

/// Quadratic reference: per variable set keep the first record with the
/// highest accuracy (placed where that set first appeared), drop anything
/// dominated by another record or repeating an earlier (cost, accuracy)
/// pair, then order by cost.
fn brute_force(records: &[ModelRecord]) -> Vec<ModelRecord> {
    let mut first_seen: Vec<&VarSet> = Vec::new();
    let mut best: HashMap<&VarSet, &ModelRecord> = HashMap::new();
    for r in records {
        match best.get(&r.variables) {
            None => {
                first_seen.push(&r.variables);
                best.insert(&r.variables, r);
            }
            Some(b) if r.val_accuracy > b.val_accuracy => {
                best.insert(&r.variables, r);
            }
            _ => {}
        }
    }
    let pool: Vec<&ModelRecord> = first_seen.iter().map(|v| best[v]).collect();
    let mut keep: Vec<ModelRecord> = Vec::new();
    for (i, r) in pool.iter().enumerate() {
        let dominated = pool.iter().any(|s| dominates(s, r));
        let repeat = pool[..i]
            .iter()
            .any(|s| s.cost == r.cost && s.val_accuracy == r.val_accuracy);
        if !dominated && !repeat {
            keep.push((*r).clone());
        }
    }
    keep.sort_by_key(|r| r.cost);
    keep
}

fn points(records: &[ModelRecord]) -> Vec<(Cost, f64)> {
    records.iter().map(|r| (r.cost, r.val_accuracy)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn compress_matches_brute_force(records in records_strategy(40)) {
        let got = compress(&records);
        let want = brute_force(&records);
        prop_assert_eq!(got.records(), want.as_slice());
        got.validate().unwrap();
    }

    #[test]
    fn compress_is_idempotent(records in records_strategy(40)) {
        let once = compress(&records);
        let twice = compress(once.records());
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn merge_is_order_invariant(
        a in records_strategy(15),
        b in records_strategy(15),
        c in records_strategy(15),
        d in records_strategy(15),
    ) {
        let prof = profile();
        let base = merge(&[&a, &b, &c, &d], &prof).unwrap();
        for perm in [[&d, &c, &b, &a], [&b, &d, &a, &c], [&c, &a, &d, &b]] {
            let other = merge(&perm, &prof).unwrap();
            prop_assert_eq!(points(base.records()), points(other.records()));
        }
        let all: Vec<ModelRecord> = [a, b, c, d].concat();
        prop_assert_eq!(points(base.records()), points(compress(&all).records()));
    }

    #[test]
    fn budget_lookup_is_monotone(records in records_strategy(40), budgets in prop::collection::vec(0i64..4000, 2..20)) {
        let schedule = compress(&records);
        let mut budgets = budgets;
        budgets.sort_unstable();
        let mut prev: Option<f64> = None;
        for cents in budgets {
            let budget = Cost::from_cents(cents);
            match schedule.best_under_budget(budget) {
                Ok(r) => {
                    prop_assert!(r.cost <= budget);
                    if let Some(p) = prev {
                        prop_assert!(r.val_accuracy >= p);
                    }
                    // nothing affordable beats it
                    prop_assert!(records.iter().filter(|s| s.cost <= budget).all(|s| s.val_accuracy <= r.val_accuracy));
                    prev = Some(r.val_accuracy);
                }
                Err(Error::NoFeasibleModel { .. }) => {
                    prop_assert!(prev.is_none());
                    prop_assert!(records.iter().all(|s| s.cost > budget));
                }
                Err(e) => prop_assert!(false, "unexpected {e}"),
            }
        }
    }

    #[test]
    fn schedule_costs_match_the_profile(records in records_strategy(40)) {
        let prof = profile();
        let schedule = merge(&[&records], &prof).unwrap();
        schedule.validate_costs(&prof).unwrap();
        for r in schedule.records() {
            let want: i64 = r.variables.iter().map(|j| prof.cost(j).unwrap().cents()).sum();
            prop_assert_eq!(r.cost.cents(), want);
        }
    }
}

#[test]
fn merge_rejects_foreign_costs() {
    let prof = profile();
    let mut r = record(0b11, 5, Source::ByCost, &prof);
    r.cost = Cost::from_cents(r.cost.cents() + 1);
    assert!(matches!(merge(&[vec![r]], &prof), Err(Error::InconsistentProfile)));
}

#[test]
fn empty_inputs_give_an_empty_schedule() {
    let none: Vec<ModelRecord> = Vec::new();
    assert!(compress(&none).is_empty());
    assert!(merge(&[&none, &none], &profile()).unwrap().is_empty());
}
