mod common;

use common::{exhaustive, positions};

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tms_core::domain::ModeCatalog;
use tms_core::enumerate::{build_architecture, ModeSequence};
use tms_core::valveplan::{plan_valves, select_valve_set, CutSet, PlanOptions, ValveState};

proptest! {
    #[test]
    fn selection_is_the_exhaustive_optimum(
        raw in prop::collection::vec(prop::collection::vec(prop::collection::btree_set(0usize..12, 0..5), 1..4), 1..6)
    ) {
        let per_mode: BTreeMap<u8, Vec<CutSet>> = raw
            .into_iter()
            .enumerate()
            .map(|(m, sets)| {
                let m = m as u8 + 1;
                (m, sets.into_iter().map(|edge_ids| CutSet { mode_id: m, edge_ids }).collect())
            })
            .collect();
        let plan = select_valve_set(&per_mode).unwrap();
        prop_assert_eq!(&plan.valve_edges, &exhaustive(&per_mode));
        for (m, sets) in &per_mode {
            let closed = plan.closed_in(*m);
            prop_assert!(sets.iter().any(|c| c.edge_ids == closed));
            prop_assert_eq!(plan.states[m].len(), plan.valve_edges.len());
        }
    }
}

#[test]
fn worked_examples() {
    let c = |m: u8, e: &[usize]| CutSet { mode_id: m, edge_ids: e.iter().copied().collect() };
    let one = BTreeMap::from([(1, vec![c(1, &[1, 2]), c(1, &[3])])]);
    assert_eq!(select_valve_set(&one).unwrap().valve_edges, BTreeSet::from([3]));
    let two = BTreeMap::from([(1, vec![c(1, &[1]), c(1, &[2])]), (2, vec![c(2, &[1]), c(2, &[3])])]);
    let plan = select_valve_set(&two).unwrap();
    assert_eq!(plan.valve_edges, BTreeSet::from([1]));
    assert_eq!(plan.states[&1][&1], ValveState::Closed);
    assert_eq!(plan.states[&2][&1], ValveState::Closed);
}

/// Architectures over a handful of modes stay small enough for the
/// exhaustive oracle.
#[test]
fn small_architectures_get_optimal_valve_sets() {
    let full = ModeCatalog::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut checked = 0;
    for trial in 0..200 {
        let mut ids = full.ids();
        ids.shuffle(&mut rng);
        ids.truncate(2 + trial % 2);
        let sub = ModeCatalog::new(ids.iter().map(|&m| full.mode(m).unwrap().clone()).collect()).unwrap();
        let (g, traces) = build_architecture(&ModeSequence { order: ids.clone(), seed: 9 }, &sub).unwrap();
        let (plan, per_mode) = plan_valves(&g, &traces, &sub, &PlanOptions::default()).unwrap();
        if positions(&per_mode).len() > 12 {
            continue;
        }
        checked += 1;
        assert_eq!(plan.valve_edges.len(), exhaustive(&per_mode).len(), "modes {ids:?}");
    }
    assert!(checked >= 20, "only {checked} small cases");
}

#[test]
fn reference_architectures_within_bound_are_optimal() {
    let catalog = ModeCatalog::standard();
    for a in &common::reference().architectures {
        let (plan, per_mode) = plan_valves(&a.graph, &a.traces, &catalog, &PlanOptions::default()).unwrap();
        assert_eq!(plan, a.valve_plan);
        if positions(&per_mode).len() <= 12 {
            assert_eq!(plan.valve_edges.len(), exhaustive(&per_mode).len(), "{}", a.id);
        }
    }
}
