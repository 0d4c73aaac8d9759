mod common;

use std::collections::BTreeMap;

use tms_core::assess::{assess_all, assess_all_with, assess_undirected, AssessOptions};
use tms_core::domain::ModeCatalog;
use tms_core::preprocess::{
    insert_pumps, label_nodes, orient, reify_valves, remove_redundant, DirectedArch, NodeLabel, PUMP_SITES,
};

fn unpumped(d: &DirectedArch, catalog: &ModeCatalog) -> BTreeMap<u8, bool> {
    assess_all_with(d, catalog, AssessOptions { require_pumps: false }).unwrap().pass_map()
}

#[test]
fn verdicts_survive_every_rewrite() {
    let catalog = ModeCatalog::standard();
    for a in &common::reference().architectures {
        let undirected = assess_undirected(&a.graph, &a.valve_plan, &catalog).pass_map();
        let oriented = orient(&a.graph, &a.valve_plan, &a.traces).unwrap();
        let reduced = remove_redundant(&oriented);
        let pumped = insert_pumps(&reduced).unwrap();
        let labeled = label_nodes(&reify_valves(&pumped)).unwrap();
        assert_eq!(unpumped(&oriented, &catalog), undirected, "{}", a.id);
        assert_eq!(unpumped(&reduced, &catalog), undirected, "{}", a.id);
        assert_eq!(assess_all(&labeled, &catalog).unwrap().pass_map(), undirected, "{}", a.id);
        assert_eq!(labeled, a.directed, "{}", a.id);
    }
}

#[test]
fn labeled_graphs_are_clean() {
    for a in &common::reference().architectures {
        let d = &a.directed;
        d.validate().unwrap();
        for n in d.nodes() {
            let l = d.label(n).unwrap();
            if l.is_junction() {
                assert!(d.degree(n) >= 3, "{}: junction {n} of degree {}", a.id, d.degree(n));
            }
            assert_ne!(l, NodeLabel::Junction, "{}: unlabeled junction {n}", a.id);
        }
        let pumps = d.pumps();
        assert_eq!(pumps.len(), 4, "{}", a.id);
        for (pump, comp, inlet) in PUMP_SITES {
            let p = pumps[&pump];
            let c = d.component_node(comp).unwrap();
            let next = if inlet {
                d.out_arcs(p).map(|x| x.to).collect::<Vec<_>>()
            } else {
                d.in_arcs(p).map(|x| x.from).collect::<Vec<_>>()
            };
            assert_eq!(next, vec![c], "{}: pump {pump} misplaced", a.id);
        }
    }
}

#[test]
fn directed_json_round_trips() {
    for a in &common::reference().architectures {
        let text = serde_json::to_string(&a.directed).unwrap();
        let back: DirectedArch = serde_json::from_str(&text).unwrap();
        assert_eq!(back, a.directed);
    }
}
