#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::Rng;
use tms_core::assess::assess_all;
use tms_core::batch::{enumerate_architectures, Enumeration};
use tms_core::domain::{ArchEdge, ArchGraph, ArchNode, ComponentId, ModeCatalog, NodeKind};
use tms_core::exec::Exec;
use tms_core::preprocess::{add_closed_bypass, DirectedArch};
use tms_core::thermalsim::Wiring;
use tms_core::valveplan::{CutSet, PlanOptions};

/// The reference workload: 150 sequences from seed 42.
pub fn reference() -> &'static Enumeration {
    static CELL: OnceLock<Enumeration> = OnceLock::new();
    CELL.get_or_init(|| {
        enumerate_architectures(&ModeCatalog::standard(), 42, 150, &PlanOptions::default(), Exec::Parallel)
            .expect("reference enumeration")
    })
}

/// Seven components plus `junctions` junctions joined by `edges` random
/// lines (multi-lines allowed, no self loops), each a valve with p = 0.3.
pub fn random_arch(rng: &mut impl Rng, junctions: usize, edges: usize) -> ArchGraph {
    let mut g = ArchGraph::initial();
    for _ in 0..junctions {
        g.add_junction();
    }
    let n = g.nodes.len();
    for _ in 0..edges {
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let id = g.add_edge(a, b);
        g.edges.last_mut().unwrap().valve = rng.gen_bool(0.3);
        debug_assert_eq!(g.edges.last().unwrap().id, id);
    }
    g
}

/// Same graph with junction ids permuted, node and edge order shuffled,
/// edge ids renamed and edge endpoints flipped at random.
pub fn relabel(g: &ArchGraph, rng: &mut impl Rng) -> ArchGraph {
    let junctions: Vec<usize> = g.nodes.iter().filter(|n| n.kind == NodeKind::Junction).map(|n| n.id).collect();
    let mut fresh: Vec<usize> = (100..100 + junctions.len()).collect();
    fresh.shuffle(rng);
    let map: BTreeMap<usize, usize> = junctions.iter().copied().zip(fresh).collect();
    let m = |n: usize| map.get(&n).copied().unwrap_or(n);
    let mut nodes: Vec<ArchNode> = g.nodes.iter().map(|n| ArchNode { id: m(n.id), kind: n.kind }).collect();
    nodes.shuffle(rng);
    let mut ids: Vec<usize> = (0..g.edges.len()).map(|i| 500 + 3 * i).collect();
    ids.shuffle(rng);
    let mut edges: Vec<ArchEdge> = g
        .edges
        .iter()
        .zip(ids)
        .map(|(e, id)| {
            let (a, b) = if rng.gen_bool(0.5) { (e.a, e.b) } else { (e.b, e.a) };
            ArchEdge { id, a: m(a), b: m(b), valve: e.valve }
        })
        .collect();
    edges.shuffle(rng);
    ArchGraph { nodes, edges, provenance: g.provenance.clone() }
}

fn edge_multiset(g: &ArchGraph, map: &dyn Fn(usize) -> usize) -> Vec<(usize, usize, bool)> {
    let mut v: Vec<(usize, usize, bool)> = g
        .edges
        .iter()
        .map(|e| {
            let (a, b) = (map(e.a), map(e.b));
            (a.min(b), a.max(b), e.valve)
        })
        .collect();
    v.sort_unstable();
    v
}

/// Colored isomorphism by trying every bijection of junctions.
/// Components keep their identity, as each has its own color.
pub fn brute_isomorphic(a: &ArchGraph, b: &ArchGraph) -> bool {
    let ja: Vec<usize> = a.nodes.iter().filter(|n| n.kind == NodeKind::Junction).map(|n| n.id).collect();
    let jb: Vec<usize> = b.nodes.iter().filter(|n| n.kind == NodeKind::Junction).map(|n| n.id).collect();
    if ja.len() != jb.len() || a.edges.len() != b.edges.len() {
        return false;
    }
    let comp = |g: &ArchGraph| -> BTreeMap<usize, usize> {
        g.nodes
            .iter()
            .filter_map(|n| match n.kind {
                NodeKind::Component { label } => Some((n.id, label.index())),
                NodeKind::Junction => None,
            })
            .collect()
    };
    let (ca, cb) = (comp(a), comp(b));
    // Components to their color index in both graphs; junctions to slots.
    let target =
        edge_multiset(b, &|n| cb.get(&n).copied().unwrap_or_else(|| 1000 + jb.iter().position(|&x| x == n).unwrap()));
    let mut perm: Vec<usize> = (0..ja.len()).collect();
    loop {
        let f = |n: usize| ca.get(&n).copied().unwrap_or_else(|| 1000 + perm[ja.iter().position(|&x| x == n).unwrap()]);
        if edge_multiset(a, &f) == target {
            return true;
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Smallest union over every combination of one candidate per mode, and
/// the lexicographically smallest such union.
pub fn exhaustive(per_mode: &BTreeMap<u8, Vec<CutSet>>) -> BTreeSet<usize> {
    let lists: Vec<&Vec<CutSet>> = per_mode.values().collect();
    let mut best: Option<BTreeSet<usize>> = None;
    let mut idx = vec![0usize; lists.len()];
    loop {
        let u: BTreeSet<usize> = idx.iter().zip(&lists).flat_map(|(&i, l)| l[i].edge_ids.iter().copied()).collect();
        let better = match &best {
            None => true,
            Some(b) => (u.len(), u.iter().collect::<Vec<_>>()) < (b.len(), b.iter().collect::<Vec<_>>()),
        };
        if better {
            best = Some(u);
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return best.unwrap();
            }
            idx[k] += 1;
            if idx[k] < lists[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

pub fn positions(per_mode: &BTreeMap<u8, Vec<CutSet>>) -> BTreeSet<usize> {
    per_mode.values().flatten().flat_map(|c| c.edge_ids.iter().copied()).collect()
}

/// Mode-2 variant with a closed bypass across the first two arcs of the
/// LCC loop, which leaves two more dead junctions on that loop.
pub fn lcc_bypass(d: &DirectedArch, catalog: &ModeCatalog) -> DirectedArch {
    let report = assess_all(d, catalog).unwrap();
    let lcc = d.component_node(ComponentId::Lcc).unwrap();
    let l = report.loops[&2].iter().find(|l| l.node_ids.contains(&lcc)).unwrap();
    let arcs: Vec<usize> = l.arc_ids.iter().copied().collect();
    add_closed_bypass(d, arcs[0], arcs[1]).unwrap()
}

pub fn lcc_dead_junctions(d: &DirectedArch, catalog: &ModeCatalog) -> usize {
    let w = Wiring::from_directed(d, &assess_all(d, catalog).unwrap());
    let m = w.mode(2).unwrap();
    m.loops.iter().find(|l| l.components.contains(&ComponentId::Lcc)).unwrap().unused_junctions
}
