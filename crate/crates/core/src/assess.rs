//! Per-mode verification: with the mode's closed valves removed, every
//! required transfer needs a pumped coolant cycle, groups must not share
//! coolant, and no coolant may reach a component outside its group.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::cycles::{shortest_cycle_through, Digraph};
use crate::domain::{
    constraint_graph, transfer_groups, ArchGraph, ComponentId, ConstraintGraph, ModeCatalog, NodeKind, TransferGroup,
};
use crate::preprocess::{DirectedArch, NodeLabel};
use crate::valveplan::{ValvePlan, ValveState};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    NoCycle,
    IsolationBreach,
    FlowRestrictionBreach,
    NoPump,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

/// Coolant loop of one transfer group in one mode.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Loop {
    #[serde(rename = "mode")]
    pub mode_id: u8,
    #[serde(rename = "group")]
    pub group_index: usize,
    /// Directed cycles, one per transfer not already covered.
    pub cycles: Vec<Vec<usize>>,
    pub node_ids: BTreeSet<usize>,
    pub arc_ids: BTreeSet<usize>,
    pub pump_ids: BTreeSet<u8>,
    /// Every node the loop's coolant can reach with the mode's valves set.
    pub region: BTreeSet<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeRecord {
    pub id: u8,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<Violation>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AssessmentReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub architecture: Option<String>,
    pub modes: Vec<ModeRecord>,
    pub loops: BTreeMap<u8, Vec<Loop>>,
}

impl AssessmentReport {
    pub fn all_pass(&self) -> bool {
        self.modes.iter().all(|m| m.pass)
    }

    pub fn pass_map(&self) -> BTreeMap<u8, bool> {
        self.modes.iter().map(|m| (m.id, m.pass)).collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AssessOptions {
    /// Demand a pump on every cycle. Off for graphs that have no pumps yet.
    pub require_pumps: bool,
}

impl Default for AssessOptions {
    fn default() -> Self {
        Self { require_pumps: true }
    }
}

/// The coolant network of one mode, in a form both directed and undirected
/// architectures reduce to.
#[derive(Clone, Debug)]
pub struct FlowGraph {
    pub graph: Digraph,
    pub components: BTreeMap<ComponentId, usize>,
    pub pumps: BTreeMap<usize, u8>,
}

impl FlowGraph {
    pub fn from_directed(d: &DirectedArch) -> Self {
        let mut components = BTreeMap::new();
        let mut pumps = BTreeMap::new();
        for (&n, &l) in &d.labels {
            match l {
                NodeLabel::Component(c) => {
                    components.insert(c, n);
                }
                NodeLabel::Pump(p) => {
                    pumps.insert(n, p);
                }
                _ => {}
            }
        }
        Self { graph: d.digraph(), components, pumps }
    }

    /// Lines open in both directions; a cycle may not use one line twice.
    pub fn from_undirected(arch: &ArchGraph, closed: &BTreeSet<usize>) -> Self {
        let mut graph = Digraph::new();
        let mut components = BTreeMap::new();
        for n in &arch.nodes {
            graph.add_node(n.id);
            if let NodeKind::Component { label } = n.kind {
                components.insert(label, n.id);
            }
        }
        for e in arch.edges.iter().filter(|e| !closed.contains(&e.id)) {
            graph.add_arc(e.a, e.b, e.id);
            graph.add_arc(e.b, e.a, e.id);
        }
        Self { graph, components, pumps: BTreeMap::new() }
    }

    fn component_at(&self, n: usize) -> Option<ComponentId> {
        self.components.iter().find(|(_, &m)| m == n).map(|(c, _)| *c)
    }
}

/// Removes every closed valve of `mode_id`: closed valve nodes with their
/// two lines, and lines still carrying a closed valve.
pub fn prune_closed(d: &DirectedArch, mode_id: u8) -> Result<DirectedArch> {
    let mut closed_valves = BTreeSet::new();
    for v in d.valve_ids() {
        if d.state(mode_id, v)? == ValveState::Closed {
            closed_valves.insert(v);
        }
    }
    let closed_nodes: BTreeSet<usize> =
        d.valve_nodes().into_iter().filter(|(v, _)| closed_valves.contains(v)).map(|(_, n)| n).collect();
    let mut out = d.clone();
    out.labels.retain(|n, _| !closed_nodes.contains(n));
    out.arcs.retain(|a| {
        !closed_nodes.contains(&a.from)
            && !closed_nodes.contains(&a.to)
            && !a.valves.iter().any(|v| closed_valves.contains(v))
    });
    Ok(out)
}

/// Finds, for every transfer, a directed cycle through both components and
/// (when required) a pump. Transfers already covered by an earlier cycle of
/// the same group reuse it.
pub fn check_cycles(flow: &FlowGraph, cg: &ConstraintGraph, opts: AssessOptions) -> (Vec<Loop>, Vec<Violation>) {
    let mut loops = Vec::new();
    let mut violations = Vec::new();
    for group in transfer_groups(cg) {
        match group_loop(flow, cg.mode_id, &group, opts) {
            Ok(l) => loops.push(l),
            Err(v) => violations.push(v),
        }
    }
    (loops, violations)
}

fn group_loop(flow: &FlowGraph, mode_id: u8, group: &TransferGroup, opts: AssessOptions) -> Result<Loop, Violation> {
    let mut cycles: Vec<crate::cycles::Cycle> = Vec::new();
    let has_pump = |c: &crate::cycles::Cycle| c.nodes.iter().any(|n| flow.pumps.contains_key(n));
    for t in &group.edges {
        let (Some(&a), Some(&b)) = (flow.components.get(&t.from), flow.components.get(&t.to)) else {
            return Err(Violation {
                kind: ViolationKind::NoCycle,
                detail: format!("{t}: component missing from the graph"),
            });
        };
        let pumped = |c: &crate::cycles::Cycle| !opts.require_pumps || has_pump(c);
        if cycles.iter().any(|c| c.contains(a) && c.contains(b) && pumped(c)) {
            continue;
        }
        match shortest_cycle_through(&flow.graph, a, b, &|_| true, &pumped) {
            Some(c) => cycles.push(c),
            None => {
                let kind = if opts.require_pumps
                    && shortest_cycle_through(&flow.graph, a, b, &|_| true, &|_| true).is_some()
                {
                    ViolationKind::NoPump
                } else {
                    ViolationKind::NoCycle
                };
                let detail = match kind {
                    ViolationKind::NoPump => format!("{t}: every cycle through both components lacks a pump"),
                    _ => format!("{t}: no directed cycle through both components"),
                };
                return Err(Violation { kind, detail });
            }
        }
    }
    let node_ids: BTreeSet<usize> = cycles.iter().flat_map(|c| c.nodes.iter().copied()).collect();
    let arc_ids = cycles.iter().flat_map(|c| c.arcs.iter().copied()).collect();
    let pump_ids = node_ids.iter().filter_map(|n| flow.pumps.get(n).copied()).collect();
    let region = flow.graph.weak_component(node_ids.iter().copied());
    Ok(Loop {
        mode_id,
        group_index: group.index,
        cycles: cycles.into_iter().map(|c| c.nodes).collect(),
        node_ids,
        arc_ids,
        pump_ids,
        region,
    })
}

/// Loops of different groups must not be able to exchange coolant: their
/// regions, and hence their node and line sets, are disjoint.
pub fn check_isolation(loops: &[Loop]) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, a) in loops.iter().enumerate() {
        for b in &loops[i + 1..] {
            if a.group_index == b.group_index {
                continue;
            }
            let shared = a
                .node_ids
                .intersection(&b.node_ids)
                .next()
                .map(|n| format!("node {n}"))
                .or_else(|| a.arc_ids.intersection(&b.arc_ids).next().map(|e| format!("line {e}")))
                .or_else(|| a.region.intersection(&b.region).next().map(|n| format!("node {n}")));
            if let Some(what) = shared {
                out.push(Violation {
                    kind: ViolationKind::IsolationBreach,
                    detail: format!("groups {} and {} share {what}", a.group_index, b.group_index),
                });
            }
        }
    }
    out
}

/// Components a group's coolant may visit: the endpoints of its transfers
/// and their neighbors in the constraint graph.
pub fn allowed_components(cg: &ConstraintGraph, group: &TransferGroup) -> BTreeSet<ComponentId> {
    let mut allowed = BTreeSet::new();
    for t in &group.edges {
        for c in [t.from, t.to] {
            allowed.insert(c);
            allowed.extend(cg.neighbors(c));
        }
    }
    allowed
}

/// No loop's coolant may reach a component outside its allowance.
pub fn check_restriction(flow: &FlowGraph, loops: &[Loop], cg: &ConstraintGraph) -> Vec<Violation> {
    let groups = transfer_groups(cg);
    let mut out = Vec::new();
    for l in loops {
        let Some(group) = groups.iter().find(|g| g.index == l.group_index) else {
            continue;
        };
        let allowed = allowed_components(cg, group);
        for &n in &l.region {
            if let Some(c) = flow.component_at(n) {
                if !allowed.contains(&c) {
                    out.push(Violation {
                        kind: ViolationKind::FlowRestrictionBreach,
                        detail: format!("group {} coolant reaches {c}", l.group_index),
                    });
                }
            }
        }
    }
    out
}

fn assess_flow(flow: &FlowGraph, cg: &ConstraintGraph, opts: AssessOptions) -> (ModeRecord, Vec<Loop>) {
    let (loops, mut violations) = check_cycles(flow, cg, opts);
    violations.extend(check_isolation(&loops));
    violations.extend(check_restriction(flow, &loops, cg));
    let record = ModeRecord { id: cg.mode_id, pass: violations.is_empty(), violations };
    (record, loops)
}

/// Runs every catalog mode against a directed architecture.
pub fn assess_all(d: &DirectedArch, catalog: &ModeCatalog) -> Result<AssessmentReport> {
    assess_all_with(d, catalog, AssessOptions::default())
}

pub fn assess_all_with(d: &DirectedArch, catalog: &ModeCatalog, opts: AssessOptions) -> Result<AssessmentReport> {
    let mut report = AssessmentReport::default();
    for mode in &catalog.modes {
        let pruned = prune_closed(d, mode.id)?;
        let flow = FlowGraph::from_directed(&pruned);
        let (record, loops) = assess_flow(&flow, &constraint_graph(mode), opts);
        if record.pass {
            report.loops.insert(mode.id, loops);
        }
        report.modes.push(record);
    }
    Ok(report)
}

/// The same checks on the undirected architecture, lines free to carry
/// coolant either way and pumps not yet placed.
pub fn assess_undirected(arch: &ArchGraph, plan: &ValvePlan, catalog: &ModeCatalog) -> AssessmentReport {
    let mut report = AssessmentReport::default();
    let opts = AssessOptions { require_pumps: false };
    for mode in &catalog.modes {
        let flow = FlowGraph::from_undirected(arch, &plan.closed_in(mode.id));
        let (record, loops) = assess_flow(&flow, &constraint_graph(mode), opts);
        if record.pass {
            report.loops.insert(mode.id, loops);
        }
        report.modes.push(record);
    }
    report
}
