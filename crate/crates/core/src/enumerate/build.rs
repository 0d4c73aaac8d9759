use std::collections::BTreeSet;

use super::{LoopTrace, ModeSequence, TraceCycle};
use crate::cycles::{shortest_cycle_through, shortest_path, Cycle, Digraph};
use crate::domain::{
    constraint_graph, transfer_groups, ArchGraph, ComponentId, ModeCatalog, NodeKind, Provenance, TransferEdge,
    TransferGroup,
};
use crate::{Error, Result};

/// Graph under construction. Every line is created as part of a directed
/// coolant cycle; the direction it was created with is kept in `flow` so
/// later reuse only picks cycles that can share one global orientation.
struct Builder {
    graph: ArchGraph,
    flow: Digraph,
}

impl Builder {
    fn new() -> Self {
        let graph = ArchGraph::initial();
        let mut flow = Digraph::new();
        for n in &graph.nodes {
            flow.add_node(n.id);
        }
        Self { graph, flow }
    }

    fn node_of(&self, c: ComponentId) -> usize {
        c.index()
    }

    fn is_junction(&self, n: usize) -> bool {
        // components occupy ids 0..7 in the initial graph
        n >= ComponentId::ALL.len()
    }

    fn line(&mut self, from: usize, to: usize) -> usize {
        let id = self.graph.add_edge(from, to);
        self.flow.add_arc(from, to, id);
        id
    }

    fn junction(&mut self) -> usize {
        let j = self.graph.add_junction();
        self.flow.add_node(j);
        j
    }

    /// `a -> b -> j -> a` through one new junction.
    fn fresh_loop(&mut self, t: TransferEdge) -> Cycle {
        let (a, b) = (self.node_of(t.from), self.node_of(t.to));
        let j = self.junction();
        let e1 = self.line(a, b);
        let e2 = self.line(b, j);
        let e3 = self.line(j, a);
        Cycle { nodes: vec![a, b, j], arcs: vec![e1, e2, e3] }
    }

    /// Supply/return manifold `hub -> js -> leaf -> jr -> hub` with one
    /// parallel branch per leaf.
    fn manifold(&mut self, hub: ComponentId, leaves: &[ComponentId]) -> Vec<Cycle> {
        let h = self.node_of(hub);
        let js = self.junction();
        let jr = self.junction();
        let supply = self.line(h, js);
        let mut branches = Vec::new();
        for &leaf in leaves {
            let l = self.node_of(leaf);
            let out = self.line(js, l);
            let back = self.line(l, jr);
            branches.push((l, out, back));
        }
        let ret = self.line(jr, h);
        branches
            .into_iter()
            .map(|(l, out, back)| Cycle { nodes: vec![h, js, l, jr], arcs: vec![supply, out, back, ret] })
            .collect()
    }

    fn build_fresh(&mut self, mut pending: Vec<TransferEdge>) -> Vec<Cycle> {
        let mut cycles = Vec::new();
        while !pending.is_empty() {
            let hub = pending
                .iter()
                .flat_map(|t| [t.from, t.to])
                .find(|&c| pending.iter().filter(|t| t.touches(c)).count() >= 2);
            match hub {
                Some(hub) => {
                    let (spokes, rest): (Vec<_>, Vec<_>) = pending.into_iter().partition(|t| t.touches(hub));
                    let leaves: Vec<ComponentId> =
                        spokes.iter().map(|t| if t.from == hub { t.to } else { t.from }).collect();
                    cycles.extend(self.manifold(hub, &leaves));
                    pending = rest;
                }
                None => {
                    for t in pending.drain(..) {
                        cycles.push(self.fresh_loop(t));
                    }
                }
            }
        }
        cycles
    }

    fn incorporate_group(&mut self, mode_id: u8, group: &TransferGroup, claimed: &BTreeSet<usize>) -> LoopTrace {
        let members: BTreeSet<usize> = group.components.iter().map(|&c| self.node_of(c)).collect();
        let mut cycles: Vec<Cycle> = Vec::new();
        let mut pending = Vec::new();
        for t in &group.edges {
            let (a, b) = (self.node_of(t.from), self.node_of(t.to));
            if cycles.iter().any(|c| c.contains(a) && c.contains(b)) {
                continue;
            }
            let allowed = |n: usize| members.contains(&n) || (self.is_junction(n) && !claimed.contains(&n));
            if let Some(c) = shortest_cycle_through(&self.flow, a, b, &allowed, &|_| true) {
                cycles.push(c);
                continue;
            }
            // one new line closing an existing path
            let back = shortest_path(&self.flow, b, a, &allowed);
            let fwd = shortest_path(&self.flow, a, b, &allowed);
            let use_back = match (&back, &fwd) {
                (Some(x), Some(y)) => x.1.len() <= y.1.len(),
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (None, None) => {
                    pending.push(*t);
                    continue;
                }
            };
            if use_back {
                let (nodes, arcs) = back.unwrap();
                let e = self.line(a, b);
                let mut c = Cycle { nodes: vec![a], arcs: vec![e] };
                c.nodes.extend(&nodes[..nodes.len() - 1]);
                c.arcs.extend(arcs);
                cycles.push(c);
            } else {
                let (nodes, mut arcs) = fwd.unwrap();
                arcs.push(self.line(b, a));
                cycles.push(Cycle { nodes, arcs });
            }
        }
        cycles.extend(self.build_fresh(pending));

        let mut node_ids = BTreeSet::new();
        let mut edge_ids = BTreeSet::new();
        for c in &cycles {
            node_ids.extend(c.nodes.iter().copied());
            edge_ids.extend(c.arcs.iter().copied());
        }
        LoopTrace {
            mode_id,
            group_index: group.index,
            node_ids,
            edge_ids,
            cycles: cycles.into_iter().map(|c| TraceCycle { nodes: c.nodes, edges: c.arcs }).collect(),
        }
    }
}

/// Folds the modes of `seq` into the initial seven-component graph.
///
/// For every transfer group of the active mode an existing directed cycle is
/// reused when one covers the transfer, stays on the group's components and
/// on junctions not already used by another group of the same mode. Failing
/// that, an existing path between the two components is closed with one new
/// line; only then are fresh lines and junctions added. Returns the graph (no
/// valves yet) and the per-mode, per-group traces.
pub fn build_architecture(seq: &ModeSequence, catalog: &ModeCatalog) -> Result<(ArchGraph, Vec<LoopTrace>)> {
    let mut b = Builder::new();
    let mut traces = Vec::new();
    for &mode_id in &seq.order {
        let mode = catalog.mode(mode_id)?;
        let groups = transfer_groups(&constraint_graph(mode));
        let mut claimed = BTreeSet::new();
        let mut mode_traces = Vec::with_capacity(groups.len());
        for g in &groups {
            let trace = b.incorporate_group(mode_id, g, &claimed);
            claimed.extend(trace.node_ids.iter().copied());
            mode_traces.push(trace);
        }
        check_mode_traces(&b.graph, &groups, &mode_traces)?;
        traces.extend(mode_traces);
    }
    b.graph.provenance = Provenance { seed: seq.seed, sequence: seq.order.clone() };
    Ok((b.graph, traces))
}

/// Construction-time compliance: each trace covers its transfers with cycles,
/// touches no foreign component, and distinct groups share no node.
fn check_mode_traces(graph: &ArchGraph, groups: &[TransferGroup], traces: &[LoopTrace]) -> Result<()> {
    for (g, t) in groups.iter().zip(traces) {
        for n in &t.node_ids {
            if let Some(NodeKind::Component { label }) = graph.node(*n).map(|x| x.kind) {
                if !g.components.contains(&label) {
                    return Err(Error::ConstructionFailed(format!(
                        "mode {} group {} visits {label}",
                        t.mode_id, g.index
                    )));
                }
            }
        }
        for tr in &g.edges {
            let (a, b) = (tr.from.index(), tr.to.index());
            if !t.cycles.iter().any(|c| c.nodes.contains(&a) && c.nodes.contains(&b)) {
                return Err(Error::ConstructionFailed(format!("mode {} has no cycle for {tr}", t.mode_id)));
            }
        }
    }
    for (i, a) in traces.iter().enumerate() {
        for b in &traces[i + 1..] {
            if let Some(n) = a.node_ids.intersection(&b.node_ids).next() {
                return Err(Error::ConstructionFailed(format!(
                    "mode {} groups {} and {} share node {n}",
                    a.mode_id, a.group_index, b.group_index
                )));
            }
        }
    }
    Ok(())
}
