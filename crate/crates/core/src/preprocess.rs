//! Conversion of a valved architecture into a simulation-ready directed
//! graph: orientation, removal of pass-through junctions, pump insertion,
//! valve nodes and junction labels.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::cycles::Digraph;
use crate::domain::{ArchGraph, ComponentId, NodeKind};
use crate::enumerate::LoopTrace;
use crate::valveplan::{ValvePlan, ValveState};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeLabel {
    Component(ComponentId),
    /// Junction not yet labeled by degree.
    Junction,
    TJunction,
    CrossJunction,
    Valve(usize),
    Pump(u8),
}

impl NodeLabel {
    pub fn is_junction(self) -> bool {
        matches!(self, NodeLabel::Junction | NodeLabel::TJunction | NodeLabel::CrossJunction)
    }

    fn encode(self) -> String {
        match self {
            NodeLabel::Component(c) => c.name().to_string(),
            NodeLabel::Junction => "junction".into(),
            NodeLabel::TJunction => "t_junction".into(),
            NodeLabel::CrossJunction => "cross_junction".into(),
            NodeLabel::Valve(v) => format!("valve:{v}"),
            NodeLabel::Pump(p) => format!("pump:{p}"),
        }
    }

    fn decode(s: &str) -> Option<Self> {
        if let Some(v) = s.strip_prefix("valve:") {
            return v.parse().ok().map(NodeLabel::Valve);
        }
        if let Some(p) = s.strip_prefix("pump:") {
            return p.parse().ok().map(NodeLabel::Pump);
        }
        match s {
            "junction" => Some(NodeLabel::Junction),
            "t_junction" => Some(NodeLabel::TJunction),
            "cross_junction" => Some(NodeLabel::CrossJunction),
            _ => ComponentId::ALL.into_iter().find(|c| c.name() == s).map(NodeLabel::Component),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arc {
    pub id: usize,
    pub from: usize,
    pub to: usize,
    /// Valves sitting on this line, upstream first. Empty once valves are
    /// reified as nodes.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub valves: Vec<usize>,
}

pub type ValveStates = BTreeMap<u8, BTreeMap<usize, ValveState>>;

/// Directed architecture. Valve states are keyed by valve id, which stays
/// fixed through every rewrite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "DirectedArchJson", try_from = "DirectedArchJson")]
pub struct DirectedArch {
    pub labels: BTreeMap<usize, NodeLabel>,
    pub arcs: Vec<Arc>,
    pub valve_states: ValveStates,
}

#[derive(Serialize, Deserialize)]
struct DirectedArchJson {
    nodes: Vec<usize>,
    arcs: Vec<Arc>,
    labels: BTreeMap<usize, String>,
    valve_states: ValveStates,
}

impl From<DirectedArch> for DirectedArchJson {
    fn from(d: DirectedArch) -> Self {
        Self {
            nodes: d.labels.keys().copied().collect(),
            labels: d.labels.iter().map(|(&n, l)| (n, l.encode())).collect(),
            arcs: d.arcs,
            valve_states: d.valve_states,
        }
    }
}

impl TryFrom<DirectedArchJson> for DirectedArch {
    type Error = String;

    fn try_from(j: DirectedArchJson) -> std::result::Result<Self, String> {
        let mut labels = BTreeMap::new();
        for n in j.nodes {
            let s = j.labels.get(&n).ok_or_else(|| format!("node {n} has no label"))?;
            let l = NodeLabel::decode(s).ok_or_else(|| format!("unknown label {s:?}"))?;
            labels.insert(n, l);
        }
        let d = DirectedArch { labels, arcs: j.arcs, valve_states: j.valve_states };
        d.check_arcs().map_err(|e| e.to_string())?;
        Ok(d)
    }
}

impl DirectedArch {
    pub fn label(&self, n: usize) -> Option<NodeLabel> {
        self.labels.get(&n).copied()
    }

    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.labels.keys().copied()
    }

    pub fn component_node(&self, c: ComponentId) -> Option<usize> {
        self.labels.iter().find(|(_, l)| **l == NodeLabel::Component(c)).map(|(n, _)| *n)
    }

    pub fn in_arcs(&self, n: usize) -> impl Iterator<Item = &Arc> + '_ {
        self.arcs.iter().filter(move |a| a.to == n)
    }

    pub fn out_arcs(&self, n: usize) -> impl Iterator<Item = &Arc> + '_ {
        self.arcs.iter().filter(move |a| a.from == n)
    }

    pub fn in_degree(&self, n: usize) -> usize {
        self.in_arcs(n).count()
    }

    pub fn out_degree(&self, n: usize) -> usize {
        self.out_arcs(n).count()
    }

    pub fn degree(&self, n: usize) -> usize {
        self.in_degree(n) + self.out_degree(n)
    }

    pub fn count(&self, pred: impl Fn(NodeLabel) -> bool) -> usize {
        self.labels.values().filter(|l| pred(**l)).count()
    }

    pub fn pumps(&self) -> BTreeMap<u8, usize> {
        self.labels
            .iter()
            .filter_map(|(&n, l)| match l {
                NodeLabel::Pump(p) => Some((*p, n)),
                _ => None,
            })
            .collect()
    }

    pub fn valve_nodes(&self) -> BTreeMap<usize, usize> {
        self.labels
            .iter()
            .filter_map(|(&n, l)| match l {
                NodeLabel::Valve(v) => Some((*v, n)),
                _ => None,
            })
            .collect()
    }

    /// Every valve id, whether still on an arc or already a node.
    pub fn valve_ids(&self) -> BTreeSet<usize> {
        let mut ids: BTreeSet<usize> = self.arcs.iter().flat_map(|a| a.valves.iter().copied()).collect();
        ids.extend(self.valve_nodes().keys().copied());
        ids
    }

    pub fn state(&self, mode: u8, valve: usize) -> Result<ValveState> {
        self.valve_states
            .get(&mode)
            .and_then(|m| m.get(&valve))
            .copied()
            .ok_or(Error::MissingValveState { valve, mode })
    }

    pub fn digraph(&self) -> Digraph {
        let mut g = Digraph::new();
        for n in self.nodes() {
            g.add_node(n);
        }
        for a in &self.arcs {
            g.add_arc(a.from, a.to, a.id);
        }
        g
    }

    fn next_node(&self) -> usize {
        self.labels.keys().next_back().map_or(0, |n| n + 1)
    }

    fn next_arc(&self) -> usize {
        self.arcs.iter().map(|a| a.id + 1).max().unwrap_or(0)
    }

    fn add_node(&mut self, label: NodeLabel) -> usize {
        let n = self.next_node();
        self.labels.insert(n, label);
        n
    }

    fn add_arc(&mut self, from: usize, to: usize, valves: Vec<usize>) -> usize {
        let id = self.next_arc();
        self.arcs.push(Arc { id, from, to, valves });
        id
    }

    fn arc_mut(&mut self, id: usize) -> &mut Arc {
        self.arcs.iter_mut().find(|a| a.id == id).expect("arc id present")
    }

    fn check_arcs(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        for a in &self.arcs {
            if !ids.insert(a.id) {
                return Err(Error::Invariant(format!("duplicate arc id {}", a.id)));
            }
            for end in [a.from, a.to] {
                if !self.labels.contains_key(&end) {
                    return Err(Error::Invariant(format!("arc {} references missing node {end}", a.id)));
                }
            }
        }
        Ok(())
    }

    /// Checks the invariants of a fully preprocessed architecture.
    pub fn validate(&self) -> Result<()> {
        self.check_arcs()?;
        for (&n, &l) in &self.labels {
            let (i, o) = (self.in_degree(n), self.out_degree(n));
            let ok = match l {
                NodeLabel::Pump(_) | NodeLabel::Valve(_) => i == 1 && o == 1,
                NodeLabel::TJunction => i + o == 3,
                NodeLabel::CrossJunction => i + o == 4,
                NodeLabel::Junction => false,
                NodeLabel::Component(_) => true,
            };
            if !ok {
                return Err(Error::Invariant(format!("node {n} labeled {} has in {i}, out {o}", l.encode())));
            }
        }
        if self.arcs.iter().any(|a| !a.valves.is_empty()) {
            return Err(Error::Invariant("valve left on an arc".into()));
        }
        let pumps = self.pumps();
        if pumps.keys().copied().collect::<Vec<_>>() != vec![1, 2, 3, 4] {
            return Err(Error::Invariant(format!("pumps present: {:?}", pumps.keys().collect::<Vec<_>>())));
        }
        Ok(())
    }
}

/// Assigns every line one direction so that each traced coolant cycle, in
/// every mode, runs consistently around.
///
/// Each trace cycle may be followed forwards or backwards; lines shared by
/// several cycles tie their choices together. The ties are solved with a
/// parity union-find; a contradiction means two modes need one line in
/// opposite directions.
pub fn orient(arch: &ArchGraph, plan: &ValvePlan, traces: &[LoopTrace]) -> Result<DirectedArch> {
    // cycle index -> (mode, [(edge, along a->b)])
    let mut cycles: Vec<(u8, Vec<(usize, bool)>)> = Vec::new();
    for t in traces {
        for c in &t.cycles {
            let mut dirs = Vec::with_capacity(c.edges.len());
            for (i, &e) in c.edges.iter().enumerate() {
                let edge = arch.edge(e).ok_or(Error::UnknownEdge(e))?;
                let (u, v) = (c.nodes[i], c.nodes[(i + 1) % c.nodes.len()]);
                let along = if (edge.a, edge.b) == (u, v) {
                    true
                } else if (edge.b, edge.a) == (u, v) {
                    false
                } else {
                    return Err(Error::Invariant(format!("trace step {u}->{v} does not match edge {e}")));
                };
                dirs.push((e, along));
            }
            cycles.push((t.mode_id, dirs));
        }
    }

    let mut parent: Vec<usize> = (0..cycles.len()).collect();
    let mut parity = vec![false; cycles.len()];
    fn find(parent: &mut [usize], parity: &mut [bool], x: usize) -> (usize, bool) {
        if parent[x] == x {
            return (x, false);
        }
        let (r, p) = find(parent, parity, parent[x]);
        parity[x] ^= p;
        parent[x] = r;
        (r, parity[x])
    }

    // first cycle (and its direction) seen on every edge
    let mut first: BTreeMap<usize, (usize, bool)> = BTreeMap::new();
    for (ci, (_, dirs)) in cycles.iter().enumerate() {
        for &(e, along) in dirs {
            let Some(&(cj, along_j)) = first.get(&e) else {
                first.insert(e, (ci, along));
                continue;
            };
            // flip(ci) ^ flip(cj) must equal along ^ along_j
            let need = along ^ along_j;
            let (ri, pi) = find(&mut parent, &mut parity, ci);
            let (rj, pj) = find(&mut parent, &mut parity, cj);
            if ri == rj {
                if pi ^ pj != need {
                    let (a, b) = (cycles[cj].0, cycles[ci].0);
                    return Err(Error::NoConsistentOrientation { first: a.min(b), second: a.max(b), edge: e });
                }
            } else {
                // attach the later root below the earlier so the earliest
                // cycle of every class keeps its traced direction
                let (hi, lo) = if ri < rj { (ri, rj) } else { (rj, ri) };
                parent[lo] = hi;
                parity[lo] = pi ^ pj ^ need;
            }
        }
    }

    let mut arcs = Vec::with_capacity(arch.edges.len());
    for e in &arch.edges {
        let forward = match first.get(&e.id) {
            Some(&(ci, along)) => {
                let (_, flip) = find(&mut parent, &mut parity, ci);
                along ^ flip
            }
            None => true,
        };
        let (from, to) = if forward { (e.a, e.b) } else { (e.b, e.a) };
        arcs.push(Arc { id: e.id, from, to, valves: if e.valve { vec![e.id] } else { Vec::new() } });
    }
    let labels = arch
        .nodes
        .iter()
        .map(|n| {
            let l = match n.kind {
                NodeKind::Component { label } => NodeLabel::Component(label),
                NodeKind::Junction => NodeLabel::Junction,
            };
            (n.id, l)
        })
        .collect();
    let valve_states = plan
        .states
        .iter()
        .map(|(&m, st)| (m, st.iter().filter(|(e, _)| plan.valve_edges.contains(e)).map(|(&e, &s)| (e, s)).collect()))
        .collect();
    Ok(DirectedArch { labels, arcs, valve_states })
}

/// Removes junctions with exactly one inbound and one outbound line,
/// joining their lines; valves of both lines move onto the joined line.
pub fn remove_redundant(d: &DirectedArch) -> DirectedArch {
    let mut d = d.clone();
    loop {
        let candidate = d.labels.iter().find_map(|(&n, &l)| {
            if !l.is_junction() {
                return None;
            }
            let ins: Vec<&Arc> = d.in_arcs(n).collect();
            let outs: Vec<&Arc> = d.out_arcs(n).collect();
            match (ins.as_slice(), outs.as_slice()) {
                ([i], [o]) if i.from != o.to && i.from != n => Some((n, i.id, o.id)),
                _ => None,
            }
        });
        let Some((n, i, o)) = candidate else {
            return d;
        };
        let out = d.arcs.iter().position(|a| a.id == o).unwrap();
        let out = d.arcs.remove(out);
        let inb = d.arc_mut(i);
        inb.to = out.to;
        inb.valves.extend(out.valves);
        d.labels.remove(&n);
    }
}

/// Pump positions: number, component, and whether the pump sits at the
/// inlet (`true`) or outlet of the component.
pub const PUMP_SITES: [(u8, ComponentId, bool); 4] = [
    (1, ComponentId::Chiller, true),
    (2, ComponentId::Lcc, false),
    (3, ComponentId::Radiator2, true),
    (4, ComponentId::DriveTrain, false),
];

/// Adds the four pumps. A pump sits on the single line at its port; when
/// the port has several lines, they are first gathered at a new junction.
pub fn insert_pumps(d: &DirectedArch) -> Result<DirectedArch> {
    let mut d = d.clone();
    for (pump, comp, inlet) in PUMP_SITES {
        let c = d.component_node(comp).ok_or_else(|| Error::Invariant(format!("{comp} missing for pump {pump}")))?;
        let port: Vec<usize> =
            if inlet { d.in_arcs(c).map(|a| a.id).collect() } else { d.out_arcs(c).map(|a| a.id).collect() };
        if port.is_empty() {
            return Err(Error::Invariant(format!(
                "{comp} has no {} line for pump {pump}",
                if inlet { "inlet" } else { "outlet" }
            )));
        }
        let p = d.add_node(NodeLabel::Pump(pump));
        match (port.as_slice(), inlet) {
            ([single], true) => {
                d.arc_mut(*single).to = p;
                d.add_arc(p, c, Vec::new());
            }
            ([single], false) => {
                d.arc_mut(*single).from = p;
                d.add_arc(c, p, Vec::new());
            }
            (many, true) => {
                let j = d.add_node(NodeLabel::Junction);
                for &a in many {
                    d.arc_mut(a).to = j;
                }
                d.add_arc(j, p, Vec::new());
                d.add_arc(p, c, Vec::new());
            }
            (many, false) => {
                let j = d.add_node(NodeLabel::Junction);
                for &a in many {
                    d.arc_mut(a).from = j;
                }
                d.add_arc(c, p, Vec::new());
                d.add_arc(p, j, Vec::new());
            }
        }
    }
    Ok(d)
}

/// Replaces every valve carried by a line with a valve node on that line.
pub fn reify_valves(d: &DirectedArch) -> DirectedArch {
    let mut d = d.clone();
    let carrying: Vec<usize> = d.arcs.iter().filter(|a| !a.valves.is_empty()).map(|a| a.id).collect();
    for id in carrying {
        let arc = d.arc_mut(id);
        let valves = std::mem::take(&mut arc.valves);
        let end = arc.to;
        let mut prev = None;
        for v in valves {
            let n = d.add_node(NodeLabel::Valve(v));
            match prev {
                None => d.arc_mut(id).to = n,
                Some(p) => {
                    d.add_arc(p, n, Vec::new());
                }
            }
            prev = Some(n);
        }
        d.add_arc(prev.expect("at least one valve"), end, Vec::new());
    }
    d
}

/// Labels junctions by degree: 3 is a T-junction, 4 a cross junction.
/// Higher degrees are split into a forward chain of junctions, inbound
/// lines attached first, so every inbound line still reaches every
/// outbound one.
pub fn label_nodes(d: &DirectedArch) -> Result<DirectedArch> {
    let mut d = d.clone();
    let junctions: Vec<usize> = d.labels.iter().filter(|(_, l)| l.is_junction()).map(|(n, _)| *n).collect();
    for j in junctions {
        let deg = d.degree(j);
        match deg {
            0..=2 => {
                return Err(Error::Invariant(format!("junction {j} has degree {deg}")));
            }
            3 => {
                d.labels.insert(j, NodeLabel::TJunction);
            }
            4 => {
                d.labels.insert(j, NodeLabel::CrossJunction);
            }
            _ => split_junction(&mut d, j, deg),
        }
    }
    for (&n, &l) in &d.labels {
        if let NodeLabel::Component(_) | NodeLabel::Pump(_) | NodeLabel::Valve(_) = l {
            if d.degree(n) == 0 {
                return Err(Error::Invariant(format!("node {n} ({}) is disconnected", l.encode())));
            }
        }
    }
    Ok(d)
}

fn split_junction(d: &mut DirectedArch, j: usize, deg: usize) {
    // external attachments per chain node
    let mut shares = Vec::new();
    if deg == 5 {
        shares = vec![2, 3];
    } else {
        shares.push(3);
        let mut left = deg - 3;
        while left > 3 {
            shares.push(2);
            left -= 2;
        }
        shares.push(left);
    }
    let mut ins: Vec<usize> = d.in_arcs(j).map(|a| a.id).collect();
    let outs: Vec<usize> = d.out_arcs(j).map(|a| a.id).collect();
    ins.sort_unstable();
    let mut order: Vec<(usize, bool)> = ins.into_iter().map(|a| (a, true)).collect();
    let mut outs = outs;
    outs.sort_unstable();
    order.extend(outs.into_iter().map(|a| (a, false)));

    let mut chain = vec![j];
    for _ in 1..shares.len() {
        let n = d.add_node(NodeLabel::Junction);
        chain.push(n);
    }
    let mut it = order.into_iter();
    for (k, &share) in shares.iter().enumerate() {
        for (arc, inbound) in it.by_ref().take(share) {
            let a = d.arc_mut(arc);
            if inbound {
                a.to = chain[k];
            } else {
                a.from = chain[k];
            }
        }
    }
    for w in chain.windows(2) {
        d.add_arc(w[0], w[1], Vec::new());
    }
    for &n in &chain {
        let label = if d.degree(n) == 3 { NodeLabel::TJunction } else { NodeLabel::CrossJunction };
        d.labels.insert(n, label);
    }
}

/// Orientation, redundant-junction removal, pumps, valve nodes and labels,
/// in that order. Errors name the stage that failed.
pub fn preprocess_pipeline(arch: &ArchGraph, plan: &ValvePlan, traces: &[LoopTrace]) -> Result<DirectedArch> {
    let d = orient(arch, plan, traces).map_err(|e| e.at_stage("orient"))?;
    let d = remove_redundant(&d);
    let d = insert_pumps(&d).map_err(|e| e.at_stage("insert_pumps"))?;
    let d = reify_valves(&d);
    let d = label_nodes(&d).map_err(|e| e.at_stage("label_nodes"))?;
    d.validate().map_err(|e| e.at_stage("validate"))?;
    Ok(d)
}

/// Joins the middles of lines `a` and `b` with a new line through a valve
/// that stays closed in every mode. The two new T-junctions each carry a
/// branch no loop uses, which is how a variant with extra dead branches is
/// built from a labeled architecture.
pub fn add_closed_bypass(d: &DirectedArch, a: usize, b: usize) -> Result<DirectedArch> {
    if a == b {
        return Err(Error::Invalid(format!("bypass needs two distinct lines, got {a} twice")));
    }
    let mut d = d.clone();
    let mut split = |id: usize| -> Result<usize> {
        let to = d.arcs.iter().find(|x| x.id == id).ok_or(Error::UnknownEdge(id))?.to;
        let j = d.add_node(NodeLabel::TJunction);
        d.arc_mut(id).to = j;
        d.add_arc(j, to, Vec::new());
        Ok(j)
    };
    let ja = split(a)?;
    let jb = split(b)?;
    let valve = d.valve_ids().last().map_or(0, |v| v + 1);
    let v = d.add_node(NodeLabel::Valve(valve));
    d.add_arc(ja, v, Vec::new());
    d.add_arc(v, jb, Vec::new());
    for states in d.valve_states.values_mut() {
        states.insert(valve, ValveState::Closed);
    }
    d.validate()?;
    Ok(d)
}
