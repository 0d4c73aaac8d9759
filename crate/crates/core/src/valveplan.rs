//! Valve placement from per-mode cut sets.
//!
//! For every mode the nodes carrying each group's coolant are known from the
//! construction traces. Unused junctions are assigned to an adjacent group
//! (or left idle), the lines that must be closed to keep the groups apart are
//! enumerated as minimal cut sets, and one cut set per mode is chosen so
//! that the union, the valve set, is as small as possible.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::domain::{ArchGraph, ModeCatalog, NodeKind};
use crate::enumerate::LoopTrace;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValveState {
    Open,
    Closed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupRegion {
    pub group_index: usize,
    pub trace_nodes: BTreeSet<usize>,
    pub trace_edges: BTreeSet<usize>,
    /// Unused nodes attached to this group's coolant.
    pub assigned: BTreeSet<usize>,
}

impl GroupRegion {
    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.trace_nodes.iter().chain(&self.assigned).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeFlowAssignment {
    pub mode_id: u8,
    pub groups: Vec<GroupRegion>,
    pub idle: BTreeSet<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CutSet {
    pub mode_id: u8,
    pub edge_ids: BTreeSet<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValvePlan {
    #[serde(rename = "valves")]
    pub valve_edges: BTreeSet<usize>,
    pub states: BTreeMap<u8, BTreeMap<usize, ValveState>>,
}

impl ValvePlan {
    pub fn closed_in(&self, mode: u8) -> BTreeSet<usize> {
        self.states
            .get(&mode)
            .map(|m| m.iter().filter(|(_, s)| **s == ValveState::Closed).map(|(e, _)| *e).collect())
            .unwrap_or_default()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PlanOptions {
    /// Lines a cut set may hold beyond those that directly join two
    /// separated classes (those belong to every cut anyway).
    pub max_cut_size: usize,
    /// Largest number of unused-node assignments evaluated per mode.
    pub max_assignments: usize,
    /// Node budget of the union search.
    pub search_budget: usize,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self { max_cut_size: 8, max_assignments: 256, search_budget: 5_000_000 }
    }
}

fn is_junction(arch: &ArchGraph, n: usize) -> bool {
    matches!(arch.node(n).map(|x| x.kind), Some(NodeKind::Junction))
}

/// Enumerates ways to attach the nodes no coolant of `mode_id` uses.
///
/// Unused junctions are grouped into connected clusters; a cluster may join
/// any group it touches directly, and all of it joins the same group.
/// Clusters touching no group, and every unused component, are idle.
pub fn assign_unused_nodes(arch: &ArchGraph, traces: &[LoopTrace], mode_id: u8, cap: usize) -> Vec<ModeFlowAssignment> {
    let mut mode_traces: Vec<&LoopTrace> = traces.iter().filter(|t| t.mode_id == mode_id).collect();
    mode_traces.sort_by_key(|t| t.group_index);
    let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
    for (slot, t) in mode_traces.iter().enumerate() {
        for &n in &t.node_ids {
            owner.insert(n, slot);
        }
    }
    let inc = arch.incidence();
    let unused: Vec<usize> = arch.nodes.iter().map(|n| n.id).filter(|n| !owner.contains_key(n)).collect();

    let mut idle: BTreeSet<usize> = BTreeSet::new();
    let mut cluster_of: BTreeMap<usize, usize> = BTreeMap::new();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &n in &unused {
        if !is_junction(arch, n) {
            idle.insert(n);
            continue;
        }
        if cluster_of.contains_key(&n) {
            continue;
        }
        let id = clusters.len();
        let mut members = vec![n];
        cluster_of.insert(n, id);
        let mut queue = VecDeque::from([n]);
        while let Some(v) = queue.pop_front() {
            for &(_, w) in &inc[&v] {
                if !owner.contains_key(&w) && is_junction(arch, w) && !cluster_of.contains_key(&w) {
                    cluster_of.insert(w, id);
                    members.push(w);
                    queue.push_back(w);
                }
            }
        }
        members.sort_unstable();
        clusters.push(members);
    }

    let options: Vec<Vec<usize>> = clusters
        .iter()
        .map(|members| {
            let touched: BTreeSet<usize> =
                members.iter().flat_map(|v| inc[v].iter().filter_map(|(_, w)| owner.get(w).copied())).collect();
            touched.into_iter().collect()
        })
        .collect();
    for (members, opts) in clusters.iter().zip(&options) {
        if opts.is_empty() {
            idle.extend(members.iter().copied());
        }
    }
    let choosing: Vec<usize> = (0..clusters.len()).filter(|&c| !options[c].is_empty()).collect();

    let mut out = Vec::new();
    let mut pick = vec![0usize; choosing.len()];
    loop {
        let mut groups: Vec<GroupRegion> = mode_traces
            .iter()
            .map(|t| GroupRegion {
                group_index: t.group_index,
                trace_nodes: t.node_ids.clone(),
                trace_edges: t.edge_ids.clone(),
                assigned: BTreeSet::new(),
            })
            .collect();
        for (k, &c) in choosing.iter().enumerate() {
            groups[options[c][pick[k]]].assigned.extend(clusters[c].iter().copied());
        }
        out.push(ModeFlowAssignment { mode_id, groups, idle: idle.clone() });
        if out.len() >= cap {
            break;
        }
        // odometer, last cluster fastest
        let mut k = choosing.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            pick[k] += 1;
            if pick[k] < options[choosing[k]].len() {
                break;
            }
            pick[k] = 0;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Class {
    Group(usize),
    IdleComponent,
}

struct CutProblem<'a> {
    arch: &'a ArchGraph,
    mode_id: u8,
    class: BTreeMap<usize, Class>,
    protected: BTreeSet<usize>,
    inc: BTreeMap<usize, Vec<(usize, usize)>>,
}

impl<'a> CutProblem<'a> {
    fn new(arch: &'a ArchGraph, a: &ModeFlowAssignment) -> Self {
        let mut class = BTreeMap::new();
        let mut protected = BTreeSet::new();
        for (slot, g) in a.groups.iter().enumerate() {
            for n in g.nodes() {
                class.insert(n, Class::Group(slot));
            }
            protected.extend(g.trace_edges.iter().copied());
        }
        for &n in &a.idle {
            if !is_junction(arch, n) {
                class.insert(n, Class::IdleComponent);
            }
        }
        Self { arch, mode_id: a.mode_id, class, protected, inc: arch.incidence() }
    }

    fn conflicting(a: Class, b: Class) -> bool {
        a != b && !(a == Class::IdleComponent && b == Class::IdleComponent)
    }

    /// Shortest line path between two conflicting classes avoiding `removed`,
    /// as a list of edge ids, or `None` when the removal is a valid cut.
    fn violation(&self, removed: &BTreeSet<usize>) -> Option<Vec<usize>> {
        // multi-source BFS from group nodes, tracking the originating class
        let mut from: BTreeMap<usize, (Class, Option<(usize, usize)>)> = BTreeMap::new();
        let mut queue = VecDeque::new();
        for (&n, &c) in &self.class {
            if let Class::Group(_) = c {
                from.insert(n, (c, None));
                queue.push_back(n);
            }
        }
        while let Some(v) = queue.pop_front() {
            let origin = from[&v].0;
            for &(e, w) in &self.inc[&v] {
                if removed.contains(&e) {
                    continue;
                }
                if let Some(&c) = self.class.get(&w) {
                    let reached = from.get(&w).map(|x| x.0).unwrap_or(c);
                    if Self::conflicting(origin, reached) {
                        let mut path = vec![e];
                        for mut x in [v, w] {
                            while let Some((_, Some((edge, prev)))) = from.get(&x) {
                                path.push(*edge);
                                x = *prev;
                            }
                        }
                        return Some(path);
                    }
                    if from.contains_key(&w) {
                        continue;
                    }
                    if c == Class::IdleComponent {
                        continue;
                    }
                }
                if let std::collections::btree_map::Entry::Vacant(slot) = from.entry(w) {
                    slot.insert((origin, Some((e, v))));
                    queue.push_back(w);
                }
            }
        }
        None
    }

    fn is_valid(&self, removed: &BTreeSet<usize>) -> bool {
        self.violation(removed).is_none()
    }

    fn enumerate(&self, k: usize) -> Result<Vec<CutSet>> {
        // lines joining two conflicting classes directly belong to every cut
        let mut forced = BTreeSet::new();
        for e in &self.arch.edges {
            if let (Some(&ca), Some(&cb)) = (self.class.get(&e.a), self.class.get(&e.b)) {
                if Self::conflicting(ca, cb) {
                    if self.protected.contains(&e.id) {
                        return Err(self.inseparable(format!("line {} carries coolant of two groups", e.id)));
                    }
                    forced.insert(e.id);
                }
            }
        }
        let limit = forced.len() + k;
        let mut found: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        let mut visited: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        self.branch(forced, limit, &mut found, &mut visited);
        let minimal: Vec<BTreeSet<usize>> = found
            .into_iter()
            .filter(|s| {
                s.iter().all(|e| {
                    let mut smaller = s.clone();
                    smaller.remove(e);
                    !self.is_valid(&smaller)
                })
            })
            .collect();
        if minimal.is_empty() {
            return Err(
                self.inseparable(format!("no separating set within {k} lines beyond the {} forced ones", limit - k))
            );
        }
        let mut sets: Vec<CutSet> =
            minimal.into_iter().map(|edge_ids| CutSet { mode_id: self.mode_id, edge_ids }).collect();
        sets.sort_by(|a, b| (a.edge_ids.len(), &a.edge_ids).cmp(&(b.edge_ids.len(), &b.edge_ids)));
        Ok(sets)
    }

    fn branch(
        &self,
        removed: BTreeSet<usize>,
        k: usize,
        found: &mut BTreeSet<BTreeSet<usize>>,
        visited: &mut BTreeSet<BTreeSet<usize>>,
    ) {
        if !visited.insert(removed.clone()) {
            return;
        }
        let Some(path) = self.violation(&removed) else {
            found.insert(removed);
            return;
        };
        if removed.len() >= k {
            return;
        }
        for e in path {
            if self.protected.contains(&e) {
                continue;
            }
            let mut next = removed.clone();
            next.insert(e);
            self.branch(next, k, found, visited);
        }
    }

    fn inseparable(&self, reason: String) -> Error {
        Error::ModeInseparable { mode: self.mode_id, reason }
    }
}

/// All minimal cut sets that keep the groups of
/// `assignment` apart and cut idle components off, leaving every trace line
/// in place. `max_size` bounds the lines chosen on top of the forced ones.
pub fn mode_cut_sets(arch: &ArchGraph, assignment: &ModeFlowAssignment, max_size: usize) -> Result<Vec<CutSet>> {
    CutProblem::new(arch, assignment).enumerate(max_size)
}

/// Candidate cut sets of one mode over all evaluated assignments, without
/// duplicates or supersets of other candidates.
pub fn mode_candidates(arch: &ArchGraph, traces: &[LoopTrace], mode_id: u8, opts: &PlanOptions) -> Result<Vec<CutSet>> {
    let mut all = BTreeSet::new();
    let mut last_err = None;
    for a in assign_unused_nodes(arch, traces, mode_id, opts.max_assignments) {
        match mode_cut_sets(arch, &a, opts.max_cut_size) {
            Ok(sets) => all.extend(sets.into_iter().map(|s| s.edge_ids)),
            Err(e) => last_err = Some(e),
        }
    }
    if all.is_empty() {
        return Err(
            last_err.unwrap_or(Error::ModeInseparable { mode: mode_id, reason: "no assignment admits a cut".into() })
        );
    }
    let sets: Vec<BTreeSet<usize>> = all.into_iter().collect();
    let mut kept: Vec<CutSet> = sets
        .iter()
        .filter(|s| !sets.iter().any(|o| o != *s && o.is_subset(s)))
        .map(|s| CutSet { mode_id, edge_ids: s.clone() })
        .collect();
    kept.sort_by(|a, b| (a.edge_ids.len(), &a.edge_ids).cmp(&(b.edge_ids.len(), &b.edge_ids)));
    Ok(kept)
}

/// Picks one cut set per mode so that their union is smallest, ties broken
/// by the lexicographically smallest sorted union.
pub fn select_valve_set(per_mode: &BTreeMap<u8, Vec<CutSet>>) -> Result<ValvePlan> {
    select_valve_set_with_budget(per_mode, PlanOptions::default().search_budget)
}

pub fn select_valve_set_with_budget(per_mode: &BTreeMap<u8, Vec<CutSet>>, budget: usize) -> Result<ValvePlan> {
    let mut modes: Vec<(u8, Vec<BTreeSet<usize>>)> = Vec::new();
    for (&m, sets) in per_mode {
        if sets.is_empty() {
            return Err(Error::ModeInseparable { mode: m, reason: "no candidate cut set".into() });
        }
        let mut uniq: Vec<BTreeSet<usize>> = sets.iter().map(|s| s.edge_ids.clone()).collect();
        uniq.sort();
        uniq.dedup();
        let minimal: Vec<BTreeSet<usize>> =
            uniq.iter().filter(|s| !uniq.iter().any(|o| o != *s && o.is_subset(s))).cloned().collect();
        modes.push((m, minimal));
    }
    modes.sort_by_key(|(m, c)| (c.len(), *m));

    struct Search<'s> {
        modes: &'s [(u8, Vec<BTreeSet<usize>>)],
        choice: Vec<usize>,
        best: Option<(Vec<usize>, Vec<usize>)>,
        steps: usize,
        budget: usize,
    }
    impl Search<'_> {
        fn better(&self, union: &BTreeSet<usize>) -> bool {
            match &self.best {
                None => true,
                Some((u, _)) => {
                    union.len() < u.len() || (union.len() == u.len() && union.iter().copied().lt(u.iter().copied()))
                }
            }
        }

        fn go(&mut self, depth: usize, union: &BTreeSet<usize>) -> bool {
            self.steps += 1;
            if self.steps > self.budget {
                return false;
            }
            if let Some((u, _)) = &self.best {
                if union.len() > u.len() {
                    return true;
                }
            }
            if depth == self.modes.len() {
                if self.better(union) {
                    self.best = Some((union.iter().copied().collect(), self.choice.clone()));
                }
                return true;
            }
            // candidates adding the fewest new lines first
            let mut order: Vec<(usize, usize)> =
                self.modes[depth].1.iter().enumerate().map(|(i, s)| (s.difference(union).count(), i)).collect();
            order.sort_unstable();
            for (_, i) in order {
                let mut next = union.clone();
                next.extend(self.modes[depth].1[i].iter().copied());
                self.choice.push(i);
                let ok = self.go(depth + 1, &next);
                self.choice.pop();
                if !ok {
                    return false;
                }
            }
            true
        }
    }

    let mut s = Search { modes: &modes, choice: Vec::new(), best: None, steps: 0, budget };
    if !s.go(0, &BTreeSet::new()) {
        return Err(Error::ValveSearchBudget(budget));
    }
    let (union, choice) = s.best.expect("every mode has a candidate");
    let valve_edges: BTreeSet<usize> = union.into_iter().collect();
    let mut states = BTreeMap::new();
    for ((m, cands), &i) in modes.iter().zip(&choice) {
        let closed = &cands[i];
        let st = valve_edges
            .iter()
            .map(|&e| {
                let s = if closed.contains(&e) { ValveState::Closed } else { ValveState::Open };
                (e, s)
            })
            .collect();
        states.insert(*m, st);
    }
    Ok(ValvePlan { valve_edges, states })
}

/// Marks exactly the plan's lines as valved.
pub fn apply_plan(arch: &ArchGraph, plan: &ValvePlan) -> Result<ArchGraph> {
    for &e in &plan.valve_edges {
        if arch.edge(e).is_none() {
            return Err(Error::UnknownEdge(e));
        }
    }
    let mut out = arch.clone();
    for e in &mut out.edges {
        e.valve = plan.valve_edges.contains(&e.id);
    }
    Ok(out)
}

/// Candidate cut sets for every mode of the catalog, then the smallest
/// valve set over them.
pub fn plan_valves(
    arch: &ArchGraph,
    traces: &[LoopTrace],
    catalog: &ModeCatalog,
    opts: &PlanOptions,
) -> Result<(ValvePlan, BTreeMap<u8, Vec<CutSet>>)> {
    let mut per_mode = BTreeMap::new();
    for m in &catalog.modes {
        per_mode.insert(m.id, mode_candidates(arch, traces, m.id, opts)?);
    }
    let plan = select_valve_set_with_budget(&per_mode, opts.search_budget)?;
    Ok((plan, per_mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ArchGraph;

    fn cut(mode: u8, edges: &[usize]) -> CutSet {
        CutSet { mode_id: mode, edge_ids: edges.iter().copied().collect() }
    }

    fn trace(mode: u8, group: usize, nodes: &[usize], edges: &[usize]) -> LoopTrace {
        LoopTrace {
            mode_id: mode,
            group_index: group,
            node_ids: nodes.iter().copied().collect(),
            edge_ids: edges.iter().copied().collect(),
            cycles: vec![],
        }
    }

    /// Two triangles: LCC-Cabin-j7 and R1-Chiller-j8.
    fn two_loops() -> (ArchGraph, Vec<LoopTrace>) {
        let mut g = ArchGraph::initial();
        let j7 = g.add_junction();
        let j8 = g.add_junction();
        g.add_edge(1, 2); // 0
        g.add_edge(2, j7); // 1
        g.add_edge(j7, 1); // 2
        g.add_edge(5, 0); // 3
        g.add_edge(0, j8); // 4
        g.add_edge(j8, 5); // 5
        let t = vec![trace(1, 0, &[1, 2, j7], &[0, 1, 2]), trace(1, 1, &[0, 5, j8], &[3, 4, 5])];
        (g, t)
    }

    #[test]
    fn disjoint_loops_need_no_cut() {
        let (g, t) = two_loops();
        let a = assign_unused_nodes(&g, &t, 1, 16);
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].groups.iter().map(|g| g.assigned.len()).sum::<usize>(), 0);
        let sets = mode_cut_sets(&g, &a[0], 8).unwrap();
        assert_eq!(sets, vec![cut(1, &[])]);
    }

    #[test]
    fn bridge_is_unique_cut() {
        let (mut g, t) = two_loops();
        let bridge = g.add_edge(7, 8);
        let a = assign_unused_nodes(&g, &t, 1, 16);
        let sets = mode_cut_sets(&g, &a[0], 8).unwrap();
        assert_eq!(sets, vec![cut(1, &[bridge])]);
    }

    /// All edge subsets of the small graph, checked by plain connectivity.
    #[test]
    fn bridge_cut_matches_subset_oracle() {
        let (mut g, t) = two_loops();
        let j9 = g.add_junction();
        g.add_edge(7, j9); // 6
        g.add_edge(j9, 8); // 7
        fn root(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let r = root(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        let assignments = assign_unused_nodes(&g, &t, 1, 16);
        assert_eq!(assignments.len(), 2);
        for a in &assignments {
            let group_of = |n: usize| a.groups.iter().position(|r| r.nodes().any(|x| x == n));
            let free = [6usize, 7];
            let mut valid = Vec::new();
            for mask in 0u32..(1 << free.len()) {
                let removed: BTreeSet<usize> =
                    free.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| *e).collect();
                let mut p: Vec<usize> = (0..g.nodes.len()).collect();
                for e in g.edges.iter().filter(|e| !removed.contains(&e.id)) {
                    let (x, y) = (root(&mut p, e.a), root(&mut p, e.b));
                    p[x] = y;
                }
                let ok = (0..g.nodes.len()).all(|u| {
                    (0..g.nodes.len()).all(|v| match (group_of(u), group_of(v)) {
                        (Some(x), Some(y)) if x != y => root(&mut p, u) != root(&mut p, v),
                        _ => true,
                    })
                });
                if ok {
                    valid.push(removed);
                }
            }
            let want: BTreeSet<BTreeSet<usize>> =
                valid.iter().filter(|s| !valid.iter().any(|o| o != *s && o.is_subset(s))).cloned().collect();
            let got: BTreeSet<BTreeSet<usize>> =
                mode_cut_sets(&g, a, 8).unwrap().into_iter().map(|c| c.edge_ids).collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn junction_between_groups_has_two_assignments() {
        let (mut g, t) = two_loops();
        let j = g.add_junction();
        g.add_edge(7, j);
        g.add_edge(j, 8);
        let a = assign_unused_nodes(&g, &t, 1, 16);
        assert_eq!(a.len(), 2);
        assert!(a[0].groups[0].assigned.contains(&j));
        assert!(a[1].groups[1].assigned.contains(&j));
    }

    #[test]
    fn isolated_unused_node_is_idle() {
        let (mut g, t) = two_loops();
        let j = g.add_junction();
        let k = g.add_junction();
        g.add_edge(j, k);
        let a = assign_unused_nodes(&g, &t, 1, 16);
        assert_eq!(a.len(), 1);
        assert!(a[0].idle.contains(&j) && a[0].idle.contains(&k));
        // unused components are idle too
        assert!(a[0].idle.contains(&3));
    }

    #[test]
    fn bound_too_small_is_inseparable() {
        let (mut g, t) = two_loops();
        let j = g.add_junction();
        let e1 = g.add_edge(7, j);
        let e2 = g.add_edge(j, 8);
        // an idle junction between the groups leaves the choice of line open
        let mut a = assign_unused_nodes(&g, &t, 1, 16).remove(0);
        for r in &mut a.groups {
            r.assigned.clear();
        }
        a.idle.insert(j);
        assert!(matches!(mode_cut_sets(&g, &a, 0), Err(Error::ModeInseparable { mode: 1, .. })));
        let sets = mode_cut_sets(&g, &a, 1).unwrap();
        assert_eq!(sets, vec![cut(1, &[e1]), cut(1, &[e2])]);
    }

    #[test]
    fn idle_component_is_cut_off() {
        let (mut g, t) = two_loops();
        let e = g.add_edge(2, 3); // Cabin - Battery, battery unused in this mode
        let a = &assign_unused_nodes(&g, &t, 1, 16)[0];
        assert_eq!(mode_cut_sets(&g, a, 8).unwrap(), vec![cut(1, &[e])]);
    }

    #[test]
    fn smaller_union_wins() {
        let per = BTreeMap::from([(1u8, vec![cut(1, &[1, 2]), cut(1, &[3])])]);
        let p = select_valve_set(&per).unwrap();
        assert_eq!(p.valve_edges, BTreeSet::from([3]));
        assert_eq!(p.states[&1][&3], ValveState::Closed);
    }

    #[test]
    fn shared_edge_across_modes() {
        let per = BTreeMap::from([(1u8, vec![cut(1, &[1]), cut(1, &[2])]), (2u8, vec![cut(2, &[1]), cut(2, &[3])])]);
        let p = select_valve_set(&per).unwrap();
        assert_eq!(p.valve_edges, BTreeSet::from([1]));
        assert_eq!(p.closed_in(1), BTreeSet::from([1]));
        assert_eq!(p.closed_in(2), BTreeSet::from([1]));
    }

    #[test]
    fn open_states_recorded() {
        let per = BTreeMap::from([(1u8, vec![cut(1, &[1])]), (2u8, vec![cut(2, &[2])])]);
        let p = select_valve_set(&per).unwrap();
        assert_eq!(p.states[&1][&2], ValveState::Open);
        assert_eq!(p.states[&2][&1], ValveState::Open);
    }

    #[test]
    fn all_empty_cuts() {
        let per = BTreeMap::from([(1u8, vec![cut(1, &[])]), (2u8, vec![cut(2, &[])])]);
        assert!(select_valve_set(&per).unwrap().valve_edges.is_empty());
        let none: BTreeMap<u8, Vec<CutSet>> = BTreeMap::from([(3u8, vec![])]);
        assert!(matches!(select_valve_set(&none), Err(Error::ModeInseparable { mode: 3, .. })));
    }

    #[test]
    fn apply() {
        let (g, _) = two_loops();
        let unchanged = apply_plan(&g, &ValvePlan::default()).unwrap();
        assert_eq!(unchanged, g);
        let plan = ValvePlan { valve_edges: BTreeSet::from([3]), states: BTreeMap::new() };
        let v = apply_plan(&g, &plan).unwrap();
        assert!(v.edge(3).unwrap().valve);
        assert_eq!(v.valve_edges().len(), 1);
        let bad = ValvePlan { valve_edges: BTreeSet::from([99]), states: BTreeMap::new() };
        assert!(matches!(apply_plan(&g, &bad), Err(Error::UnknownEdge(99))));
    }

    #[test]
    fn plan_json_shape() {
        let per = BTreeMap::from([(1u8, vec![cut(1, &[3])]), (2u8, vec![cut(2, &[9])])]);
        let p = select_valve_set(&per).unwrap();
        let v = serde_json::to_value(&p).unwrap();
        assert_eq!(v["valves"], serde_json::json!([3, 9]));
        assert_eq!(v["states"]["1"]["3"], "closed");
        assert_eq!(v["states"]["1"]["9"], "open");
        let back: ValvePlan = serde_json::from_value(v).unwrap();
        assert_eq!(back, p);
    }
}
