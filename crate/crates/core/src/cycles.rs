//! Small directed-multigraph helpers shared by construction and assessment.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Directed multigraph with stable node and arc ids. Successor lists are
/// kept sorted by `(target, arc)` so every search below is deterministic.
#[derive(Clone, Debug, Default)]
pub struct Digraph {
    out: BTreeMap<usize, Vec<(usize, usize)>>,
    inc: BTreeMap<usize, Vec<(usize, usize)>>,
}

impl Digraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, n: usize) {
        self.out.entry(n).or_default();
        self.inc.entry(n).or_default();
    }

    pub fn add_arc(&mut self, from: usize, to: usize, arc: usize) {
        self.add_node(from);
        self.add_node(to);
        let o = self.out.get_mut(&from).unwrap();
        let pos = o.partition_point(|&x| x < (to, arc));
        o.insert(pos, (to, arc));
        let i = self.inc.get_mut(&to).unwrap();
        let pos = i.partition_point(|&x| x < (from, arc));
        i.insert(pos, (from, arc));
    }

    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.out.keys().copied()
    }

    pub fn contains(&self, n: usize) -> bool {
        self.out.contains_key(&n)
    }

    pub fn successors(&self, n: usize) -> &[(usize, usize)] {
        self.out.get(&n).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn predecessors(&self, n: usize) -> &[(usize, usize)] {
        self.inc.get(&n).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Nodes weakly connected to any of `seeds`.
    pub fn weak_component(&self, seeds: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<usize> = VecDeque::new();
        for s in seeds {
            if self.contains(s) && seen.insert(s) {
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &(w, _) in self.successors(v).iter().chain(self.predecessors(v)) {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Directed BFS distance from every node to `target`, restricted to
    /// `allowed` nodes.
    fn distances_to(&self, target: usize, allowed: &dyn Fn(usize) -> bool) -> BTreeMap<usize, usize> {
        let mut dist = BTreeMap::new();
        if !allowed(target) || !self.contains(target) {
            return dist;
        }
        dist.insert(target, 0);
        let mut queue = VecDeque::from([target]);
        while let Some(v) = queue.pop_front() {
            let d = dist[&v];
            for &(u, _) in self.predecessors(v) {
                if allowed(u) && !dist.contains_key(&u) {
                    dist.insert(u, d + 1);
                    queue.push_back(u);
                }
            }
        }
        dist
    }
}

/// Shortest directed path `from ⇝ to` through `allowed` intermediate nodes,
/// as `(nodes, arcs)` with `nodes[0] == from` and `nodes.last() == to`.
/// Breadth-first over sorted successor lists, so ties resolve to the
/// smallest node ids.
pub fn shortest_path(
    g: &Digraph,
    from: usize,
    to: usize,
    allowed: &dyn Fn(usize) -> bool,
) -> Option<(Vec<usize>, Vec<usize>)> {
    if from == to || !g.contains(from) || !g.contains(to) {
        return None;
    }
    let mut prev: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        for &(w, arc) in g.successors(v) {
            if w == from || prev.contains_key(&w) {
                continue;
            }
            if w != to && !allowed(w) {
                continue;
            }
            prev.insert(w, (v, arc));
            if w == to {
                let (mut nodes, mut arcs) = (vec![to], Vec::new());
                let mut x = to;
                while x != from {
                    let (p, a) = prev[&x];
                    nodes.push(p);
                    arcs.push(a);
                    x = p;
                }
                nodes.reverse();
                arcs.reverse();
                return Some((nodes, arcs));
            }
            queue.push_back(w);
        }
    }
    None
}

/// A simple directed cycle: `nodes[i] --arcs[i]--> nodes[(i + 1) % len]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cycle {
    pub nodes: Vec<usize>,
    pub arcs: Vec<usize>,
}

impl Cycle {
    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn contains(&self, n: usize) -> bool {
        self.nodes.contains(&n)
    }
}

const SEARCH_BUDGET: usize = 2_000_000;

/// Shortest simple directed cycle through both `a` and `b` whose nodes all
/// satisfy `allowed` and which satisfies `accept`; among equally short
/// cycles the lexicographically smallest node sequence starting at `a` wins.
///
/// Arc ids along a cycle are distinct, so a symmetric digraph built from an
/// undirected graph never reports a line traversed back and forth.
pub fn shortest_cycle_through(
    g: &Digraph,
    a: usize,
    b: usize,
    allowed: &dyn Fn(usize) -> bool,
    accept: &dyn Fn(&Cycle) -> bool,
) -> Option<Cycle> {
    if a == b || !g.contains(a) || !g.contains(b) || !allowed(a) || !allowed(b) {
        return None;
    }
    let to_a = g.distances_to(a, allowed);
    let to_b = g.distances_to(b, allowed);
    let b_to_a = *to_a.get(&b)?;
    to_b.get(&a)?;

    struct Search<'s> {
        g: &'s Digraph,
        a: usize,
        b: usize,
        allowed: &'s dyn Fn(usize) -> bool,
        accept: &'s dyn Fn(&Cycle) -> bool,
        to_a: BTreeMap<usize, usize>,
        to_b: BTreeMap<usize, usize>,
        b_to_a: usize,
        nodes: Vec<usize>,
        arcs: Vec<usize>,
        on_path: BTreeSet<usize>,
        best: Option<Cycle>,
        steps: usize,
    }

    impl Search<'_> {
        fn lower_bound(&self, v: usize, seen_b: bool) -> Option<usize> {
            if seen_b {
                self.to_a.get(&v).copied()
            } else {
                Some(self.to_b.get(&v)? + self.b_to_a)
            }
        }

        fn dfs(&mut self, v: usize, seen_b: bool) {
            self.steps += 1;
            if self.steps > SEARCH_BUDGET {
                return;
            }
            for i in 0..self.g.successors(v).len() {
                let (w, arc) = self.g.successors(v)[i];
                if self.arcs.contains(&arc) {
                    continue;
                }
                let len = self.arcs.len() + 1;
                if w == self.a {
                    let shorter = self.best.as_ref().is_none_or(|best| len < best.len());
                    if seen_b && shorter {
                        self.arcs.push(arc);
                        let cand = Cycle { nodes: self.nodes.clone(), arcs: self.arcs.clone() };
                        self.arcs.pop();
                        if (self.accept)(&cand) {
                            self.best = Some(cand);
                        }
                    }
                    continue;
                }
                if self.on_path.contains(&w) || !(self.allowed)(w) {
                    continue;
                }
                let now_b = seen_b || w == self.b;
                let Some(lb) = self.lower_bound(w, now_b) else {
                    continue;
                };
                if let Some(best) = &self.best {
                    if len + lb >= best.len() {
                        continue;
                    }
                }
                self.nodes.push(w);
                self.arcs.push(arc);
                self.on_path.insert(w);
                self.dfs(w, now_b);
                self.on_path.remove(&w);
                self.arcs.pop();
                self.nodes.pop();
            }
        }
    }

    let mut s = Search {
        g,
        a,
        b,
        allowed,
        accept,
        to_a,
        to_b,
        b_to_a,
        nodes: vec![a],
        arcs: Vec::new(),
        on_path: BTreeSet::from([a]),
        best: None,
        steps: 0,
    };
    s.dfs(a, false);
    s.best
}
