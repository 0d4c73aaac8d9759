//! Colored canonical form by color refinement plus individualization.
//!
//! Component nodes carry their identity as color, junctions share one color,
//! and every line contributes its valve flag as an edge color. The form is
//! the lexicographically smallest certificate over all leaves of the
//! individualization-refinement search tree, so two graphs get equal forms
//! exactly when a color-preserving isomorphism exists.

use std::collections::BTreeMap;

use crate::domain::{ArchGraph, NodeKind};

/// A node's color and its sorted (neighbor color, plain lines, valve lines).
type Signature = (u32, Vec<(u32, u32, u32)>);

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm(pub Vec<u8>);

impl CanonicalForm {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

struct Colored {
    base: Vec<u32>,
    /// per node: sorted `(neighbor, plain lines, valve lines)`
    adj: Vec<Vec<(usize, u32, u32)>>,
    edges: Vec<(usize, usize, bool)>,
}

impl Colored {
    fn new(arch: &ArchGraph) -> Self {
        let index: BTreeMap<usize, usize> = arch.nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        let base = arch
            .nodes
            .iter()
            .map(|n| match n.kind {
                NodeKind::Junction => 0,
                NodeKind::Component { label } => 1 + label.index() as u32,
            })
            .collect();
        let mut counts: BTreeMap<(usize, usize), (u32, u32)> = BTreeMap::new();
        let mut edges = Vec::with_capacity(arch.edges.len());
        for e in &arch.edges {
            let (a, b) = (index[&e.a], index[&e.b]);
            edges.push((a, b, e.valve));
            for key in [(a, b), (b, a)] {
                let c = counts.entry(key).or_default();
                if e.valve {
                    c.1 += 1;
                } else {
                    c.0 += 1;
                }
            }
        }
        let mut adj = vec![Vec::new(); arch.nodes.len()];
        for ((a, b), (p, v)) in counts {
            adj[a].push((b, p, v));
        }
        Self { base, adj, edges }
    }

    /// Equitable refinement; colors are ranks of sorted signatures, so the
    /// relative order of existing cells is preserved.
    fn refine(&self, mut colors: Vec<u32>) -> Vec<u32> {
        let mut cells = count_cells(&colors);
        loop {
            let sigs: Vec<Signature> = (0..colors.len())
                .map(|v| {
                    let mut s: Vec<(u32, u32, u32)> = self.adj[v].iter().map(|&(w, p, q)| (colors[w], p, q)).collect();
                    s.sort_unstable();
                    (colors[v], s)
                })
                .collect();
            let mut sorted: Vec<&Signature> = sigs.iter().collect();
            sorted.sort();
            sorted.dedup();
            colors = sigs.iter().map(|s| sorted.binary_search(&s).unwrap() as u32).collect();
            let now = sorted.len();
            if now == cells {
                return colors;
            }
            cells = now;
        }
    }

    fn certificate(&self, colors: &[u32]) -> Vec<u8> {
        let n = colors.len();
        let mut at = vec![0usize; n];
        for (v, &c) in colors.iter().enumerate() {
            at[c as usize] = v;
        }
        let mut out = Vec::with_capacity(4 + n + self.edges.len() * 9);
        out.extend_from_slice(&(n as u32).to_le_bytes());
        out.extend(at.iter().map(|&v| self.base[v] as u8));
        let mut es: Vec<(u32, u32, bool)> = self
            .edges
            .iter()
            .map(|&(a, b, valve)| {
                let (x, y) = (colors[a], colors[b]);
                (x.min(y), x.max(y), valve)
            })
            .collect();
        es.sort_unstable();
        for (x, y, valve) in es {
            out.extend_from_slice(&x.to_le_bytes());
            out.extend_from_slice(&y.to_le_bytes());
            out.push(u8::from(valve));
        }
        out
    }

    fn search(&self, colors: Vec<u32>, best: &mut Option<Vec<u8>>) {
        let colors = self.refine(colors);
        let n = colors.len();
        let mut size = vec![0u32; n];
        for &c in &colors {
            size[c as usize] += 1;
        }
        let Some(target) = (0..n).find(|&c| size[c] > 1) else {
            let cert = self.certificate(&colors);
            if best.as_ref().is_none_or(|b| cert < *b) {
                *best = Some(cert);
            }
            return;
        };
        let target = target as u32;
        for v in (0..n).filter(|&v| colors[v] == target) {
            let next = colors.iter().enumerate().map(|(x, &c)| 2 * c + u32::from(c == target && x != v)).collect();
            self.search(next, best);
        }
    }
}

fn count_cells(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

pub fn canonical_form(arch: &ArchGraph) -> CanonicalForm {
    let g = Colored::new(arch);
    let mut best = None;
    g.search(g.base.clone(), &mut best);
    CanonicalForm(best.unwrap_or_default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{ArchGraph, ComponentId};

    fn sample() -> ArchGraph {
        let mut g = ArchGraph::initial();
        let j1 = g.add_junction();
        let j2 = g.add_junction();
        let j3 = g.add_junction();
        g.add_edge(1, j1);
        g.add_edge(j1, 2);
        g.add_edge(j1, 3);
        g.add_edge(2, j2);
        g.add_edge(3, j2);
        g.add_edge(j2, 1);
        g.add_edge(5, 0);
        g.add_edge(0, j3);
        g.add_edge(j3, 5);
        g
    }

    fn relabel_junctions(g: &ArchGraph, perm: &[usize]) -> ArchGraph {
        // perm maps junction k (id 7 + k) to junction perm[k]
        let map = |n: usize| if n >= 7 { 7 + perm[n - 7] } else { n };
        let mut out = g.clone();
        for e in &mut out.edges {
            e.a = map(e.a);
            e.b = map(e.b);
        }
        out.edges.reverse();
        for (i, e) in out.edges.iter_mut().enumerate() {
            e.id = 100 + i;
            std::mem::swap(&mut e.a, &mut e.b);
        }
        out.nodes.reverse();
        out
    }

    #[test]
    fn junction_relabel_invariant() {
        let g = sample();
        assert_eq!(canonical_form(&g), canonical_form(&relabel_junctions(&g, &[2, 0, 1])));
    }

    #[test]
    fn component_swap_changes_form() {
        let g = sample();
        let mut h = g.clone();
        let (r1, r2) = (ComponentId::Radiator1.index(), ComponentId::Radiator2.index());
        for e in &mut h.edges {
            for end in [&mut e.a, &mut e.b] {
                if *end == r1 {
                    *end = r2;
                } else if *end == r2 {
                    *end = r1;
                }
            }
        }
        assert_ne!(canonical_form(&g), canonical_form(&h));
    }

    #[test]
    fn valve_flag_changes_form() {
        let g = sample();
        let mut h = g.clone();
        h.edges[3].valve = true;
        assert_ne!(canonical_form(&g), canonical_form(&h));
    }

    #[test]
    fn parallel_lines_counted() {
        let g = sample();
        let mut h = g.clone();
        h.add_edge(5, 0);
        assert_ne!(canonical_form(&g), canonical_form(&h));
    }
}
