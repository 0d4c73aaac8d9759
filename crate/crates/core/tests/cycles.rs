use proptest::prelude::*;
use tms_core::cycles::{shortest_cycle_through, Cycle, Digraph};

/// Every simple directed cycle, each listed once per rotation start.
fn all_cycles(arcs: &[(usize, usize)], n: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    fn walk(
        arcs: &[(usize, usize)],
        start: usize,
        nodes: &mut Vec<usize>,
        used: &mut Vec<usize>,
        out: &mut Vec<(Vec<usize>, Vec<usize>)>,
    ) {
        let v = *nodes.last().unwrap();
        for (id, &(f, t)) in arcs.iter().enumerate() {
            if f != v || used.contains(&id) {
                continue;
            }
            if t == start {
                used.push(id);
                out.push((nodes.clone(), used.clone()));
                used.pop();
            } else if !nodes.contains(&t) {
                nodes.push(t);
                used.push(id);
                walk(arcs, start, nodes, used, out);
                used.pop();
                nodes.pop();
            }
        }
    }
    for s in 0..n {
        walk(arcs, s, &mut vec![s], &mut Vec::new(), &mut out);
    }
    out
}

fn key(nodes: &[usize], arcs: &[usize]) -> Vec<(usize, usize)> {
    (0..arcs.len()).map(|i| (nodes[(i + 1) % nodes.len()], arcs[i])).collect()
}

fn check(arcs: &[(usize, usize)], n: usize, a: usize, b: usize) -> Result<(), TestCaseError> {
    let mut g = Digraph::new();
    for v in 0..n {
        g.add_node(v);
    }
    for (id, &(f, t)) in arcs.iter().enumerate() {
        g.add_arc(f, t, id);
    }
    let found = shortest_cycle_through(&g, a, b, &|_| true, &|_| true);
    let best = all_cycles(arcs, n)
        .into_iter()
        .filter(|(ns, _)| ns[0] == a && ns.contains(&b))
        .min_by(|x, y| (x.1.len(), key(&x.0, &x.1)).cmp(&(y.1.len(), key(&y.0, &y.1))));
    match (found, best) {
        (None, None) => {}
        (Some(Cycle { nodes, arcs: c }), Some((bn, ba))) => {
            prop_assert_eq!(&nodes, &bn);
            prop_assert_eq!(&c, &ba);
        }
        (f, b) => prop_assert!(false, "search {:?} vs exhaustive {:?}", f, b),
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn shortest_cycle_matches_exhaustive_search(
        n in 3usize..=16,
        raw in prop::collection::vec((0usize..16, 0usize..16), 4..36),
        a in 0usize..16,
        b in 0usize..16,
    ) {
        let arcs: Vec<(usize, usize)> = raw.into_iter().map(|(f, t)| (f % n, t % n)).filter(|(f, t)| f != t).collect();
        let (a, b) = (a % n, b % n);
        prop_assume!(a != b);
        check(&arcs, n, a, b)?;
    }
}

#[test]
fn symmetric_graph_never_reuses_a_line() {
    // A single undirected line modeled as two opposite arcs with one id.
    let mut g = Digraph::new();
    g.add_arc(0, 1, 7);
    g.add_arc(1, 0, 7);
    assert!(shortest_cycle_through(&g, 0, 1, &|_| true, &|_| true).is_none());
    g.add_arc(1, 0, 8);
    assert_eq!(shortest_cycle_through(&g, 0, 1, &|_| true, &|_| true).unwrap().arcs, vec![7, 8]);
}
