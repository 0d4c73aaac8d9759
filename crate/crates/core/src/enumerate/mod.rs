//! Layered architecture enumeration.
//!
//! Every mode sequence yields one architecture: modes are folded into an
//! initially edgeless seven-component graph in sequence order, reusing
//! existing coolant cycles where they comply and adding junctions and lines
//! where they do not. Architectures from different sequences are then
//! deduplicated by a colored canonical form.

mod build;
mod canon;

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::ArchGraph;
use crate::{Error, Result};

pub use build::build_architecture;
pub use canon::{canonical_form, CanonicalForm};

/// Order in which modes are folded into the architecture.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeSequence {
    pub order: Vec<u8>,
    pub seed: u64,
}

/// One closed coolant walk inside a trace, in flow direction:
/// `nodes[i] --edges[i]--> nodes[(i + 1) % len]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceCycle {
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
}

/// The cycles that carry one transfer group's coolant in one mode.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopTrace {
    #[serde(rename = "mode")]
    pub mode_id: u8,
    #[serde(rename = "group")]
    pub group_index: usize,
    #[serde(rename = "nodes")]
    pub node_ids: BTreeSet<usize>,
    #[serde(rename = "edges")]
    pub edge_ids: BTreeSet<usize>,
    pub cycles: Vec<TraceCycle>,
}

fn factorial_capped(n: usize) -> u128 {
    (1..=n as u128).try_fold(1u128, |acc, k| acc.checked_mul(k)).unwrap_or(u128::MAX)
}

/// `count` pairwise-distinct permutations of `mode_ids`, reproducible from
/// `seed`. Permutations come from seeded uniform shuffles with duplicates
/// rejected.
pub fn generate_sequences(count: usize, seed: u64, mode_ids: &[u8]) -> Result<Vec<ModeSequence>> {
    let available = factorial_capped(mode_ids.len());
    if count as u128 > available {
        return Err(Error::SequenceSpaceExhausted { requested: count, available });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<Vec<u8>> = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    let mut base = mode_ids.to_vec();
    base.sort_unstable();
    while out.len() < count {
        let mut order = base.clone();
        order.shuffle(&mut rng);
        if seen.insert(order.clone()) {
            out.push(ModeSequence { order, seed });
        }
    }
    Ok(out)
}

/// First representative of every canonical form, in input order.
pub fn deduplicate(archs: Vec<ArchGraph>) -> Vec<ArchGraph> {
    let forms: Vec<CanonicalForm> = archs.iter().map(canonical_form).collect();
    let keep = first_of_each_form(&forms);
    let mut keep = keep.into_iter().peekable();
    archs
        .into_iter()
        .enumerate()
        .filter_map(|(i, a)| {
            if keep.peek() == Some(&i) {
                keep.next();
                Some(a)
            } else {
                None
            }
        })
        .collect()
}

/// Indices of the first occurrence of each distinct form.
pub fn first_of_each_form(forms: &[CanonicalForm]) -> Vec<usize> {
    let mut seen = HashSet::new();
    forms.iter().enumerate().filter(|(_, f)| seen.insert((*f).clone())).map(|(i, _)| i).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids() -> Vec<u8> {
        (1..=13).collect()
    }

    #[test]
    fn sequences_distinct_and_deterministic() {
        let a = generate_sequences(150, 42, &ids()).unwrap();
        let b = generate_sequences(150, 42, &ids()).unwrap();
        assert_eq!(a, b);
        let set: HashSet<_> = a.iter().map(|s| s.order.clone()).collect();
        assert_eq!(set.len(), 150);
        for s in &a {
            let mut o = s.order.clone();
            o.sort_unstable();
            assert_eq!(o, ids());
        }
        assert_ne!(a, generate_sequences(150, 43, &ids()).unwrap());
    }

    #[test]
    fn zero_and_one() {
        assert!(generate_sequences(0, 1, &ids()).unwrap().is_empty());
        let x = generate_sequences(1, 9, &ids()).unwrap();
        assert_eq!(x, generate_sequences(1, 9, &ids()).unwrap());
        assert_eq!(x.len(), 1);
    }

    #[test]
    fn exhausted_space() {
        assert!(generate_sequences(6, 1, &[1, 2, 3]).is_ok());
        assert!(matches!(
            generate_sequences(7, 1, &[1, 2, 3]),
            Err(Error::SequenceSpaceExhausted { available: 6, .. })
        ));
    }

    #[test]
    fn dedup_empty() {
        assert!(deduplicate(vec![]).is_empty());
    }
}
