use std::collections::{BTreeMap, BTreeSet};

use crate::topology::NodeId;

/// Greedy MPR selection.
///
/// `candidates` maps each symmetric 1-hop neighbor to its own degree;
/// `two_hop` maps each 2-hop neighbor to the 1-hop neighbors covering it.
/// Repeatedly takes the candidate covering the most still-uncovered 2-hop
/// nodes, preferring higher degree and then the smaller id, until all of
/// H2 is covered.
pub fn select_mprs(
    candidates: &BTreeMap<NodeId, usize>,
    two_hop: &BTreeMap<NodeId, BTreeSet<NodeId>>,
) -> BTreeSet<NodeId> {
    let mut uncovered: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for (&w, coverers) in two_hop {
        let usable: Vec<NodeId> = coverers
            .iter()
            .copied()
            .filter(|v| candidates.contains_key(v))
            .collect();
        if usable.is_empty() {
            log::warn!("2-hop neighbor {w} has no covering 1-hop neighbor; dropping stale entry");
            continue;
        }
        uncovered.insert(w, usable);
    }

    let mut selected = BTreeSet::new();
    while !uncovered.is_empty() {
        let mut reach: BTreeMap<NodeId, usize> = BTreeMap::new();
        for coverers in uncovered.values() {
            for &v in coverers {
                *reach.entry(v).or_default() += 1;
            }
        }
        // BTreeMap iteration is ascending by id, so strict comparison keeps
        // the smallest id among exact ties.
        let mut best: Option<(NodeId, usize, usize)> = None;
        for (&v, &r) in &reach {
            let deg = candidates[&v];
            let wins = match best {
                None => true,
                Some((_, br, bd)) => r > br || (r == br && deg > bd),
            };
            if wins {
                best = Some((v, r, deg));
            }
        }
        let (pick, _, _) = best.expect("uncovered nodes always have a coverer");
        selected.insert(pick);
        uncovered.retain(|_, coverers| !coverers.contains(&pick));
    }
    selected
}
