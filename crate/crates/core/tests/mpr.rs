mod common;

use std::collections::BTreeSet;

use common::*;
use mhop_sim::olsr::{select_mprs, NeighborState, OlsrConfig};
use mhop_sim::olsr::{HelloEntry, HelloMessage};
use mhop_sim::NodeId;
use proptest::prelude::*;

#[test]
fn greedy_within_twice_the_minimum_cover() {
    let mut r = rng(3);
    let mut checked = 0;
    while checked < 200 {
        let n = 4 + checked % 7;
        let adj = adjacency(n, &random_edges(&mut r, n, 0.4));
        let nb = neighborhood(&adj, 0);
        let greedy = select_mprs(&nb.candidates, &nb.two_hop);
        let exact = minimum_cover(&nb);
        assert!(covers(&greedy, &nb.two_hop));
        assert!(covers(&exact, &nb.two_hop));
        assert!(greedy.len() <= 2 * exact.len(), "greedy {greedy:?} exact {exact:?}");
        checked += 1;
    }
}

#[test]
fn greedy_is_optimal_on_a_star_of_stars() {
    // 0 - {1, 2, 3}; 1 reaches {4, 5, 6}, 2 reaches {6}, 3 reaches {7}.
    let edges = [(0, 1), (0, 2), (0, 3), (1, 4), (1, 5), (1, 6), (2, 6), (3, 7)];
    let nb = neighborhood(&adjacency(8, &edges), 0);
    let want: BTreeSet<NodeId> = [NodeId(1), NodeId(3)].into_iter().collect();
    assert_eq!(select_mprs(&nb.candidates, &nb.two_hop), want);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn selection_covers_two_hop_set(n in 5usize..40, p in 0.05f64..0.5, seed in any::<u64>()) {
        let adj = adjacency(n, &random_edges(&mut rng(seed), n, p));
        let nb = neighborhood(&adj, 0);
        let mprs = select_mprs(&nb.candidates, &nb.two_hop);
        prop_assert!(covers(&mprs, &nb.two_hop));
        prop_assert!(mprs.iter().all(|m| nb.candidates.contains_key(m)));
        if nb.two_hop.is_empty() {
            prop_assert!(mprs.is_empty());
        }
    }

    /// A pick always has positive reach.
    #[test]
    fn every_mpr_covers_some_two_hop_node(n in 5usize..30, seed in any::<u64>()) {
        let adj = adjacency(n, &random_edges(&mut rng(seed), n, 0.25));
        let nb = neighborhood(&adj, 0);
        for m in select_mprs(&nb.candidates, &nb.two_hop) {
            prop_assert!(nb.two_hop.values().any(|cov| cov.contains(&m)));
        }
    }
}

/// Drives a NeighborState with HELLOs from a fixed graph and checks the
/// MPR set it computes covers the 2-hop neighborhood seen through those
/// HELLOs.
#[test]
fn neighbor_state_selection_covers_hello_view() {
    let mut r = rng(19);
    let cfg = OlsrConfig::new(2.0, 5.0, 20.0).unwrap();
    for _ in 0..50 {
        let n = 12;
        let adj = adjacency(n, &random_edges(&mut r, n, 0.3));
        let mut state = NeighborState::new(NodeId(0), &cfg);
        // Two rounds: the first makes 0 known to its neighbors, the second
        // carries symmetric entries.
        for round in 0..2 {
            let now = 1.0 + round as f64 * cfg.hello_interval;
            for &v in &adj[0] {
                let entries = adj[v]
                    .iter()
                    .map(|&w| HelloEntry {
                        neighbor: NodeId::from(w),
                        heard: cfg.expected_hellos(),
                        symmetric: true,
                        mpr: false,
                        delay: None,
                    })
                    .collect();
                let msg = HelloMessage {
                    origin: NodeId::from(v),
                    entries,
                    emitted_at: now,
                };
                state.process_hello(&msg, now);
            }
        }
        let now = 1.0 + 2.0 * cfg.hello_interval;
        let mprs = state.select_mprs(now).clone();
        let nb = neighborhood(&adj, 0);
        assert!(covers(&mprs, &nb.two_hop), "{mprs:?} vs {:?}", nb.two_hop);
    }
}
