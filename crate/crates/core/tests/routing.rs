mod common;

use common::*;
use mhop_sim::olsr::compute_routing_table;
use mhop_sim::{LinkEstimate, MetricKind, NodeId};
use proptest::prelude::*;

#[test]
fn table_costs_match_path_enumeration() {
    let mut r = rng(7);
    for case in 0..100 {
        let n = 3 + case % 6;
        let links = random_links(&mut r, n, 0.5);
        let db = link_db(n, &links);
        for metric in MetricKind::ALL {
            let table = compute_routing_table(NodeId(0), &db, metric);
            for t in 1..n {
                let want = best_by_enumeration(metric, n, &links, 0, t);
                let got = table.get(NodeId::from(t));
                match (want, got) {
                    (None, None) => {}
                    (Some((v, hops)), Some(e)) => {
                        assert!(rel_close(e.cost.value, v, 1e-12), "case {case} {metric} 0->{t}: {} vs {v}", e.cost.value);
                        if metric == MetricKind::InvEtx {
                            assert_eq!(e.cost.hops, hops);
                        }
                    }
                    other => panic!("case {case} {metric} 0->{t}: reachability differs {other:?}"),
                }
            }
        }
    }
}

#[test]
fn perfect_links_give_hop_count_routes() {
    let mut r = rng(11);
    for _ in 0..50 {
        let n = 8;
        let edges = random_edges(&mut r, n, 0.35);
        let adj = adjacency(n, &edges);
        let mut links = Links::new();
        for &(a, b) in &edges {
            links.insert((a, b), LinkEstimate::PERFECT.with_delay(0.002));
            links.insert((b, a), LinkEstimate::PERFECT.with_delay(0.002));
        }
        let db = link_db(n, &links);
        let hops = bfs_hops(&adj, 0);
        for metric in MetricKind::ALL {
            let table = compute_routing_table(NodeId(0), &db, metric);
            for t in 1..n {
                let e = table.get(NodeId::from(t));
                assert_eq!(e.map(|e| e.cost.hops), hops[t], "{metric} 0->{t}");
                if metric == MetricKind::Etx {
                    if let Some(e) = e {
                        assert_eq!(e.cost.value, e.cost.hops as f64);
                    }
                }
            }
        }
    }
}

fn arb_links() -> impl Strategy<Value = (usize, Links)> {
    (3usize..9, any::<u64>()).prop_map(|(n, seed)| (n, random_links(&mut rng(seed), n, 0.45)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Following next hops from any node with tables built from the same
    /// database reaches the destination without revisiting a node.
    #[test]
    fn hop_by_hop_walk_is_loop_free((n, links) in arb_links(), m in 0usize..4) {
        let metric = MetricKind::ALL[m];
        let db = link_db(n, &links);
        let tables: Vec<_> = (0..n).map(|s| compute_routing_table(NodeId::from(s), &db, metric)).collect();
        for s in 0..n {
            for t in 0..n {
                if s == t || tables[s].get(NodeId::from(t)).is_none() {
                    continue;
                }
                let mut at = s;
                let mut seen = vec![false; n];
                while at != t {
                    prop_assert!(!seen[at], "{} loop {}->{}", metric, s, t);
                    seen[at] = true;
                    let e = tables[at].get(NodeId::from(t));
                    prop_assert!(e.is_some(), "{} dead end at {} for {}->{}", metric, at, s, t);
                    let next = e.unwrap().next_hop.index();
                    prop_assert!(links.contains_key(&(at, next)));
                    at = next;
                }
            }
        }
    }

    /// Reported next hop is the first hop of a path whose cost equals the
    /// table entry.
    #[test]
    fn next_hop_is_adjacent_to_source((n, links) in arb_links(), m in 0usize..4) {
        let metric = MetricKind::ALL[m];
        let table = compute_routing_table(NodeId(0), &link_db(n, &links), metric);
        for (dest, e) in table.iter() {
            prop_assert!(links.contains_key(&(0, e.next_hop.index())), "{}", dest);
            prop_assert!(e.cost.hops >= 1);
        }
    }
}
