//! Brute-force reference implementations shared by the integration tests
//! and the acceptance harness. Nothing here calls into the code under test
//! except for plain data types.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use mhop_sim::olsr::LinkStateDb;
use mhop_sim::topology::{LinkQuality, Position};
use mhop_sim::{LinkEstimate, MetricKind, NodeId, Topology};
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Undirected random graph as an edge list over `0..n`.
pub fn random_edges(rng: &mut impl Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    edges
}

pub fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<BTreeSet<usize>> {
    let mut adj = vec![BTreeSet::new(); n];
    for &(a, b) in edges {
        adj[a].insert(b);
        adj[b].insert(a);
    }
    adj
}

/// A node's view: symmetric neighbors with their degree and the strict
/// 2-hop neighborhood mapped to its coverers.
pub struct Neighborhood {
    pub candidates: BTreeMap<NodeId, usize>,
    pub two_hop: BTreeMap<NodeId, BTreeSet<NodeId>>,
}

pub fn neighborhood(adj: &[BTreeSet<usize>], node: usize) -> Neighborhood {
    let candidates = adj[node].iter().map(|&v| (NodeId::from(v), adj[v].len())).collect();
    let mut two_hop: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
    for &v in &adj[node] {
        for &w in &adj[v] {
            if w != node && !adj[node].contains(&w) {
                two_hop.entry(NodeId::from(w)).or_default().insert(NodeId::from(v));
            }
        }
    }
    Neighborhood { candidates, two_hop }
}

pub fn covers(set: &BTreeSet<NodeId>, two_hop: &BTreeMap<NodeId, BTreeSet<NodeId>>) -> bool {
    two_hop.values().all(|cov| cov.iter().any(|v| set.contains(v)))
}

/// Smallest subset of the candidates covering every 2-hop node, by
/// enumeration of all subsets in order of size.
pub fn minimum_cover(nb: &Neighborhood) -> BTreeSet<NodeId> {
    let cands: Vec<NodeId> = nb.candidates.keys().copied().collect();
    let k = cands.len();
    assert!(k <= 20, "enumeration limited to small neighborhoods");
    let mut best: Option<BTreeSet<NodeId>> = None;
    for mask in 0u32..(1 << k) {
        if best.as_ref().is_some_and(|b| b.len() <= mask.count_ones() as usize) {
            continue;
        }
        let set: BTreeSet<NodeId> = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| cands[i]).collect();
        if covers(&set, &nb.two_hop) {
            best = Some(set);
        }
    }
    best.expect("the full candidate set covers H2")
}

/// Directed link table with random qualities and delays.
pub type Links = BTreeMap<(usize, usize), LinkEstimate>;

pub fn random_links(rng: &mut impl Rng, n: usize, p: f64) -> Links {
    let mut links = Links::new();
    for (a, b) in random_edges(rng, n, p) {
        let fd = rng.random_range(0.05..=1.0);
        let rd = rng.random_range(0.05..=1.0);
        let d1 = rng.random_range(1e-4..1e-1);
        let d2 = rng.random_range(1e-4..1e-1);
        links.insert((a, b), LinkEstimate::new(fd, rd).with_delay(d1));
        links.insert((b, a), LinkEstimate::new(rd, fd).with_delay(d2));
    }
    links
}

pub fn link_db(n: usize, links: &Links) -> LinkStateDb {
    let mut db = LinkStateDb::new(n);
    for (&(a, b), &l) in links {
        db.add_link(NodeId::from(a), NodeId::from(b), l);
    }
    db
}

/// Every simple path from `s` to `t` as a node list.
pub fn simple_paths(n: usize, links: &Links, s: usize, t: usize) -> Vec<Vec<usize>> {
    let mut out_edges = vec![Vec::new(); n];
    for &(a, b) in links.keys() {
        out_edges[a].push(b);
    }
    let mut out = Vec::new();
    let mut path = vec![s];
    let mut on = vec![false; n];
    on[s] = true;
    fn dfs(
        u: usize,
        t: usize,
        adj: &[Vec<usize>],
        on: &mut [bool],
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if u == t {
            out.push(path.clone());
            return;
        }
        for &v in &adj[u] {
            if !on[v] {
                on[v] = true;
                path.push(v);
                dfs(v, t, adj, on, path, out);
                path.pop();
                on[v] = false;
            }
        }
    }
    dfs(s, t, &out_edges, &mut on, &mut path, &mut out);
    out
}

/// Best path value under `metric`, with the hop count of the chosen path,
/// found by scanning every simple path. InvETX prefers fewer hops first and
/// then the larger sum of `fd * rd`.
pub fn best_by_enumeration(metric: MetricKind, n: usize, links: &Links, s: usize, t: usize) -> Option<(f64, u32)> {
    let mut best: Option<(f64, u32)> = None;
    for p in simple_paths(n, links, s, t) {
        let ls: Vec<LinkEstimate> = p.windows(2).map(|w| links[&(w[0], w[1])]).collect();
        let hops = ls.len() as u32;
        let value = match metric {
            MetricKind::Etx => ls.iter().map(|l| 1.0 / (l.fd * l.rd)).sum::<f64>(),
            MetricKind::InvEtx => ls.iter().map(|l| l.fd * l.rd).sum::<f64>(),
            MetricKind::Ml => ls.iter().map(|l| l.fd * l.rd).product::<f64>(),
            MetricKind::Md => ls.iter().map(|l| l.delay.unwrap()).sum::<f64>(),
        };
        let better = match best {
            None => true,
            Some((bv, bh)) => match metric {
                MetricKind::Etx | MetricKind::Md => value < bv,
                MetricKind::Ml => value > bv,
                MetricKind::InvEtx => hops < bh || (hops == bh && value > bv),
            },
        };
        if better {
            best = Some((value, hops));
        }
    }
    best
}

pub fn rel_close(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Hop distances from `s` by breadth-first search.
pub fn bfs_hops(adj: &[BTreeSet<usize>], s: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; adj.len()];
    dist[s] = Some(0);
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(dist[u].unwrap() + 1);
                q.push_back(v);
            }
        }
    }
    dist
}

/// Undirected graph with the given capacities, positions unused.
pub fn capacity_graph(n: usize, caps: &[(usize, usize, f64)]) -> Topology {
    Topology::from_parts(
        vec![Position { x: 0.0, y: 0.0 }; n],
        1.0,
        1.0,
        caps.iter()
            .map(|&(a, b, c)| (NodeId::from(a), NodeId::from(b), LinkQuality::PERFECT, c)),
    )
    .unwrap()
}

/// Max over simple paths of the minimum capacity; 0 if `t` is unreachable.
pub fn widest_by_enumeration(n: usize, caps: &[(usize, usize, f64)], s: usize, t: usize) -> f64 {
    let mut links = Links::new();
    let mut cap = BTreeMap::new();
    for &(a, b, c) in caps {
        links.insert((a, b), LinkEstimate::PERFECT);
        links.insert((b, a), LinkEstimate::PERFECT);
        cap.insert((a, b), c);
        cap.insert((b, a), c);
    }
    simple_paths(n, &links, s, t)
        .iter()
        .map(|p| p.windows(2).map(|w| cap[&(w[0], w[1])]).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}
