use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write;

use crate::metrics::{LinkEstimate, MetricKind, PathCost};
use crate::topology::NodeId;

/// Directed link-state graph as known to one node: its own 1-hop links plus
/// every link advertised in received TCs.
#[derive(Debug, Clone, Default)]
pub struct LinkStateDb {
    adj: Vec<Vec<(NodeId, LinkEstimate)>>,
}

impl LinkStateDb {
    pub fn new(node_count: usize) -> Self {
        LinkStateDb {
            adj: vec![Vec::new(); node_count],
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn clear(&mut self) {
        for a in &mut self.adj {
            a.clear();
        }
    }

    pub fn add_link(&mut self, from: NodeId, to: NodeId, estimate: LinkEstimate) {
        self.adj[from.index()].push((to, estimate));
    }

    pub fn links_from(&self, node: NodeId) -> &[(NodeId, LinkEstimate)] {
        &self.adj[node.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteEntry {
    pub next_hop: NodeId,
    pub cost: PathCost,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingTable {
    owner: NodeId,
    entries: Vec<Option<RouteEntry>>,
}

impl RoutingTable {
    pub fn empty(owner: NodeId, node_count: usize) -> Self {
        RoutingTable {
            owner,
            entries: vec![None; node_count],
        }
    }

    pub fn owner(&self) -> NodeId {
        self.owner
    }

    pub fn get(&self, dest: NodeId) -> Option<&RouteEntry> {
        self.entries.get(dest.index()).and_then(|e| e.as_ref())
    }

    pub fn len(&self) -> usize {
        self.entries.iter().filter(|e| e.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &RouteEntry)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.as_ref().map(|e| (NodeId::from(i), e)))
    }

    /// `D <node> <dest> <next_hop> <cost>` lines, ascending by destination.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (dest, e) in self.iter() {
            let _ = writeln!(out, "D {} {} {} {}", self.owner, dest, e.next_hop, e.cost.value);
        }
        out
    }
}

/// Search key; lexicographic, smaller is better.
#[derive(Debug, Clone, Copy)]
struct Key(f64, f64);

fn key_of(kind: MetricKind, cost: &PathCost, log_loss: f64) -> Key {
    match kind {
        MetricKind::Etx | MetricKind::Md => Key(cost.value, cost.hops as f64),
        // Max product == min sum of -ln(fd * rd).
        MetricKind::Ml => Key(log_loss, cost.hops as f64),
        MetricKind::InvEtx => Key(cost.hops as f64, -cost.value),
    }
}

fn cmp_label(a: (Key, Option<NodeId>), b: (Key, Option<NodeId>)) -> Ordering {
    a.0 .0
        .total_cmp(&b.0 .0)
        .then(a.0 .1.total_cmp(&b.0 .1))
        .then(a.1.cmp(&b.1))
}

#[derive(Debug, Clone, Copy)]
struct Label {
    key: Key,
    cost: PathCost,
    log_loss: f64,
    next_hop: Option<NodeId>,
}

struct HeapItem {
    key: Key,
    next_hop: Option<NodeId>,
    node: NodeId,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed for a min-heap.
        cmp_label((other.key, other.next_hop), (self.key, self.next_hop)).then(other.node.cmp(&self.node))
    }
}

/// Best path from `source` to every reachable node under `metric`.
///
/// Unusable links (zero delivery product) and, for MD, links without a
/// delay sample are ignored. Equal costs fall back to fewer hops and then to
/// the smaller next hop.
pub fn compute_routing_table(source: NodeId, db: &LinkStateDb, metric: MetricKind) -> RoutingTable {
    let n = db.node_count();
    let mut labels: Vec<Option<Label>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();

    let start = PathCost::empty(metric);
    let start_key = key_of(metric, &start, 0.0);
    labels[source.index()] = Some(Label {
        key: start_key,
        cost: start,
        log_loss: 0.0,
        next_hop: None,
    });
    heap.push(HeapItem {
        key: start_key,
        next_hop: None,
        node: source,
    });

    while let Some(HeapItem { node, .. }) = heap.pop() {
        if settled[node.index()] {
            continue;
        }
        settled[node.index()] = true;
        let here = labels[node.index()].expect("queued nodes carry a label");

        for &(to, est) in db.links_from(node) {
            if settled[to.index()] || !est.usable() {
                continue;
            }
            let Ok(cost) = here.cost.extend(&est) else {
                continue;
            };
            let log_loss = here.log_loss - est.product().ln();
            let key = key_of(metric, &cost, log_loss);
            let next_hop = here.next_hop.or(Some(to));
            let improves = match &labels[to.index()] {
                None => true,
                Some(old) => cmp_label((key, next_hop), (old.key, old.next_hop)) == Ordering::Less,
            };
            if improves {
                labels[to.index()] = Some(Label {
                    key,
                    cost,
                    log_loss,
                    next_hop,
                });
                heap.push(HeapItem { key, next_hop, node: to });
            }
        }
    }

    let entries = labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            let l = l?;
            (i != source.index()).then(|| RouteEntry {
                next_hop: l.next_hop.expect("non-source labels have a next hop"),
                cost: l.cost,
            })
        })
        .collect();
    RoutingTable { owner: source, entries }
}
