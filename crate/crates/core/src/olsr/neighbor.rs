use std::collections::{BTreeMap, BTreeSet};

use super::mpr::select_mprs;
use super::{Hysteresis, OlsrConfig};
use crate::error::Result;
use crate::metrics::{update_delay_estimate, HelloWindow, LinkEstimate};
use crate::topology::NodeId;

/// One neighbor as advertised in a HELLO.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HelloEntry {
    pub neighbor: NodeId,
    /// HELLOs heard from `neighbor` in the sender's current window.
    pub heard: u32,
    /// The sender considers the link usable in both directions.
    pub symmetric: bool,
    /// The sender selected `neighbor` as an MPR.
    pub mpr: bool,
    /// The sender's estimate of the `neighbor -> sender` one-way delay.
    pub delay: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HelloMessage {
    pub origin: NodeId,
    pub entries: Vec<HelloEntry>,
    pub emitted_at: f64,
}

impl HelloMessage {
    pub fn size_bytes(&self) -> u32 {
        16 + 8 * self.entries.len() as u32
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborEntry {
    pub window: HelloWindow,
    pub last_heard: f64,
    /// How many of our HELLOs the neighbor reported hearing.
    pub heard_by_neighbor: u32,
    /// Neighbor-measured delay of our probes towards it.
    pub reported_delay: Option<f64>,
    /// Our estimate of the delay of its probes towards us.
    pub probe_delay: Option<f64>,
    /// The neighbor's symmetric neighbors, sorted.
    pub neighbors: Vec<NodeId>,
    /// The neighbor chose us as one of its MPRs.
    pub selected_us: bool,
    /// Passed the hysteresis admission test and has not fallen below the
    /// drop threshold since.
    pub established: bool,
}

/// Neighbor table, 2-hop set and MPR set of a single node.
#[derive(Debug, Clone)]
pub struct NeighborState {
    id: NodeId,
    window: f64,
    expected: u32,
    hold_time: f64,
    hysteresis: Option<Hysteresis>,
    one_hop: BTreeMap<NodeId, NeighborEntry>,
    two_hop: BTreeMap<NodeId, BTreeSet<NodeId>>,
    mpr_set: BTreeSet<NodeId>,
    last_mpr_set: BTreeSet<NodeId>,
}

impl NeighborState {
    pub fn new(id: NodeId, config: &OlsrConfig) -> Self {
        NeighborState {
            id,
            window: config.window,
            expected: config.expected_hellos(),
            hold_time: config.neighbor_hold_time,
            hysteresis: config.hysteresis,
            one_hop: BTreeMap::new(),
            two_hop: BTreeMap::new(),
            mpr_set: BTreeSet::new(),
            last_mpr_set: BTreeSet::new(),
        }
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn one_hop(&self) -> &BTreeMap<NodeId, NeighborEntry> {
        &self.one_hop
    }

    pub fn two_hop(&self) -> &BTreeMap<NodeId, BTreeSet<NodeId>> {
        &self.two_hop
    }

    pub fn mpr_set(&self) -> &BTreeSet<NodeId> {
        &self.mpr_set
    }

    pub fn last_mpr_set(&self) -> &BTreeSet<NodeId> {
        &self.last_mpr_set
    }

    pub fn is_neighbor(&self, n: NodeId) -> bool {
        self.one_hop.contains_key(&n)
    }

    /// Current estimate of the link `self -> n`.
    pub fn estimate(&self, n: NodeId, now: f64) -> Option<LinkEstimate> {
        self.one_hop.get(&n).map(|e| self.entry_estimate(e, now))
    }

    fn entry_estimate(&self, e: &NeighborEntry, now: f64) -> LinkEstimate {
        LinkEstimate {
            fd: (e.heard_by_neighbor as f64 / self.expected as f64).min(1.0),
            rd: e.window.delivery_ratio(now),
            delay: e.reported_delay,
        }
    }

    fn is_up(&self, e: &NeighborEntry, now: f64) -> bool {
        e.established && self.entry_estimate(e, now).usable()
    }

    /// Neighbors whose link is established and usable in both directions,
    /// with their estimates.
    pub fn symmetric_neighbors(&self, now: f64) -> impl Iterator<Item = (NodeId, LinkEstimate)> + '_ {
        self.one_hop.iter().filter_map(move |(&n, e)| {
            let est = self.entry_estimate(e, now);
            (e.established && est.usable()).then_some((n, est))
        })
    }

    /// Applies the hysteresis thresholds to every neighbor. Returns `true`
    /// when some link was admitted or dropped.
    pub fn refresh_links(&mut self, now: f64) -> bool {
        let Some(h) = self.hysteresis else {
            return false;
        };
        let expected = self.expected as f64;
        let mut changed = false;
        for e in self.one_hop.values_mut() {
            let p = (e.heard_by_neighbor as f64 / expected).min(1.0) * e.window.delivery_ratio(now);
            let next = if e.established { p >= h.low && p > 0.0 } else { p >= h.high };
            changed |= next != e.established;
            e.established = next;
        }
        changed
    }

    /// Nodes that selected us as an MPR.
    pub fn mpr_selectors(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.one_hop
            .iter()
            .filter(|(_, e)| e.selected_us)
            .map(|(&n, _)| n)
    }

    /// Absorbs a HELLO heard from a neighbor. Returns `true` when the set of
    /// 1-hop or 2-hop neighbors changed.
    pub fn process_hello(&mut self, msg: &HelloMessage, now: f64) -> bool {
        debug_assert_ne!(msg.origin, self.id);
        let mut changed = self.expire(now);

        let me = msg.entries.iter().find(|e| e.neighbor == self.id);
        let neighbors: Vec<NodeId> = msg
            .entries
            .iter()
            .filter(|e| e.symmetric && e.neighbor != self.id)
            .map(|e| e.neighbor)
            .collect();

        let (window, expected) = (self.window, self.expected);
        let admit_all = self.hysteresis.is_none();
        let entry = self.one_hop.entry(msg.origin).or_insert_with(|| {
            changed = true;
            NeighborEntry {
                window: HelloWindow::with_expected(window, expected).expect("validated config"),
                last_heard: now,
                heard_by_neighbor: 0,
                reported_delay: None,
                probe_delay: None,
                neighbors: Vec::new(),
                selected_us: false,
                established: admit_all,
            }
        });
        entry.window.record(now);
        entry.last_heard = now;
        entry.heard_by_neighbor = me.map_or(0, |e| e.heard.min(expected));
        entry.reported_delay = me.and_then(|e| e.delay);
        entry.selected_us = me.is_some_and(|e| e.mpr);
        if entry.neighbors != neighbors {
            entry.neighbors = neighbors;
            changed = true;
        }

        changed |= self.refresh_links(now);
        if changed {
            self.rebuild_two_hop(now);
        }
        changed
    }

    /// Drops neighbors unheard for longer than the hold time.
    pub fn expire(&mut self, now: f64) -> bool {
        let hold = self.hold_time;
        let before = self.one_hop.len();
        self.one_hop.retain(|_, e| now - e.last_heard <= hold);
        self.one_hop.len() != before
    }

    /// Recomputes H2: symmetric neighbors of symmetric neighbors, minus
    /// ourselves and every 1-hop neighbor.
    pub fn rebuild_two_hop(&mut self, now: f64) {
        let mut two_hop: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
        for (&v, e) in &self.one_hop {
            if !self.is_up(e, now) {
                continue;
            }
            for &w in &e.neighbors {
                if w != self.id && !self.one_hop.contains_key(&w) {
                    two_hop.entry(w).or_default().insert(v);
                }
            }
        }
        self.two_hop = two_hop;
    }

    /// Expires stale neighbors, refreshes H2 and reruns MPR selection.
    pub fn select_mprs(&mut self, now: f64) -> &BTreeSet<NodeId> {
        self.expire(now);
        self.refresh_links(now);
        self.rebuild_two_hop(now);
        let candidates: BTreeMap<NodeId, usize> = self
            .one_hop
            .iter()
            .filter(|(_, e)| self.is_up(e, now))
            .map(|(&n, e)| (n, e.neighbors.len()))
            .collect();
        self.mpr_set = select_mprs(&candidates, &self.two_hop);
        &self.mpr_set
    }

    /// Reports whether the MPR set differs from the one seen at the previous
    /// call, then remembers the current set.
    pub fn maybe_trigger_tc(&mut self) -> bool {
        let changed = self.mpr_set != self.last_mpr_set;
        if changed {
            self.last_mpr_set = self.mpr_set.clone();
        }
        changed
    }

    /// Feeds a probe one-way delay sample from neighbor `from`.
    pub fn record_probe(&mut self, from: NodeId, sample: f64) -> Result<()> {
        if let Some(e) = self.one_hop.get_mut(&from) {
            e.probe_delay = Some(update_delay_estimate(e.probe_delay, sample)?);
        }
        Ok(())
    }

    pub fn build_hello(&self, now: f64) -> HelloMessage {
        let entries = self
            .one_hop
            .iter()
            .map(|(&n, e)| HelloEntry {
                neighbor: n,
                heard: e.window.count(now).min(self.expected),
                symmetric: self.is_up(e, now),
                mpr: self.mpr_set.contains(&n),
                delay: e.probe_delay,
            })
            .collect();
        HelloMessage {
            origin: self.id,
            entries,
            emitted_at: now,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> OlsrConfig {
        OlsrConfig::new(2.0, 5.0, 20.0).unwrap()
    }

    fn hello(origin: u32, entries: &[(u32, u32, bool)], t: f64) -> HelloMessage {
        HelloMessage {
            origin: NodeId(origin),
            entries: entries
                .iter()
                .map(|&(n, heard, symmetric)| HelloEntry {
                    neighbor: NodeId(n),
                    heard,
                    symmetric,
                    mpr: false,
                    delay: None,
                })
                .collect(),
            emitted_at: t,
        }
    }

    #[test]
    fn first_hello_inserts_neighbor() {
        let mut s = NeighborState::new(NodeId(0), &cfg());
        assert!(s.process_hello(&hello(3, &[], 1.0), 1.0));
        let e = &s.one_hop()[&NodeId(3)];
        assert_eq!(e.window.count(1.0), 1);
    }

    #[test]
    fn listed_neighbor_enters_two_hop() {
        let mut s = NeighborState::new(NodeId(0), &cfg());
        s.process_hello(&hello(3, &[(0, 10, true), (7, 10, true)], 1.0), 1.0);
        assert_eq!(s.two_hop()[&NodeId(7)], BTreeSet::from([NodeId(3)]));
        assert!(!s.two_hop().contains_key(&NodeId(0)));
    }

    #[test]
    fn forward_ratio_from_reported_count() {
        let mut s = NeighborState::new(NodeId(0), &cfg());
        s.process_hello(&hello(3, &[(0, 5, true)], 1.0), 1.0);
        assert_eq!(s.estimate(NodeId(3), 1.0).unwrap().fd, 0.5);
    }

    #[test]
    fn two_hop_excludes_one_hop() {
        let mut s = NeighborState::new(NodeId(0), &cfg());
        s.process_hello(&hello(1, &[(0, 10, true), (2, 10, true)], 1.0), 1.0);
        assert!(s.two_hop().contains_key(&NodeId(2)));
        s.process_hello(&hello(2, &[(0, 10, true), (1, 10, true)], 1.5), 1.5);
        assert!(s.two_hop().is_empty());
    }

    #[test]
    fn neighbors_expire_after_hold_time() {
        let mut s = NeighborState::new(NodeId(0), &cfg());
        s.process_hello(&hello(3, &[(0, 10, true)], 1.0), 1.0);
        assert!(!s.expire(7.0));
        assert!(s.expire(7.1));
        assert!(s.one_hop().is_empty());
    }

    #[test]
    fn unheard_link_is_not_symmetric() {
        let mut s = NeighborState::new(NodeId(0), &cfg());
        s.process_hello(&hello(3, &[], 1.0), 1.0);
        assert_eq!(s.symmetric_neighbors(1.0).count(), 0);
        let h = s.build_hello(1.0);
        assert_eq!(h.entries.len(), 1);
        assert!(!h.entries[0].symmetric);
        assert_eq!(h.size_bytes(), 24);
    }

    #[test]
    fn trigger_tracks_mpr_changes() {
        let mut s = NeighborState::new(NodeId(0), &cfg());
        // chain 0 - 1 - 2
        s.process_hello(&hello(1, &[(0, 10, true), (2, 10, true)], 1.0), 1.0);
        s.select_mprs(1.0);
        assert!(s.maybe_trigger_tc());
        s.select_mprs(1.5);
        assert!(!s.maybe_trigger_tc());
        assert_eq!(s.mpr_set(), &BTreeSet::from([NodeId(1)]));
    }

    #[test]
    fn probe_samples_smoothed() {
        let mut s = NeighborState::new(NodeId(0), &cfg());
        s.process_hello(&hello(3, &[], 1.0), 1.0);
        s.record_probe(NodeId(3), 0.010).unwrap();
        s.record_probe(NodeId(3), 0.0).unwrap();
        let d = s.one_hop()[&NodeId(3)].probe_delay.unwrap();
        assert!((d - 0.007).abs() < 1e-15);
        assert!(s.record_probe(NodeId(3), -1.0).is_err());
    }
}
