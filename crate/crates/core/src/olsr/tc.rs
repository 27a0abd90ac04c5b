use std::collections::BTreeMap;

use super::{NeighborState, OlsrConfig};
use crate::metrics::LinkEstimate;
use crate::topology::NodeId;

/// Topology control message: the origin's links to its MPR selectors.
#[derive(Debug, Clone, PartialEq)]
pub struct TcMessage {
    pub origin: NodeId,
    pub seq: u32,
    pub advertised: Vec<(NodeId, LinkEstimate)>,
    /// Emitted because the origin's MPR set changed.
    pub triggered: bool,
    pub emitted_at: f64,
}

impl TcMessage {
    pub fn size_bytes(&self) -> u32 {
        16 + 8 * self.advertised.len() as u32
    }
}

/// Per-origin TC sequence counter.
#[derive(Debug, Clone, Default)]
pub struct TcGenerator {
    next_seq: u32,
}

impl TcGenerator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn last_seq(&self) -> Option<u32> {
        self.next_seq.checked_sub(1)
    }

    pub fn generate(&mut self, state: &NeighborState, now: f64, triggered: bool) -> TcMessage {
        let seq = self.next_seq;
        self.next_seq += 1;
        let advertised = state
            .mpr_selectors()
            .filter_map(|n| state.estimate(n, now).map(|e| (n, e)))
            .collect();
        TcMessage {
            origin: state.id(),
            seq,
            advertised,
            triggered,
            emitted_at: now,
        }
    }
}

/// Builds the next TC for `state`; `config` is accepted for symmetry with
/// the scheduler, which owns the cadence.
pub fn generate_tc(
    gen: &mut TcGenerator,
    state: &NeighborState,
    _config: &OlsrConfig,
    now: f64,
    triggered: bool,
) -> TcMessage {
    gen.generate(state, now, triggered)
}

/// Highest TC sequence number seen per origin.
#[derive(Debug, Clone, Default)]
pub struct DuplicateTable {
    last_seen: BTreeMap<NodeId, u32>,
}

impl DuplicateTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn last_seen(&self, origin: NodeId) -> Option<u32> {
        self.last_seen.get(&origin).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FloodDecision {
    /// Duplicate or older than what we already hold.
    Stale,
    /// Fresh content; `forward` when we are an MPR of the transmitter.
    Process { forward: bool },
}

/// MPR flooding rule. `is_mpr_of_sender` tells whether the node that
/// transmitted this copy selected the receiver as an MPR.
pub fn flood_tc(dups: &mut DuplicateTable, msg: &TcMessage, is_mpr_of_sender: bool) -> FloodDecision {
    match dups.last_seen.get(&msg.origin) {
        Some(&seen) if msg.seq <= seen => FloodDecision::Stale,
        _ => {
            dups.last_seen.insert(msg.origin, msg.seq);
            FloodDecision::Process {
                forward: is_mpr_of_sender,
            }
        }
    }
}
