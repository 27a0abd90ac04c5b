use std::collections::BTreeSet;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::topology::NodeId;

/// Constant bit rate flow. `start` and `stop` are relative to the beginning
/// of the measurement window; packets are emitted at `start + k / rate` for
/// every such instant before `stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbrFlow {
    pub src: NodeId,
    pub dst: NodeId,
    /// Packets per second.
    pub rate: f64,
    pub start: f64,
    pub stop: f64,
}

impl CbrFlow {
    pub fn new(src: NodeId, dst: NodeId, rate: f64, start: f64, stop: f64) -> Result<Self> {
        let f = CbrFlow {
            src,
            dst,
            rate,
            start,
            stop,
        };
        f.validate(usize::MAX)?;
        Ok(f)
    }

    pub fn validate(&self, node_count: usize) -> Result<()> {
        if self.src == self.dst {
            return Err(Error::invalid(format!("flow source and destination are both {}", self.src)));
        }
        for n in [self.src, self.dst] {
            if n.index() >= node_count {
                return Err(Error::UnknownNode(n));
            }
        }
        if !(self.rate > 0.0) {
            return Err(Error::invalid("flow rate must be positive"));
        }
        if !(self.start >= 0.0) || !(self.stop >= self.start) {
            return Err(Error::invalid("flow needs 0 <= start <= stop"));
        }
        Ok(())
    }

    /// Emission instants (relative) of the `k`-th packet.
    pub fn emission_time(&self, k: u64) -> f64 {
        self.start + k as f64 / self.rate
    }

    /// Number of packets the flow emits.
    pub fn packet_count(&self) -> u64 {
        let mut k = 0;
        while self.emission_time(k) < self.stop {
            k += 1;
        }
        k
    }
}

/// Draws `count` distinct ordered (src, dst) pairs without replacement.
///
/// Each flow starts at a phase offset uniform in `[0, 1 / rate)`. The same
/// `seed` yields the same pairs and phase fractions for every rate.
pub fn select_flows(node_count: usize, count: usize, rate: f64, duration: f64, seed: u64) -> Result<Vec<CbrFlow>> {
    let pairs_available = node_count.saturating_mul(node_count.saturating_sub(1));
    if count > pairs_available {
        return Err(Error::invalid(format!(
            "{count} flows requested but only {pairs_available} distinct pairs exist"
        )));
    }
    if !(rate > 0.0) {
        return Err(Error::invalid("flow rate must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_F10F_u64);
    let mut seen = BTreeSet::new();
    let mut flows = Vec::with_capacity(count);
    while flows.len() < count {
        let src = rng.random_range(0..node_count);
        let dst = rng.random_range(0..node_count);
        if src == dst || !seen.insert((src, dst)) {
            continue;
        }
        let phase: f64 = rng.random();
        flows.push(CbrFlow::new(
            NodeId::from(src),
            NodeId::from(dst),
            rate,
            (phase / rate).min(duration),
            duration,
        )?);
    }
    Ok(flows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packet_counts() {
        let f = CbrFlow::new(NodeId(0), NodeId(1), 2.0, 0.0, 100.0).unwrap();
        assert_eq!(f.packet_count(), 200);
        let f = CbrFlow::new(NodeId(0), NodeId(1), 2.0, 0.3, 100.0).unwrap();
        assert_eq!(f.packet_count(), 200);
    }

    #[test]
    fn rejects_bad_flows() {
        assert!(CbrFlow::new(NodeId(1), NodeId(1), 2.0, 0.0, 1.0).is_err());
        assert!(CbrFlow::new(NodeId(0), NodeId(1), 0.0, 0.0, 1.0).is_err());
        assert!(CbrFlow::new(NodeId(0), NodeId(1), 1.0, 2.0, 1.0).is_err());
        let f = CbrFlow::new(NodeId(0), NodeId(9), 1.0, 0.0, 1.0).unwrap();
        assert!(f.validate(5).is_err());
    }

    #[test]
    fn distinct_pairs() {
        let flows = select_flows(50, 20, 4.0, 900.0, 101).unwrap();
        assert_eq!(flows.len(), 20);
        let pairs: BTreeSet<_> = flows.iter().map(|f| (f.src, f.dst)).collect();
        assert_eq!(pairs.len(), 20);
        assert!(flows.iter().all(|f| f.src != f.dst && f.start < 0.25));
        assert!(select_flows(3, 7, 1.0, 10.0, 1).is_err());
    }

    #[test]
    fn pairs_do_not_depend_on_rate() {
        let a = select_flows(50, 20, 2.0, 900.0, 7).unwrap();
        let b = select_flows(50, 20, 16.0, 900.0, 7).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.src, x.dst), (y.src, y.dst));
            assert!(((x.start * 2.0) - (y.start * 16.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn more_rate_never_fewer_packets() {
        let mut last = 0;
        for rate in [2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0] {
            let total: u64 = select_flows(50, 20, rate, 900.0, 3)
                .unwrap()
                .iter()
                .map(CbrFlow::packet_count)
                .sum();
            assert!(total >= last);
            last = total;
        }
    }
}
