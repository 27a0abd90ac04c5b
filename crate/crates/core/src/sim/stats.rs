use crate::error::{Error, Result};

/// Data packets that left the network without reaching their destination.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DropCounters {
    /// Lost on the channel.
    pub loss: u64,
    /// No routing entry at a forwarding node.
    pub no_route: u64,
    /// Hop limit reached.
    pub ttl: u64,
    /// Tail-dropped at a full transmit queue.
    pub queue: u64,
}

impl DropCounters {
    pub fn total(&self) -> u64 {
        self.loss + self.no_route + self.ttl + self.queue
    }
}

/// Counters collected over the measurement window of one run.
///
/// Control transmissions are counted when they go on air; `hello_receptions`
/// counts successful HELLO deliveries at the receiver.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimStats {
    pub data_sent: u64,
    pub data_delivered: u64,
    /// Sum of end-to-end latencies of delivered packets (seconds).
    pub latency_sum: f64,
    pub bytes_delivered: u64,
    /// Sum of hop counts of delivered packets.
    pub delivered_hops: u64,
    pub drops: DropCounters,
    /// Data packets still queued or on air when the run ended.
    pub in_flight: u64,

    /// Every HELLO, TC (original or forwarded) and MD probe transmission.
    pub routing_packets_transmitted: u64,
    pub hello_tx: u64,
    pub tc_tx: u64,
    pub probe_tx: u64,
    /// TC transmissions (original and forwarded) of periodic TCs.
    pub tc_default_tx: u64,
    /// TC transmissions (original and forwarded) of MPR-change TCs.
    pub tc_triggered_tx: u64,
    pub tc_default_originated: u64,
    pub tc_triggered_originated: u64,
    pub hello_receptions: u64,
    pub tc_receptions: u64,
    /// Control packets tail-dropped at a full queue.
    pub control_queue_drops: u64,
    pub mpr_changes: u64,

    /// Channel time spent on periodic control (HELLO + periodic TC), seconds.
    pub airtime_periodic: f64,
    /// Channel time spent on triggered TCs, seconds.
    pub airtime_triggered: f64,
    /// Channel time spent on MD probes, seconds.
    pub airtime_metric: f64,
}

impl SimStats {
    /// `data_sent == delivered + in_flight + drops`.
    pub fn conserves_packets(&self) -> bool {
        self.data_sent == self.data_delivered + self.in_flight + self.drops.total()
    }

    pub fn routing_counters_consistent(&self) -> bool {
        self.routing_packets_transmitted == self.hello_tx + self.tc_tx + self.probe_tx
            && self.tc_tx == self.tc_default_tx + self.tc_triggered_tx
    }
}

/// Throughput, end-to-end delay and normalized routing load of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Performance {
    /// Delivered data packets per second.
    pub throughput: f64,
    /// Mean latency of delivered packets; `None` when nothing was delivered.
    pub e2ed: Option<f64>,
    /// Routing transmissions per delivered packet; `None` when nothing was
    /// delivered.
    pub nrl: Option<f64>,
}

pub fn finalize_stats(stats: &SimStats, duration: f64) -> Result<Performance> {
    if !(duration > 0.0) {
        return Err(Error::invalid("measurement duration must be positive"));
    }
    let delivered = stats.data_delivered as f64;
    let (e2ed, nrl) = if stats.data_delivered == 0 {
        (None, None)
    } else {
        (
            Some(stats.latency_sum / delivered),
            Some(stats.routing_packets_transmitted as f64 / delivered),
        )
    };
    Ok(Performance {
        throughput: delivered / duration,
        e2ed,
        nrl,
    })
}
