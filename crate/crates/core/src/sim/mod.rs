//! Discrete-event engine: event queue, per-node transmit queues, lossy
//! channel, CBR traffic and the statistics pipeline.
//!
//! A run has a warm-up phase followed by a measurement window. Flows and
//! counters only cover the window, so routing has converged before any
//! data is sent.

mod engine;
mod event;
mod stats;
mod traffic;

pub use engine::{run, transmit, Direction, PacketKind, Simulation};
pub use event::EventQueue;
pub use stats::{finalize_stats, DropCounters, Performance, SimStats};
pub use traffic::{select_flows, CbrFlow};

use crate::error::{Error, Result};
use crate::metrics::MetricKind;
use crate::olsr::{OlsrConfig, Profile};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub olsr: OlsrConfig,
    pub metric: MetricKind,
    /// Bits per second on every link.
    pub link_rate_bps: f64,
    /// Seconds, identical for every link.
    pub propagation_delay: f64,
    /// Packets waiting per node, excluding the one on air.
    pub queue_capacity: usize,
    pub data_size: u32,
    pub probe_size: u32,
    /// Maximum forwards of a data packet.
    pub ttl: u32,
    /// Jitter periodic control emissions by up to a tenth of their interval.
    pub jitter: bool,
    /// Seconds simulated before the measurement window opens.
    pub warmup: f64,
    /// Minimum spacing of route recomputations at one node.
    pub route_debounce: f64,
    /// Keep every node's MPR set after each selection.
    pub record_mpr_log: bool,
}

impl SimConfig {
    pub const DEFAULT_WARMUP: f64 = 50.0;

    pub fn new(olsr: OlsrConfig, metric: MetricKind) -> Self {
        SimConfig {
            olsr,
            metric,
            link_rate_bps: 1e6,
            propagation_delay: 1e-6,
            queue_capacity: 50,
            data_size: 64,
            probe_size: 134,
            ttl: 32,
            jitter: true,
            warmup: Self::DEFAULT_WARMUP,
            route_debounce: 0.1,
            record_mpr_log: false,
        }
    }

    pub fn from_profile(profile: Profile, metric: MetricKind) -> Self {
        Self::new(profile.config(), metric)
    }

    pub fn validate(&self) -> Result<()> {
        self.olsr.validate()?;
        if !(self.link_rate_bps > 0.0) {
            return Err(Error::invalid("link rate must be positive"));
        }
        if !(self.propagation_delay >= 0.0) || !(self.warmup >= 0.0) || !(self.route_debounce >= 0.0) {
            return Err(Error::invalid("delays, warm-up and debounce must be non-negative"));
        }
        if self.queue_capacity == 0 || self.data_size == 0 || self.probe_size == 0 || self.ttl == 0 {
            return Err(Error::invalid("queue capacity, packet sizes and TTL must be positive"));
        }
        Ok(())
    }

    /// Seconds needed to put `size_bytes` on air.
    pub fn transmission_delay(&self, size_bytes: u32) -> f64 {
        size_bytes as f64 * 8.0 / self.link_rate_bps
    }
}
