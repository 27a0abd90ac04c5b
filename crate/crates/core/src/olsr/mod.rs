//! Per-node OLSR protocol logic.
//!
//! Everything here is pure state manipulation; the event loop in
//! [`crate::sim`] decides when handlers run and moves messages between
//! nodes.

mod mpr;
mod neighbor;
mod routing;
mod tc;

use std::fmt;
use std::str::FromStr;

pub use mpr::select_mprs;
pub use neighbor::{HelloEntry, HelloMessage, NeighborEntry, NeighborState};
pub use routing::{compute_routing_table, LinkStateDb, RouteEntry, RoutingTable};
pub use tc::{flood_tc, generate_tc, DuplicateTable, FloodDecision, TcGenerator, TcMessage};

use crate::error::{Error, Result};

/// Protocol timing parameters (seconds).
#[derive(Debug, Clone, PartialEq)]
pub struct OlsrConfig {
    pub hello_interval: f64,
    pub tc_interval: f64,
    /// Length of the HELLO reception window used for delivery ratios.
    pub window: f64,
    pub neighbor_hold_time: f64,
    pub topology_hold_time: f64,
    /// MD probe period. `None` sends one probe round with every HELLO.
    pub probe_interval: Option<f64>,
    /// Admission and drop thresholds on a neighbor's `fd * rd`. `None`
    /// admits any link with a nonzero product.
    pub hysteresis: Option<Hysteresis>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hysteresis {
    pub high: f64,
    pub low: f64,
}

impl Hysteresis {
    pub const DEFAULT: Hysteresis = Hysteresis { high: 0.5, low: 0.2 };
}

impl OlsrConfig {
    /// Builds a config with the conventional hold-time multipliers
    /// (3x HELLO for neighbors, 3x TC for topology tuples).
    pub fn new(hello_interval: f64, tc_interval: f64, window: f64) -> Result<Self> {
        let cfg = OlsrConfig {
            hello_interval,
            tc_interval,
            window,
            neighbor_hold_time: 3.0 * hello_interval,
            topology_hold_time: 3.0 * tc_interval,
            probe_interval: Some(Profile::PROBE_INTERVAL),
            hysteresis: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.hello_interval,
            self.tc_interval,
            self.window,
            self.neighbor_hold_time,
            self.topology_hold_time,
        ];
        if all.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::invalid("OLSR intervals and hold times must be positive"));
        }
        if let Some(p) = self.probe_interval {
            if !(p > 0.0) {
                return Err(Error::invalid("probe interval must be positive"));
            }
        }
        if let Some(h) = self.hysteresis {
            if !(0.0 <= h.low && h.low <= h.high && h.high <= 1.0) {
                return Err(Error::invalid("hysteresis needs 0 <= low <= high <= 1"));
            }
        }
        // Also checks that the window is a multiple of the HELLO interval.
        crate::metrics::HelloWindow::new(self.window, self.hello_interval)?;
        Ok(())
    }

    /// HELLOs expected within one window.
    pub fn expected_hellos(&self) -> u32 {
        (self.window / self.hello_interval).round() as u32
    }

    pub fn effective_probe_interval(&self) -> f64 {
        self.probe_interval.unwrap_or(self.hello_interval)
    }
}

/// Named parameter profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Profile {
    /// HELLO 2 s, TC 5 s, window 20 s.
    OlsrDefault,
    /// HELLO 1 s, TC 15 s, window 10 s.
    Eolsr,
}

impl Profile {
    pub const ALL: [Profile; 2] = [Profile::OlsrDefault, Profile::Eolsr];

    /// MD probe period shared by both profiles.
    pub const PROBE_INTERVAL: f64 = 2.0;

    pub fn as_str(self) -> &'static str {
        match self {
            Profile::OlsrDefault => "olsr-default",
            Profile::Eolsr => "eolsr",
        }
    }

    pub fn config(self) -> OlsrConfig {
        match self {
            Profile::OlsrDefault => OlsrConfig::new(2.0, 5.0, 20.0),
            Profile::Eolsr => OlsrConfig::new(1.0, 15.0, 10.0),
        }
        .expect("built-in profiles are valid")
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "olsr-default" | "olsr" => Ok(Profile::OlsrDefault),
            "eolsr" => Ok(Profile::Eolsr),
            _ => Err(Error::UnknownName {
                what: "profile",
                value: s.to_string(),
            }),
        }
    }
}
