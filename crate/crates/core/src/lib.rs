//! Deterministic discrete-event simulation of OLSR over static wireless
//! multi-hop networks.
//!
//! The crate is organised bottom-up:
//!
//! - [`topology`]: seeded random placement and the distance-based loss model.
//! - [`metrics`]: link estimation from HELLO windows and MD probes, plus the
//!   path algebra for ETX, InvETX, ML and MD.
//! - [`olsr`]: neighbor sensing, MPR selection, TC flooding and route
//!   computation.
//! - [`sim`]: the event loop, transmit queues, CBR traffic and statistics.
//! - [`overhead`]: the analytical control-overhead and efficiency model.
//! - [`experiment`]: the profile x metric x rate matrix, CSV output and
//!   trend comparison between the default and enhanced OLSR profiles.

pub mod error;
pub mod experiment;
pub mod metrics;
pub mod olsr;
pub mod overhead;
pub mod sim;
pub mod topology;

pub use error::{Error, Result};
pub use metrics::{LinkEstimate, MetricKind, PathCost};
pub use olsr::OlsrConfig;
pub use sim::{SimConfig, SimStats};
pub use topology::{NodeId, Topology};
