use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metrics::MetricKind;
use crate::olsr::{Hysteresis, Profile};
use crate::sim::SimConfig;
use crate::topology::TopologyParams;

/// Everything a matrix run needs. Parsed from a flat `key = value` file;
/// unknown keys are rejected so typos do not silently fall back to
/// defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub profiles: Vec<Profile>,
    pub metrics: Vec<MetricKind>,
    pub rates: Vec<f64>,
    pub seeds: Vec<u64>,
    pub duration: f64,
    pub warmup: f64,
    pub nodes: usize,
    pub side: f64,
    pub radio_range: f64,
    pub flows: usize,
    pub link_capacity: f64,
    pub jitter_min: f64,
    pub topology_attempts: u32,
    pub link_rate_bps: f64,
    pub propagation_delay: f64,
    pub queue_capacity: usize,
    pub data_size: u32,
    pub probe_size: u32,
    pub ttl: u32,
    pub control_jitter: bool,
    pub route_debounce: f64,
    /// `None` probes once per HELLO interval.
    pub probe_interval: Option<f64>,
    pub hysteresis: Option<Hysteresis>,
    /// 0 picks the number of available cores.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            profiles: Profile::ALL.to_vec(),
            metrics: MetricKind::ALL.to_vec(),
            rates: vec![2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0],
            seeds: vec![101, 102, 103, 104, 105],
            duration: 900.0,
            warmup: SimConfig::DEFAULT_WARMUP,
            nodes: 50,
            side: 1000.0,
            radio_range: TopologyParams::DEFAULT_RADIO_RANGE,
            flows: 20,
            link_capacity: TopologyParams::DEFAULT_CAPACITY,
            jitter_min: 0.9,
            topology_attempts: 100,
            link_rate_bps: 1e6,
            propagation_delay: 1e-6,
            queue_capacity: 50,
            data_size: 64,
            probe_size: 134,
            ttl: 32,
            control_jitter: true,
            route_debounce: 0.1,
            probe_interval: Some(Profile::PROBE_INTERVAL),
            hysteresis: None,
            workers: 0,
        }
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str, line: usize) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::parse(line, format!("bad entry `{s}` in {key}"))))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::parse(line, format!("{key} must not be empty")));
    }
    Ok(items)
}

fn parse_one<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::parse(line, format!("bad value `{value}` for {key}")))
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.parse()
    }

    pub fn validate(&self) -> Result<()> {
        if self.profiles.is_empty() || self.metrics.is_empty() || self.rates.is_empty() || self.seeds.is_empty() {
            return Err(Error::invalid("profiles, metrics, rates and seeds must be non-empty"));
        }
        if self.rates.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::invalid("rates must be positive"));
        }
        if !(self.duration >= 0.0) || self.nodes < 2 || !(self.side > 0.0) || !(self.radio_range > 0.0) {
            return Err(Error::invalid("duration, node count, side and radio range are out of range"));
        }
        self.topology_params(0).validate()?;
        self.sim_config(Profile::OlsrDefault, MetricKind::Etx).validate()
    }

    pub fn topology_params(&self, seed: u64) -> TopologyParams {
        TopologyParams {
            jitter_min: self.jitter_min,
            capacity: self.link_capacity,
            ..TopologyParams::new(self.nodes, self.side, self.radio_range, seed)
        }
    }

    pub fn sim_config(&self, profile: Profile, metric: MetricKind) -> SimConfig {
        let mut cfg = SimConfig::from_profile(profile, metric);
        cfg.olsr.probe_interval = self.probe_interval;
        cfg.olsr.hysteresis = self.hysteresis;
        cfg.link_rate_bps = self.link_rate_bps;
        cfg.propagation_delay = self.propagation_delay;
        cfg.queue_capacity = self.queue_capacity;
        cfg.data_size = self.data_size;
        cfg.probe_size = self.probe_size;
        cfg.ttl = self.ttl;
        cfg.jitter = self.control_jitter;
        cfg.warmup = self.warmup;
        cfg.route_debounce = self.route_debounce;
        cfg
    }

    /// The configuration in the same format [`FromStr`] accepts, with a
    /// comment per key.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |comment: &str, key: &str, value: String| {
            let _ = writeln!(s, "# {comment}\n{key} = {value}\n");
        };
        kv(
            "Parameter profiles to run: olsr-default (HELLO 2 s, TC 5 s, window 20 s), eolsr (HELLO 1 s, TC 15 s, window 10 s).",
            "profiles",
            join(&self.profiles),
        );
        kv("Link metrics: etx, invetx, ml, md.", "metrics", join(&self.metrics));
        kv("CBR rates in packets/s; every flow of a cell uses the same rate.", "rates", join(&self.rates));
        kv(
            "One topology (and traffic pattern) per seed; results are averaged over seeds.",
            "seeds",
            join(&self.seeds),
        );
        kv("Measured seconds per run.", "duration", self.duration.to_string());
        kv("Seconds simulated before measurement starts.", "warmup", self.warmup.to_string());
        kv("Number of nodes.", "nodes", self.nodes.to_string());
        kv("Side of the square deployment area in metres.", "side", self.side.to_string());
        kv(
            "Radio range in metres. Delivery is certain up to half the range and falls linearly to 0 at the range.",
            "radio_range",
            self.radio_range.to_string(),
        );
        kv("Distinct (source, destination) pairs per run.", "flows", self.flows.to_string());
        kv("Capacity of every link in packets/s (efficiency model).", "link_capacity", self.link_capacity.to_string());
        kv(
            "Lower bound of the per-direction multiplicative jitter on delivery probabilities.",
            "jitter_min",
            self.jitter_min.to_string(),
        );
        kv(
            "Placement attempts (seed, seed+1, ...) before giving up on a connected topology.",
            "topology_attempts",
            self.topology_attempts.to_string(),
        );
        kv("Link rate in bits/s.", "link_rate_bps", self.link_rate_bps.to_string());
        kv("Propagation delay in seconds.", "propagation_delay", self.propagation_delay.to_string());
        kv("Transmit queue capacity in packets.", "queue_capacity", self.queue_capacity.to_string());
        kv("Data packet size in bytes.", "data_size", self.data_size.to_string());
        kv("MD probe size in bytes.", "probe_size", self.probe_size.to_string());
        kv("Hop limit for data packets.", "ttl", self.ttl.to_string());
        kv(
            "Jitter periodic control emissions by up to 10% of their interval.",
            "control_jitter",
            self.control_jitter.to_string(),
        );
        kv(
            "Minimum seconds between two route recomputations at a node.",
            "route_debounce",
            self.route_debounce.to_string(),
        );
        kv(
            "MD probe period in seconds, or `hello` to probe once per HELLO interval.",
            "probe_interval",
            self.probe_interval.map_or("hello".to_string(), |p| p.to_string()),
        );
        kv(
            "Neighbor admission/drop thresholds on fd*rd as `high,low`, or `none`.",
            "hysteresis",
            self.hysteresis
                .map_or("none".to_string(), |h| format!("{},{}", h.high, h.low)),
        );
        kv(
            "Parallel runs; 0 uses every core. MHOP_SIM_WORKERS overrides this.",
            "workers",
            self.workers.to_string(),
        );
        s
    }
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::parse(line, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "profiles" => cfg.profiles = parse_list(key, value, line)?,
                "metrics" => cfg.metrics = parse_list(key, value, line)?,
                "rates" => cfg.rates = parse_list(key, value, line)?,
                "seeds" => cfg.seeds = parse_list(key, value, line)?,
                "duration" => cfg.duration = parse_one(key, value, line)?,
                "warmup" => cfg.warmup = parse_one(key, value, line)?,
                "nodes" => cfg.nodes = parse_one(key, value, line)?,
                "side" => cfg.side = parse_one(key, value, line)?,
                "radio_range" => cfg.radio_range = parse_one(key, value, line)?,
                "flows" => cfg.flows = parse_one(key, value, line)?,
                "link_capacity" => cfg.link_capacity = parse_one(key, value, line)?,
                "jitter_min" => cfg.jitter_min = parse_one(key, value, line)?,
                "topology_attempts" => cfg.topology_attempts = parse_one(key, value, line)?,
                "link_rate_bps" => cfg.link_rate_bps = parse_one(key, value, line)?,
                "propagation_delay" => cfg.propagation_delay = parse_one(key, value, line)?,
                "queue_capacity" => cfg.queue_capacity = parse_one(key, value, line)?,
                "data_size" => cfg.data_size = parse_one(key, value, line)?,
                "probe_size" => cfg.probe_size = parse_one(key, value, line)?,
                "ttl" => cfg.ttl = parse_one(key, value, line)?,
                "control_jitter" => cfg.control_jitter = parse_one(key, value, line)?,
                "route_debounce" => cfg.route_debounce = parse_one(key, value, line)?,
                "probe_interval" => {
                    cfg.probe_interval = match value {
                        "hello" => None,
                        v => Some(parse_one(key, v, line)?),
                    }
                }
                "hysteresis" => {
                    cfg.hysteresis = match value {
                        "none" => None,
                        v => {
                            let parts: Vec<f64> = parse_list(key, v, line)?;
                            let [high, low] = parts[..] else {
                                return Err(Error::parse(line, "hysteresis needs `high,low`"));
                            };
                            Some(Hysteresis { high, low })
                        }
                    }
                }
                "workers" => cfg.workers = parse_one(key, value, line)?,
                _ => {
                    return Err(Error::UnknownName {
                        what: "config key",
                        value: key.to_string(),
                    })
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
