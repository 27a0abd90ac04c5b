//! Plain-text record of one run: parameters, final counters and the MPR
//! change log. Used by `analyze` to compare the analytical model with a
//! simulated run.
//!
//! ```text
//! profile=olsr-default
//! metric=etx
//! ...
//! mpr_change 12.345 7 3 9 14
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::MetricKind;
use crate::olsr::Profile;
use crate::overhead::{MprChange, MprChangeLog};
use crate::sim::SimStats;
use crate::topology::NodeId;

#[derive(Debug, Clone, PartialEq)]
pub struct RunMeta {
    pub profile: Profile,
    pub metric: MetricKind,
    pub rate: f64,
    pub seed: u64,
    pub topology_seed: u64,
    pub duration: f64,
    pub warmup: f64,
    pub hello_interval: f64,
    pub tc_interval: f64,
    /// `None` when probes ride on the HELLO timer.
    pub probe_interval: Option<f64>,
    pub node_count: usize,
    pub stats: SimStats,
    pub mpr_log: MprChangeLog,
}

macro_rules! stat_fields {
    ($m:ident) => {
        $m!(
            data_sent,
            data_delivered,
            latency_sum,
            bytes_delivered,
            delivered_hops,
            in_flight,
            routing_packets_transmitted,
            hello_tx,
            tc_tx,
            probe_tx,
            tc_default_tx,
            tc_triggered_tx,
            tc_default_originated,
            tc_triggered_originated,
            hello_receptions,
            tc_receptions,
            control_queue_drops,
            mpr_changes,
            airtime_periodic,
            airtime_triggered,
            airtime_metric
        )
    };
}

fn num<T: std::str::FromStr>(v: &str, line: usize) -> Result<T> {
    v.parse().map_err(|_| Error::parse(line, format!("bad value `{v}`")))
}

impl RunMeta {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "profile={}", self.profile);
        let _ = writeln!(s, "metric={}", self.metric);
        let _ = writeln!(s, "rate={}", self.rate);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "topology_seed={}", self.topology_seed);
        let _ = writeln!(s, "duration={}", self.duration);
        let _ = writeln!(s, "warmup={}", self.warmup);
        let _ = writeln!(s, "hello_interval={}", self.hello_interval);
        let _ = writeln!(s, "tc_interval={}", self.tc_interval);
        match self.probe_interval {
            Some(p) => {
                let _ = writeln!(s, "probe_interval={p}");
            }
            None => s.push_str("probe_interval=hello\n"),
        }
        let _ = writeln!(s, "nodes={}", self.node_count);
        let st = &self.stats;
        macro_rules! put {
            ($($f:ident),*) => { $( let _ = writeln!(s, concat!(stringify!($f), "={}"), st.$f); )* };
        }
        stat_fields!(put);
        let _ = writeln!(s, "drop_loss={}", st.drops.loss);
        let _ = writeln!(s, "drop_no_route={}", st.drops.no_route);
        let _ = writeln!(s, "drop_ttl={}", st.drops.ttl);
        let _ = writeln!(s, "drop_queue={}", st.drops.queue);
        for c in self.mpr_log.changes() {
            let _ = write!(s, "mpr_change {} {}", c.time, c.node.index());
            for m in &c.mprs {
                let _ = write!(s, " {}", m.index());
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut profile = None;
        let mut metric = None;
        let mut rate = None;
        let mut seed = None;
        let mut topology_seed = None;
        let mut duration = None;
        let mut warmup = None;
        let mut hello = None;
        let mut tc = None;
        let mut probe = None;
        let mut nodes = None;
        let mut st = SimStats::default();
        let mut changes = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            if let Some(rest) = l.strip_prefix("mpr_change ") {
                let mut it = rest.split_whitespace();
                let time: f64 = num(it.next().unwrap_or(""), line)?;
                let node: usize = num(it.next().ok_or_else(|| Error::parse(line, "missing node"))?, line)?;
                let mprs = it
                    .map(|t| num::<usize>(t, line).map(NodeId::from))
                    .collect::<Result<BTreeSet<_>>>()?;
                changes.push(MprChange {
                    time,
                    node: NodeId::from(node),
                    mprs,
                });
                continue;
            }
            let (k, v) = l
                .split_once('=')
                .ok_or_else(|| Error::parse(line, format!("expected key=value, got `{l}`")))?;
            let (k, v) = (k.trim(), v.trim());
            macro_rules! get {
                ($($f:ident),*) => {
                    match k {
                        $( stringify!($f) => { st.$f = num(v, line)?; continue; } )*
                        _ => {}
                    }
                };
            }
            stat_fields!(get);
            match k {
                "profile" => profile = Some(v.parse::<Profile>()?),
                "metric" => metric = Some(v.parse::<MetricKind>()?),
                "rate" => rate = Some(num(v, line)?),
                "seed" => seed = Some(num(v, line)?),
                "topology_seed" => topology_seed = Some(num(v, line)?),
                "duration" => duration = Some(num(v, line)?),
                "warmup" => warmup = Some(num(v, line)?),
                "hello_interval" => hello = Some(num(v, line)?),
                "tc_interval" => tc = Some(num(v, line)?),
                "probe_interval" => probe = Some(if v == "hello" { None } else { Some(num(v, line)?) }),
                "nodes" => nodes = Some(num(v, line)?),
                "drop_loss" => st.drops.loss = num(v, line)?,
                "drop_no_route" => st.drops.no_route = num(v, line)?,
                "drop_ttl" => st.drops.ttl = num(v, line)?,
                "drop_queue" => st.drops.queue = num(v, line)?,
                _ => return Err(Error::parse(line, format!("unknown key `{k}`"))),
            }
        }

        fn need<T>(v: Option<T>, key: &str) -> Result<T> {
            v.ok_or_else(|| Error::parse(0, format!("missing key `{key}`")))
        }
        let node_count: usize = need(nodes, "nodes")?;
        Ok(RunMeta {
            profile: need(profile, "profile")?,
            metric: need(metric, "metric")?,
            rate: need(rate, "rate")?,
            seed: need(seed, "seed")?,
            topology_seed: need(topology_seed, "topology_seed")?,
            duration: need(duration, "duration")?,
            warmup: need(warmup, "warmup")?,
            hello_interval: need(hello, "hello_interval")?,
            tc_interval: need(tc, "tc_interval")?,
            probe_interval: need(probe, "probe_interval")?,
            node_count,
            stats: st,
            mpr_log: MprChangeLog::from_changes(node_count, changes)?,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}
