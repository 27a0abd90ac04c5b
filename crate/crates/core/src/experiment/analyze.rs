//! Analytical overhead of a recorded run next to the simulated counters.

use std::fmt::Write as _;
use std::str::FromStr;

use super::{format_sig6, RunMeta, NA};
use crate::error::{Error, Result};
use crate::overhead::{
    check_budget, hello_cost, max_efficiency, metric_cost, tc_default_cost, tc_default_cost_change_gated_between,
    tc_trigger_cost_between, BudgetStatus, CostTerms, EfficiencyProblem, OverheadCosts,
};
use crate::topology::{NodeId, Topology};

/// How periodic TC cost is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TcReading {
    /// A TC on every interval, whether or not the MPR set changed.
    #[default]
    Prose,
    /// A TC only at MPR-set changes.
    Gated,
}

impl TcReading {
    pub fn as_str(self) -> &'static str {
        match self {
            TcReading::Prose => "prose",
            TcReading::Gated => "gated",
        }
    }
}

impl FromStr for TcReading {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prose" => Ok(TcReading::Prose),
            "gated" => Ok(TcReading::Gated),
            _ => Err(Error::UnknownName {
                what: "TC reading",
                value: s.to_string(),
            }),
        }
    }
}

/// Source, sink and budgets for the efficiency part of the report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyQuery {
    pub source: NodeId,
    pub sink: NodeId,
    pub beta_cri: f64,
    pub tau_cri: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportLine {
    pub quantity: &'static str,
    pub analytical: Option<f64>,
    pub simulated: Option<f64>,
}

impl ReportLine {
    pub fn ratio(&self) -> Option<f64> {
        match (self.analytical, self.simulated) {
            (Some(a), Some(s)) if a != 0.0 => Some(s / a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyOutcome {
    pub energy: CostTerms,
    pub latency: CostTerms,
    pub status: BudgetStatus,
    pub e: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverheadReport {
    pub reading: TcReading,
    pub costs: OverheadCosts,
    pub metric: f64,
    pub lines: Vec<ReportLine>,
    pub efficiency: Option<EfficiencyOutcome>,
}

/// Evaluates the overhead model over the measurement window of `meta`.
pub fn overhead_report(
    topology: &Topology,
    meta: &RunMeta,
    reading: TcReading,
    query: Option<EfficiencyQuery>,
) -> Result<OverheadReport> {
    if topology.node_count() != meta.node_count {
        return Err(Error::invalid(format!(
            "topology has {} nodes, run metadata {}",
            topology.node_count(),
            meta.node_count
        )));
    }
    let tau = meta.duration;
    let hello = hello_cost(topology, tau, meta.hello_interval)?;
    let trigger = tc_trigger_cost_between(&meta.mpr_log, meta.warmup, meta.warmup + tau);
    let default = match reading {
        TcReading::Prose => tc_default_cost(topology, tau, meta.tc_interval)?,
        TcReading::Gated => tc_default_cost_change_gated_between(topology, &meta.mpr_log, meta.warmup, meta.warmup + tau),
    };
    let probe = meta.probe_interval.unwrap_or(meta.hello_interval);
    let metric = metric_cost(topology, tau, meta.metric, probe)?;
    let costs = OverheadCosts::new(hello, trigger, default);

    let st = &meta.stats;
    let end = meta.warmup + tau;
    let window_changes = meta
        .mpr_log
        .changes()
        .iter()
        .filter(|c| c.time > meta.warmup && c.time <= end)
        .count() as f64;
    let originations = meta.node_count as f64 * (tau / meta.tc_interval).floor();
    // Model costs are receptions; rows with a simulated counterpart in the
    // same unit carry both columns.
    let lines = vec![
        ReportLine {
            quantity: "hello_receptions",
            analytical: Some(hello),
            simulated: Some(st.hello_receptions as f64),
        },
        ReportLine {
            quantity: "tc_trigger",
            analytical: Some(trigger),
            simulated: None,
        },
        ReportLine {
            quantity: "tc_default",
            analytical: Some(default),
            simulated: None,
        },
        ReportLine {
            quantity: "tc_default_originated",
            analytical: Some(originations),
            simulated: Some(st.tc_default_originated as f64),
        },
        ReportLine {
            quantity: "mpr_changes",
            analytical: Some(window_changes),
            simulated: Some(st.mpr_changes as f64),
        },
        ReportLine {
            quantity: "tc_triggered_originated",
            analytical: Some(window_changes),
            simulated: Some(st.tc_triggered_originated as f64),
        },
        ReportLine {
            quantity: "metric_probes",
            analytical: Some(metric),
            simulated: Some(st.probe_tx as f64),
        },
        ReportLine {
            quantity: "total",
            analytical: Some(costs.total + metric),
            simulated: None,
        },
    ];

    let efficiency = match query {
        None => None,
        Some(q) => {
            let energy = CostTerms {
                periodic: hello + default,
                triggered: trigger,
                metric,
            };
            let latency = CostTerms {
                periodic: st.airtime_periodic,
                triggered: st.airtime_triggered,
                metric: st.airtime_metric,
            };
            let problem = EfficiencyProblem {
                source: q.source,
                sink: q.sink,
                energy_budget: q.beta_cri,
                latency_budget: q.tau_cri,
                energy,
                latency,
            };
            Some(EfficiencyOutcome {
                energy,
                latency,
                status: check_budget(energy.sum(), latency.sum(), q.beta_cri, q.tau_cri)?,
                e: max_efficiency(topology, &problem)?,
            })
        }
    };

    Ok(OverheadReport {
        reading,
        costs,
        metric,
        lines,
        efficiency,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or(NA.to_string(), format_sig6)
}

impl OverheadReport {
    pub fn to_text(&self) -> String {
        let mut s = format!("tc reading: {}\n", self.reading.as_str());
        let _ = writeln!(s, "{:<24} {:>14} {:>14} {:>10}", "quantity", "analytical", "simulated", "ratio");
        for l in &self.lines {
            let _ = writeln!(
                s,
                "{:<24} {:>14} {:>14} {:>10}",
                l.quantity,
                opt(l.analytical),
                opt(l.simulated),
                opt(l.ratio())
            );
        }
        if let Some(e) = &self.efficiency {
            let _ = writeln!(
                s,
                "\nenergy   periodic={} triggered={} metric={} sum={}",
                format_sig6(e.energy.periodic),
                format_sig6(e.energy.triggered),
                format_sig6(e.energy.metric),
                format_sig6(e.energy.sum())
            );
            let _ = writeln!(
                s,
                "latency  periodic={} triggered={} metric={} sum={}",
                format_sig6(e.latency.periodic),
                format_sig6(e.latency.triggered),
                format_sig6(e.latency.metric),
                format_sig6(e.latency.sum())
            );
            let _ = writeln!(s, "budget   {:?}\nmax e    {}", e.status, format_sig6(e.e));
        }
        s
    }

    /// `quantity,analytical,simulated,ratio`, then the efficiency values
    /// as extra quantities.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("quantity,analytical,simulated,ratio\n");
        for l in &self.lines {
            let _ = writeln!(s, "{},{},{},{}", l.quantity, opt(l.analytical), opt(l.simulated), opt(l.ratio()));
        }
        if let Some(e) = &self.efficiency {
            let _ = writeln!(s, "energy_sum,{},NA,NA", format_sig6(e.energy.sum()));
            let _ = writeln!(s, "latency_sum,NA,{},NA", format_sig6(e.latency.sum()));
            let _ = writeln!(s, "max_e,{},NA,NA", format_sig6(e.e));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::MetricKind;
    use crate::olsr::Profile;
    use crate::sim::SimStats;
    use crate::overhead::MprChangeLog;
    use crate::topology::{LinkQuality, Position};
    use std::collections::BTreeSet;

    fn pair() -> Topology {
        Topology::from_parts(
            vec![Position { x: 0.0, y: 0.0 }; 2],
            10.0,
            10.0,
            [(NodeId(0), NodeId(1), LinkQuality::PERFECT, 5.0)],
        )
        .unwrap()
    }

    fn meta() -> RunMeta {
        let mut log = MprChangeLog::new(2);
        let one: BTreeSet<_> = [NodeId(1)].into_iter().collect();
        log.record(NodeId(0), 1.0, &one);
        log.record(NodeId(0), 12.0, &BTreeSet::new());
        RunMeta {
            profile: Profile::OlsrDefault,
            metric: MetricKind::Md,
            rate: 2.0,
            seed: 1,
            topology_seed: 1,
            duration: 100.0,
            warmup: 10.0,
            hello_interval: 2.0,
            tc_interval: 5.0,
            probe_interval: None,
            node_count: 2,
            stats: SimStats {
                hello_receptions: 100,
                ..Default::default()
            },
            mpr_log: log,
        }
    }

    #[test]
    fn window_restricts_trigger_cost() {
        let r = overhead_report(&pair(), &meta(), TcReading::Prose, None).unwrap();
        assert_eq!(r.costs.hello_cost, 100.0);
        assert_eq!(r.costs.tc_trigger_cost, 0.0);
        assert_eq!(r.costs.tc_default_cost, 40.0);
        // Probes ride on HELLOs: one per neighbor per HELLO interval.
        assert_eq!(r.metric, 100.0);
        assert_eq!(r.lines[0].ratio(), Some(1.0));
        // One change inside (10, 110]; the one at t=1 is warm-up.
        let changes = r.lines.iter().find(|l| l.quantity == "mpr_changes").unwrap();
        assert_eq!(changes.analytical, Some(1.0));
        let tc = r.lines.iter().find(|l| l.quantity == "tc_default_originated").unwrap();
        assert_eq!(tc.analytical, Some(40.0));
    }

    #[test]
    fn gated_reading_counts_window_changes() {
        let r = overhead_report(&pair(), &meta(), TcReading::Gated, None).unwrap();
        assert_eq!(r.costs.tc_default_cost, 1.0);
    }

    #[test]
    fn efficiency_part() {
        let q = EfficiencyQuery {
            source: NodeId(0),
            sink: NodeId(1),
            beta_cri: 1e6,
            tau_cri: 1.0,
        };
        let r = overhead_report(&pair(), &meta(), TcReading::Prose, Some(q)).unwrap();
        let e = r.efficiency.unwrap();
        assert_eq!(e.status, BudgetStatus::Feasible);
        assert_eq!(e.e, 5.0);
        let tight = EfficiencyQuery { beta_cri: 240.0, ..q };
        let r = overhead_report(&pair(), &meta(), TcReading::Prose, Some(tight)).unwrap();
        assert_eq!(r.efficiency.as_ref().unwrap().e, 0.0);
        assert!(r.to_csv().contains("max_e,0,NA,NA"));
    }

    #[test]
    fn node_count_mismatch_is_rejected() {
        let mut m = meta();
        m.node_count = 3;
        m.mpr_log = MprChangeLog::new(3);
        assert!(overhead_report(&pair(), &m, TcReading::Prose, None).is_err());
    }
}
