//! Analytical control-overhead model and the single-path efficiency
//! problem.
//!
//! Costs are counted in message receptions: one HELLO or TC broadcast by
//! node `i` costs `|Nbr(i)|` units. Integrals over the network lifetime are
//! evaluated as sums over the discrete instants at which MPR sets change.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use crate::error::{Error, Result};
use crate::metrics::MetricKind;
use crate::topology::{NodeId, Topology};

/// Components of the total OLSR control cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverheadCosts {
    pub hello_cost: f64,
    pub tc_trigger_cost: f64,
    pub tc_default_cost: f64,
    pub total: f64,
}

impl OverheadCosts {
    pub fn new(hello_cost: f64, tc_trigger_cost: f64, tc_default_cost: f64) -> Self {
        let mut c = OverheadCosts {
            hello_cost,
            tc_trigger_cost,
            tc_default_cost,
            total: 0.0,
        };
        c.total = total_cost(&c);
        c
    }
}

pub fn total_cost(parts: &OverheadCosts) -> f64 {
    parts.hello_cost + parts.tc_trigger_cost + parts.tc_default_cost
}

/// One recorded MPR set of a node.
#[derive(Debug, Clone, PartialEq)]
pub struct MprSnapshot {
    pub time: f64,
    pub mprs: BTreeSet<NodeId>,
}

/// An instant at which a node's MPR set differed from its previous one.
#[derive(Debug, Clone, PartialEq)]
pub struct MprChange {
    pub time: f64,
    pub node: NodeId,
    pub mprs: BTreeSet<NodeId>,
}

/// Per-node time series of MPR sets. Every node starts from the empty set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MprChangeLog {
    snapshots: Vec<Vec<MprSnapshot>>,
}

impl MprChangeLog {
    pub fn new(node_count: usize) -> Self {
        MprChangeLog {
            snapshots: vec![Vec::new(); node_count],
        }
    }

    /// Rebuilds a log from change events alone.
    pub fn from_changes(node_count: usize, changes: impl IntoIterator<Item = MprChange>) -> Result<Self> {
        let mut log = MprChangeLog::new(node_count);
        for c in changes {
            if c.node.index() >= node_count {
                return Err(Error::UnknownNode(c.node));
            }
            log.record(c.node, c.time, &c.mprs);
        }
        Ok(log)
    }

    pub fn record(&mut self, node: NodeId, time: f64, mprs: &BTreeSet<NodeId>) {
        self.snapshots[node.index()].push(MprSnapshot {
            time,
            mprs: mprs.clone(),
        });
    }

    pub fn node_count(&self) -> usize {
        self.snapshots.len()
    }

    pub fn snapshots(&self, node: NodeId) -> &[MprSnapshot] {
        &self.snapshots[node.index()]
    }

    /// `(time, changed)` per snapshot of `node`.
    pub fn change_indicators(&self, node: NodeId) -> Vec<(f64, bool)> {
        let empty = BTreeSet::new();
        let mut prev = &empty;
        self.snapshots[node.index()]
            .iter()
            .map(|s| {
                let changed = s.mprs != *prev;
                prev = &s.mprs;
                (s.time, changed)
            })
            .collect()
    }

    /// All change events, ordered by time then node.
    pub fn changes(&self) -> Vec<MprChange> {
        let mut out = Vec::new();
        for (i, snaps) in self.snapshots.iter().enumerate() {
            let empty = BTreeSet::new();
            let mut prev = &empty;
            for s in snaps {
                if s.mprs != *prev {
                    out.push(MprChange {
                        time: s.time,
                        node: NodeId::from(i),
                        mprs: s.mprs.clone(),
                    });
                }
                prev = &s.mprs;
            }
        }
        out.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.node.cmp(&b.node)));
        out
    }
}

fn neighbor_sum(topology: &Topology) -> f64 {
    topology.nodes().fold(0.0, |acc, n| acc + topology.degree(n) as f64)
}

/// Periodic HELLO cost: `(tau_nl / tau_hello) * sum_i |Nbr(i)|`.
pub fn hello_cost(topology: &Topology, tau_nl: f64, tau_hello: f64) -> Result<f64> {
    if !(tau_hello > 0.0) {
        return Err(Error::invalid("HELLO interval must be positive"));
    }
    if !(tau_nl >= 0.0) {
        return Err(Error::invalid("network lifetime must be non-negative"));
    }
    Ok(tau_nl / tau_hello * neighbor_sum(topology))
}

/// Triggered TC cost: every MPR-set change at a node contributes the size
/// of the new MPR set.
pub fn tc_trigger_cost(log: &MprChangeLog) -> f64 {
    log.changes().iter().fold(0.0, |acc, c| acc + c.mprs.len() as f64)
}

/// [`tc_trigger_cost`] restricted to changes in `(from, to]`.
pub fn tc_trigger_cost_between(log: &MprChangeLog, from: f64, to: f64) -> f64 {
    log.changes()
        .iter()
        .filter(|c| c.time > from && c.time <= to)
        .fold(0.0, |acc, c| acc + c.mprs.len() as f64)
}

/// Periodic TC cost: `(tau_nl / tc_interval) * sum_i |Nbr(i)|`, TCs sent on
/// every interval regardless of MPR changes.
pub fn tc_default_cost(topology: &Topology, tau_nl: f64, tc_interval: f64) -> Result<f64> {
    if !(tc_interval > 0.0) {
        return Err(Error::invalid("TC interval must be positive"));
    }
    if !(tau_nl >= 0.0) {
        return Err(Error::invalid("network lifetime must be non-negative"));
    }
    Ok(tau_nl / tc_interval * neighbor_sum(topology))
}

/// Change-gated reading of the default TC cost: each MPR-set change at
/// node `i` contributes `|Nbr(i)|`.
pub fn tc_default_cost_change_gated(topology: &Topology, log: &MprChangeLog) -> f64 {
    tc_default_cost_change_gated_between(topology, log, f64::NEG_INFINITY, f64::INFINITY)
}

/// [`tc_default_cost_change_gated`] restricted to changes in `(from, to]`.
pub fn tc_default_cost_change_gated_between(topology: &Topology, log: &MprChangeLog, from: f64, to: f64) -> f64 {
    log.changes()
        .iter()
        .filter(|c| c.time > from && c.time <= to)
        .fold(0.0, |acc, c| acc + topology.degree(c.node) as f64)
}

/// Extra messages a metric needs: MD probes one per neighbor per probe
/// interval, the HELLO-based metrics none.
pub fn metric_cost(topology: &Topology, tau_nl: f64, metric: MetricKind, probe_interval: f64) -> Result<f64> {
    if !metric.uses_probes() {
        return Ok(0.0);
    }
    if !(probe_interval > 0.0) {
        return Err(Error::invalid("probe interval must be positive"));
    }
    Ok(tau_nl / probe_interval * neighbor_sum(topology))
}

/// Periodic, triggered and metric components of a cost budget.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CostTerms {
    pub periodic: f64,
    pub triggered: f64,
    pub metric: f64,
}

impl CostTerms {
    pub fn sum(&self) -> f64 {
        self.periodic + self.triggered + self.metric
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyProblem {
    pub source: NodeId,
    pub sink: NodeId,
    /// Critical energy budget, in the same units as `energy`.
    pub energy_budget: f64,
    /// Critical latency budget, seconds.
    pub latency_budget: f64,
    pub energy: CostTerms,
    pub latency: CostTerms,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetStatus {
    /// Both sums strictly below their budgets.
    Feasible,
    /// A sum equals its budget (relative tolerance 1e-9).
    Critical,
    /// A sum exceeds its budget.
    Infeasible,
}

const BUDGET_RTOL: f64 = 1e-9;

pub fn check_budget(energy_sum: f64, latency_sum: f64, beta_cri: f64, tau_cri: f64) -> Result<BudgetStatus> {
    if !(beta_cri > 0.0) || !(tau_cri > 0.0) {
        return Err(Error::invalid("budgets must be positive"));
    }
    let classify = |sum: f64, budget: f64| {
        if (sum - budget).abs() <= BUDGET_RTOL * budget {
            BudgetStatus::Critical
        } else if sum < budget {
            BudgetStatus::Feasible
        } else {
            BudgetStatus::Infeasible
        }
    };
    let e = classify(energy_sum, beta_cri);
    let t = classify(latency_sum, tau_cri);
    Ok(match (e, t) {
        (BudgetStatus::Infeasible, _) | (_, BudgetStatus::Infeasible) => BudgetStatus::Infeasible,
        (BudgetStatus::Critical, _) | (_, BudgetStatus::Critical) => BudgetStatus::Critical,
        _ => BudgetStatus::Feasible,
    })
}

struct Widest {
    width: f64,
    node: NodeId,
}

impl PartialEq for Widest {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Widest {}
impl PartialOrd for Widest {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Widest {
    fn cmp(&self, other: &Self) -> Ordering {
        self.width
            .total_cmp(&other.width)
            .then(other.node.cmp(&self.node))
    }
}

/// Largest bottleneck capacity over all `source -> sink` paths; 0 when the
/// sink is unreachable.
pub fn widest_path(topology: &Topology, source: NodeId, sink: NodeId) -> Result<f64> {
    for n in [source, sink] {
        if !topology.contains(n) {
            return Err(Error::UnknownNode(n));
        }
    }
    if source == sink {
        return Err(Error::invalid("source and sink must differ"));
    }
    let mut width = vec![0.0f64; topology.node_count()];
    let mut done = vec![false; topology.node_count()];
    width[source.index()] = f64::INFINITY;
    let mut heap = BinaryHeap::from([Widest {
        width: f64::INFINITY,
        node: source,
    }]);
    while let Some(Widest { width: w, node }) = heap.pop() {
        if done[node.index()] {
            continue;
        }
        done[node.index()] = true;
        if node == sink {
            return Ok(w);
        }
        for &next in topology.neighbors(node) {
            let cap = topology.capacity(node, next).expect("adjacent nodes share a link");
            let through = w.min(cap);
            if !done[next.index()] && through > width[next.index()] {
                width[next.index()] = through;
                heap.push(Widest {
                    width: through,
                    node: next,
                });
            }
        }
    }
    Ok(0.0)
}

/// Maximum single-path flow `e` between source and sink, forced to 0 unless
/// both overhead sums are strictly within budget.
pub fn max_efficiency(topology: &Topology, problem: &EfficiencyProblem) -> Result<f64> {
    let e = widest_path(topology, problem.source, problem.sink)?;
    let status = check_budget(
        problem.energy.sum(),
        problem.latency.sum(),
        problem.energy_budget,
        problem.latency_budget,
    )?;
    Ok(match status {
        BudgetStatus::Feasible => e,
        BudgetStatus::Critical | BudgetStatus::Infeasible => 0.0,
    })
}
