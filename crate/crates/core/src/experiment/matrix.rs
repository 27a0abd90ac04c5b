use rayon::prelude::*;

use super::ExperimentConfig;
use crate::error::{Error, Result};
use crate::metrics::MetricKind;
use crate::olsr::Profile;
use crate::sim::{finalize_stats, select_flows, CbrFlow, Performance, SimConfig, SimStats, Simulation};
use crate::topology::Topology;

/// Environment variable that overrides every other worker-count setting.
pub const WORKERS_ENV: &str = "MHOP_SIM_WORKERS";

/// One cell of the matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub profile: Profile,
    pub metric: MetricKind,
    pub rate: f64,
    pub topology_seeds: Vec<u64>,
    pub duration: f64,
    pub node_count: usize,
    pub area_side: f64,
    pub flow_count: usize,
}

impl ExperimentConfig {
    /// Cells in output order: profile, then metric, then rate.
    pub fn scenarios(&self) -> Vec<Scenario> {
        let mut out = Vec::new();
        for &profile in &self.profiles {
            for &metric in &self.metrics {
                for &rate in &self.rates {
                    out.push(Scenario {
                        profile,
                        metric,
                        rate,
                        topology_seeds: self.seeds.clone(),
                        duration: self.duration,
                        node_count: self.nodes,
                        area_side: self.side,
                        flow_count: self.flows,
                    });
                }
            }
        }
        out
    }
}

/// Inputs of a single run, fully determined by the config, the cell and
/// the seed.
#[derive(Debug, Clone)]
pub struct RunSetup {
    pub topology: Topology,
    /// The seed that produced a connected topology (may exceed the
    /// requested seed).
    pub topology_seed: u64,
    pub sim_config: SimConfig,
    pub flows: Vec<CbrFlow>,
    pub duration: f64,
    /// Seeds the channel and jitter stream of the run.
    pub seed: u64,
}

pub fn prepare_run(cfg: &ExperimentConfig, profile: Profile, metric: MetricKind, rate: f64, seed: u64) -> Result<RunSetup> {
    let (topology, topology_seed) = Topology::generate_connected(&cfg.topology_params(seed), cfg.topology_attempts)?;
    let flows = select_flows(cfg.nodes, cfg.flows, rate, cfg.duration, seed)?;
    Ok(RunSetup {
        topology,
        topology_seed,
        sim_config: cfg.sim_config(profile, metric),
        flows,
        duration: cfg.duration,
        seed,
    })
}

/// Result of one seed of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedRun {
    pub seed: u64,
    pub topology_seed: u64,
    pub stats: SimStats,
    pub performance: Performance,
}

pub fn run_single(cfg: &ExperimentConfig, profile: Profile, metric: MetricKind, rate: f64, seed: u64) -> Result<SeedRun> {
    let setup = prepare_run(cfg, profile, metric, rate, seed)?;
    let mut sim = Simulation::new(&setup.topology, setup.sim_config, &setup.flows, setup.duration, seed)?;
    sim.run()?;
    let stats = sim.into_stats();
    // A zero-length window has no rate; report zeros rather than fail.
    let performance = if setup.duration > 0.0 {
        finalize_stats(&stats, setup.duration)?
    } else {
        Performance {
            throughput: 0.0,
            e2ed: None,
            nrl: None,
        }
    };
    Ok(SeedRun {
        seed,
        topology_seed: setup.topology_seed,
        stats,
        performance,
    })
}

/// One matrix cell with every seed's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub profile: Profile,
    pub metric: MetricKind,
    pub rate: f64,
    pub seeds: Vec<u64>,
    pub runs: Vec<SeedRun>,
    /// Set when any seed failed; `runs` then holds only the successes.
    pub error: Option<String>,
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v?;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

impl ResultRow {
    fn complete(&self) -> bool {
        self.error.is_none() && self.runs.len() == self.seeds.len()
    }

    /// Mean over seeds of `f`; `None` when any seed is undefined or failed.
    pub fn mean(&self, f: impl Fn(&SeedRun) -> Option<f64>) -> Option<f64> {
        if !self.complete() {
            return None;
        }
        mean_of(self.runs.iter().map(f))
    }

    pub fn throughput_mean(&self) -> Option<f64> {
        self.mean(|r| Some(r.performance.throughput))
    }

    pub fn e2ed_mean(&self) -> Option<f64> {
        self.mean(|r| r.performance.e2ed)
    }

    pub fn nrl_mean(&self) -> Option<f64> {
        self.mean(|r| r.performance.nrl)
    }

    pub fn counter_mean(&self, f: impl Fn(&SimStats) -> u64) -> Option<f64> {
        self.mean(|r| Some(f(&r.stats) as f64))
    }
}

/// Worker count: the environment variable wins, then the explicit request,
/// then the config, then the number of cores.
pub fn resolve_workers(requested: Option<usize>, cfg: &ExperimentConfig) -> Result<usize> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("{WORKERS_ENV} must be a positive integer, got `{v}`")))?;
        if n > 0 {
            return Ok(n);
        }
    }
    if let Some(n) = requested.filter(|&n| n > 0) {
        return Ok(n);
    }
    if cfg.workers > 0 {
        return Ok(cfg.workers);
    }
    Ok(std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs every (cell, seed) pair on `workers` threads. A failing run marks
/// only its own row.
pub fn run_matrix(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let scenarios = cfg.scenarios();
    let jobs: Vec<(usize, u64)> = scenarios
        .iter()
        .enumerate()
        .flat_map(|(i, s)| s.topology_seeds.iter().map(move |&seed| (i, seed)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<Result<SeedRun>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, seed)| {
                let s = &scenarios[i];
                log::debug!("running {} {} rate={} seed={seed}", s.profile, s.metric, s.rate);
                run_single(cfg, s.profile, s.metric, s.rate, seed)
            })
            .collect()
    });

    let mut rows: Vec<ResultRow> = scenarios
        .iter()
        .map(|s| ResultRow {
            profile: s.profile,
            metric: s.metric,
            rate: s.rate,
            seeds: s.topology_seeds.clone(),
            runs: Vec::new(),
            error: None,
        })
        .collect();
    for (&(i, seed), outcome) in jobs.iter().zip(outcomes) {
        match outcome {
            Ok(run) => rows[i].runs.push(run),
            Err(e) => {
                log::error!("{} {} rate={} seed={seed}: {e}", rows[i].profile, rows[i].metric, rows[i].rate);
                let msg = format!("seed {seed}: {e}");
                rows[i].error = Some(match rows[i].error.take() {
                    Some(prev) => format!("{prev}; {msg}"),
                    None => msg,
                });
            }
        }
    }
    Ok(rows)
}
