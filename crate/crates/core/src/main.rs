use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mhop_sim::experiment::{
    compare_profiles, emit_csv, overhead_report, parse_csv, prepare_run, resolve_workers, run_matrix,
    EfficiencyQuery, ExperimentConfig, RunMeta, TcReading,
};
use mhop_sim::olsr::Profile;
use mhop_sim::overhead::MprChangeLog;
use mhop_sim::sim::{finalize_stats, Simulation};
use mhop_sim::{Error, MetricKind, NodeId, Result, Topology};

#[derive(Parser)]
#[command(name = "mhop-sim", version, about = "OLSR link-metric simulator and overhead model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and print its counters.
    Simulate(SimulateArgs),
    /// Run the profile x metric x rate x seed matrix.
    Matrix(MatrixArgs),
    /// Compare a recorded run against the analytical overhead model.
    Analyze(AnalyzeArgs),
    /// Evaluate the trend report of an existing results CSV.
    Compare {
        #[arg(long)]
        csv: PathBuf,
    },
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value = "olsr-default")]
    profile: Profile,
    #[arg(long, default_value = "etx")]
    metric: MetricKind,
    /// CBR packets per second per flow.
    #[arg(long, default_value_t = 2.0)]
    rate: f64,
    #[arg(long, default_value_t = 101)]
    seed: u64,
    /// Event trace destination; `-` or no value writes to stdout.
    #[arg(long, num_args = 0..=1, default_missing_value = "-")]
    trace: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the measured duration in seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// Replay a serialized topology instead of generating one.
    #[arg(long)]
    topology: Option<PathBuf>,
    #[arg(long)]
    topology_out: Option<PathBuf>,
    /// Write run metadata for `analyze`.
    #[arg(long)]
    meta_out: Option<PathBuf>,
    /// Write every routing table at the end of the run.
    #[arg(long)]
    routes_out: Option<PathBuf>,
}

#[derive(Args)]
struct MatrixArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
    /// Restrict to these profiles (repeatable).
    #[arg(long)]
    profile: Vec<Profile>,
    /// Restrict to these metrics (repeatable).
    #[arg(long)]
    metric: Vec<MetricKind>,
    /// Restrict to these rates (repeatable).
    #[arg(long)]
    rate: Vec<f64>,
    /// Override the measured duration in seconds.
    #[arg(long)]
    duration: Option<f64>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    topology: PathBuf,
    #[arg(long)]
    run_meta: PathBuf,
    /// Also write the report as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, requires_all = ["sink", "beta_cri", "tau_cri"])]
    source: Option<u32>,
    #[arg(long, requires = "source")]
    sink: Option<u32>,
    #[arg(long, requires = "source")]
    beta_cri: Option<f64>,
    #[arg(long, requires = "source")]
    tau_cri: Option<f64>,
    #[arg(long, default_value = "prose")]
    tc_reading: TcReading,
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    let cfg = match path {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut cfg = load_config(args.config.as_deref())?;
    if let Some(d) = args.duration {
        cfg.duration = d;
    }
    cfg.validate()?;
    let mut setup = prepare_run(&cfg, args.profile, args.metric, args.rate, args.seed)?;
    if let Some(path) = &args.topology {
        let topology: Topology = read_file(path)?.parse()?;
        if topology.node_count() != cfg.nodes {
            // Flows were drawn for the configured node count.
            cfg.nodes = topology.node_count();
            setup = prepare_run(&cfg, args.profile, args.metric, args.rate, args.seed)?;
        }
        setup.topology = topology;
    }
    if let Some(path) = &args.topology_out {
        write_file(path, &setup.topology.to_text())?;
    }
    setup.sim_config.record_mpr_log = args.meta_out.is_some();

    let trace_to_stdout = args.trace.as_deref() == Some("-");
    let mut sink: Option<Box<dyn Write>> = match args.trace.as_deref() {
        None => None,
        Some("-") => Some(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) => Some(Box::new(BufWriter::new(File::create(p).map_err(|e| Error::io(p, e))?))),
    };

    let mut sim = Simulation::new(&setup.topology, setup.sim_config.clone(), &setup.flows, setup.duration, args.seed)?;
    if let Some(w) = sink.as_mut() {
        sim = sim.with_trace(w.as_mut());
    }
    sim.run()?;
    let routes = args.routes_out.is_some().then(|| sim.dump_routes());
    let log = sim.mpr_log().cloned();
    let stats = sim.stats().clone();
    drop(sim);
    if let Some(mut w) = sink {
        w.flush().map_err(|e| Error::io("trace", e))?;
    }

    if let (Some(path), Some(text)) = (&args.routes_out, routes) {
        write_file(path, &text)?;
    }
    let olsr = &setup.sim_config.olsr;
    if let Some(path) = &args.meta_out {
        let meta = RunMeta {
            profile: args.profile,
            metric: args.metric,
            rate: args.rate,
            seed: args.seed,
            topology_seed: setup.topology_seed,
            duration: setup.duration,
            warmup: setup.sim_config.warmup,
            hello_interval: olsr.hello_interval,
            tc_interval: olsr.tc_interval,
            probe_interval: olsr.probe_interval,
            node_count: setup.topology.node_count(),
            stats: stats.clone(),
            mpr_log: log.unwrap_or_else(|| MprChangeLog::new(setup.topology.node_count())),
        };
        meta.write(path)?;
    }

    let mut summary = format!(
        "profile={} metric={} rate={} seed={} topology_seed={}\n",
        args.profile, args.metric, args.rate, args.seed, setup.topology_seed
    );
    summary.push_str(&format!(
        "data_sent={} delivered={} in_flight={} drop_loss={} drop_no_route={} drop_ttl={} drop_queue={}\n",
        stats.data_sent,
        stats.data_delivered,
        stats.in_flight,
        stats.drops.loss,
        stats.drops.no_route,
        stats.drops.ttl,
        stats.drops.queue
    ));
    summary.push_str(&format!(
        "hello_tx={} tc_tx={} tc_triggered_tx={} probe_tx={} mpr_changes={}\n",
        stats.hello_tx, stats.tc_tx, stats.tc_triggered_tx, stats.probe_tx, stats.mpr_changes
    ));
    if setup.duration > 0.0 {
        let p = finalize_stats(&stats, setup.duration)?;
        let na = |v: Option<f64>| v.map_or("NA".to_string(), |x| format!("{x:.6}"));
        summary.push_str(&format!(
            "throughput={:.6} e2ed={} nrl={}\n",
            p.throughput,
            na(p.e2ed),
            na(p.nrl)
        ));
    }
    if trace_to_stdout {
        eprint!("{summary}");
    } else {
        print!("{summary}");
    }
    Ok(())
}

fn matrix(args: MatrixArgs) -> Result<bool> {
    let mut cfg = load_config(args.config.as_deref())?;
    if !args.profile.is_empty() {
        cfg.profiles = args.profile;
    }
    if !args.metric.is_empty() {
        cfg.metrics = args.metric;
    }
    if !args.rate.is_empty() {
        cfg.rates = args.rate;
    }
    if let Some(d) = args.duration {
        cfg.duration = d;
    }
    cfg.validate()?;
    let workers = resolve_workers(args.workers, &cfg)?;
    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    write_file(&args.out.join("config.conf"), &cfg.to_text())?;

    let runs = cfg.scenarios().len() * cfg.seeds.len();
    log::info!("running {runs} simulations on {workers} workers");
    let rows = run_matrix(&cfg, workers)?;
    emit_csv(&rows, &args.out.join("results.csv"))?;

    let cells: Vec<_> = rows.iter().map(|r| r.summary()).collect();
    let report = compare_profiles(&cells);
    write_file(&args.out.join("trends.txt"), &report.to_text())?;
    write_file(&args.out.join("trends.csv"), &report.to_machine())?;
    print!("{}", report.to_text());

    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} of {} cells had failing runs; see the status column", rows.len());
    }
    Ok(failed == 0)
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let topology: Topology = read_file(&args.topology)?.parse()?;
    let meta = RunMeta::load(&args.run_meta)?;
    let query = match (args.source, args.sink, args.beta_cri, args.tau_cri) {
        (Some(s), Some(t), Some(b), Some(tau)) => Some(EfficiencyQuery {
            source: NodeId(s),
            sink: NodeId(t),
            beta_cri: b,
            tau_cri: tau,
        }),
        _ => None,
    };
    let report = overhead_report(&topology, &meta, args.tc_reading, query)?;
    print!("{}", report.to_text());
    if let Some(path) = &args.csv {
        write_file(path, &report.to_csv())?;
    }
    Ok(())
}

fn compare(csv: &Path) -> Result<bool> {
    let cells = parse_csv(&read_file(csv)?)?;
    let report = compare_profiles(&cells);
    print!("{}", report.to_text());
    Ok(report.passes())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a).map(|()| true),
        Command::Matrix(a) => matrix(a),
        Command::Analyze(a) => analyze(a).map(|()| true),
        Command::Compare { csv } => compare(&csv),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
