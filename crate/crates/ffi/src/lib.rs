//! C ABI over `mhop-sim`.
//!
//! Every fallible function returns an [`MhsStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and can
//! be read with [`mhs_last_error_message`]. Topologies are opaque handles
//! created by `mhs_topology_*` constructors and released with
//! [`mhs_topology_free`]. Strings returned by the library are released with
//! [`mhs_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mhop_sim::experiment::{run_single, ExperimentConfig};
use mhop_sim::metrics::path_cost;
use mhop_sim::olsr::Profile;
use mhop_sim::overhead::{check_budget, hello_cost, tc_default_cost, widest_path, BudgetStatus};
use mhop_sim::sim::{finalize_stats, run, select_flows, SimConfig, SimStats};
use mhop_sim::topology::TopologyParams;
use mhop_sim::{Error, LinkEstimate, MetricKind, NodeId, Topology};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MhsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownNode = 3,
    ParseError = 4,
    IoError = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MhsProfile {
    OlsrDefault = 0,
    Eolsr = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MhsMetric {
    Etx = 0,
    InvEtx = 1,
    Ml = 2,
    Md = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MhsBudget {
    Feasible = 0,
    Critical = 1,
    Infeasible = 2,
}

/// Counters and performance of one run. `e2ed` and `nrl` are NaN when
/// nothing was delivered.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MhsStats {
    pub data_sent: u64,
    pub data_delivered: u64,
    pub in_flight: u64,
    pub drop_loss: u64,
    pub drop_no_route: u64,
    pub drop_ttl: u64,
    pub drop_queue: u64,
    pub routing_packets_transmitted: u64,
    pub hello_tx: u64,
    pub tc_tx: u64,
    pub tc_triggered_tx: u64,
    pub probe_tx: u64,
    pub hello_receptions: u64,
    pub tc_default_originated: u64,
    pub mpr_changes: u64,
    pub throughput: f64,
    pub e2ed: f64,
    pub nrl: f64,
}

/// Opaque topology handle.
pub struct MhsTopology {
    inner: Topology,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(MhsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::UnknownNode(_) => MhsStatus::UnknownNode,
            Error::Parse { .. } | Error::UnknownName { .. } => MhsStatus::ParseError,
            Error::Io { .. } => MhsStatus::IoError,
            _ => MhsStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(MhsStatus::NullPointer, format!("{what} is null"))
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MhsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MhsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            MhsStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be null or valid for writes of `T`.
unsafe fn write_out<T>(p: *mut T, v: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

/// # Safety
/// `t` must be null or a live handle from this library.
unsafe fn topology<'a>(t: *const MhsTopology) -> Result<&'a Topology, Failure> {
    t.as_ref().map(|h| &h.inner).ok_or_else(|| null("topology"))
}

fn profile(p: MhsProfile) -> Profile {
    match p {
        MhsProfile::OlsrDefault => Profile::OlsrDefault,
        MhsProfile::Eolsr => Profile::Eolsr,
    }
}

fn metric(m: MhsMetric) -> MetricKind {
    match m {
        MhsMetric::Etx => MetricKind::Etx,
        MhsMetric::InvEtx => MetricKind::InvEtx,
        MhsMetric::Ml => MetricKind::Ml,
        MhsMetric::Md => MetricKind::Md,
    }
}

fn node(t: &Topology, id: u32) -> Result<NodeId, Failure> {
    let n = NodeId(id);
    if t.contains(n) {
        Ok(n)
    } else {
        Err(Error::UnknownNode(n).into())
    }
}

fn to_c_stats(s: &SimStats, duration: f64) -> Result<MhsStats, Failure> {
    let (throughput, e2ed, nrl) = if duration > 0.0 {
        let p = finalize_stats(s, duration)?;
        (p.throughput, p.e2ed.unwrap_or(f64::NAN), p.nrl.unwrap_or(f64::NAN))
    } else {
        (0.0, f64::NAN, f64::NAN)
    };
    Ok(MhsStats {
        data_sent: s.data_sent,
        data_delivered: s.data_delivered,
        in_flight: s.in_flight,
        drop_loss: s.drops.loss,
        drop_no_route: s.drops.no_route,
        drop_ttl: s.drops.ttl,
        drop_queue: s.drops.queue,
        routing_packets_transmitted: s.routing_packets_transmitted,
        hello_tx: s.hello_tx,
        tc_tx: s.tc_tx,
        tc_triggered_tx: s.tc_triggered_tx,
        probe_tx: s.probe_tx,
        hello_receptions: s.hello_receptions,
        tc_default_originated: s.tc_default_originated,
        mpr_changes: s.mpr_changes,
        throughput,
        e2ed,
        nrl,
    })
}

/// Message of the last failed call on this thread, or null after a
/// successful call. Valid until the next call into the library on the same
/// thread.
#[no_mangle]
pub extern "C" fn mhs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mhs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Generates a connected random topology, trying `seed`, `seed + 1`, ... up
/// to `max_attempts` placements.
///
/// # Safety
/// `out` must be valid for writes. The handle written there must be released
/// with [`mhs_topology_free`].
#[no_mangle]
pub unsafe extern "C" fn mhs_topology_generate(
    nodes: usize,
    side: f64,
    radio_range: f64,
    seed: u64,
    max_attempts: u32,
    out: *mut *mut MhsTopology,
) -> MhsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = TopologyParams::new(nodes, side, radio_range, seed);
        let (inner, _) = Topology::generate_connected(&params, max_attempts)?;
        out.write(Box::into_raw(Box::new(MhsTopology { inner })));
        Ok(())
    })
}

/// Parses the plain-text topology format (`N id x y` and
/// `L i j fd rd cap` lines).
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mhs_topology_parse(text: *const c_char, out: *mut *mut MhsTopology) -> MhsStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let s = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| Failure(MhsStatus::ParseError, "topology text is not UTF-8".into()))?;
        let inner: Topology = s.parse()?;
        out.write(Box::into_raw(Box::new(MhsTopology { inner })));
        Ok(())
    })
}

/// Serializes a topology. The string written to `out` must be released with
/// [`mhs_string_free`].
///
/// # Safety
/// `t` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mhs_topology_to_text(t: *const MhsTopology, out: *mut *mut c_char) -> MhsStatus {
    guard(|| {
        let t = topology(t)?;
        let c = CString::new(t.to_text()).expect("topology text has no NUL");
        write_out(out, c.into_raw(), "out")
    })
}

/// # Safety
/// `t` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mhs_topology_node_count(t: *const MhsTopology, out: *mut usize) -> MhsStatus {
    guard(|| write_out(out, topology(t)?.node_count(), "out"))
}

/// # Safety
/// `t` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mhs_topology_degree(t: *const MhsTopology, id: u32, out: *mut usize) -> MhsStatus {
    guard(|| {
        let t = topology(t)?;
        let n = node(t, id)?;
        write_out(out, t.degree(n), "out")
    })
}

/// Releases a topology handle. Null is ignored.
///
/// # Safety
/// `t` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mhs_topology_free(t: *mut MhsTopology) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mhs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Simulates `flows` random CBR flows at `rate` packets/s over the given
/// topology with default link and MAC settings.
///
/// # Safety
/// `t` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mhs_simulate(
    t: *const MhsTopology,
    profile_: MhsProfile,
    metric_: MhsMetric,
    rate: f64,
    flows: usize,
    duration: f64,
    seed: u64,
    out: *mut MhsStats,
) -> MhsStatus {
    guard(|| {
        let t = topology(t)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = SimConfig::from_profile(profile(profile_), metric(metric_));
        let flows = select_flows(t.node_count(), flows, rate, duration, seed)?;
        let stats = run(t, &cfg, &flows, duration, seed)?;
        out.write(to_c_stats(&stats, duration)?);
        Ok(())
    })
}

/// Runs one seed of one matrix cell with the default experiment settings
/// (50 nodes, 20 flows, 50 s warm-up) and the given measured duration.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mhs_run_cell(
    profile_: MhsProfile,
    metric_: MhsMetric,
    rate: f64,
    seed: u64,
    duration: f64,
    out: *mut MhsStats,
) -> MhsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = ExperimentConfig {
            duration,
            ..Default::default()
        };
        cfg.validate()?;
        let r = run_single(&cfg, profile(profile_), metric(metric_), rate, seed)?;
        out.write(to_c_stats(&r.stats, duration)?);
        Ok(())
    })
}

/// Cost of a path given per-link forward and reverse delivery ratios and
/// one-way delays (`delay` may be null for metrics other than MD).
///
/// # Safety
/// `fd` and `rd` must point to `len` readable doubles, `delay` to `len`
/// readable doubles or be null, and `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mhs_path_cost(
    metric_: MhsMetric,
    fd: *const f64,
    rd: *const f64,
    delay: *const f64,
    len: usize,
    out: *mut f64,
) -> MhsStatus {
    guard(|| {
        if len > 0 && (fd.is_null() || rd.is_null()) {
            return Err(null("fd or rd"));
        }
        let links: Vec<LinkEstimate> = (0..len)
            .map(|i| {
                let l = LinkEstimate::new(*fd.add(i), *rd.add(i));
                if delay.is_null() {
                    l
                } else {
                    l.with_delay(*delay.add(i))
                }
            })
            .collect();
        let cost = path_cost(metric(metric_), &links)?;
        write_out(out, cost.value, "out")
    })
}

/// Periodic HELLO cost over a network lifetime of `tau_nl` seconds.
///
/// # Safety
/// `t` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mhs_hello_cost(t: *const MhsTopology, tau_nl: f64, hello_interval: f64, out: *mut f64) -> MhsStatus {
    guard(|| write_out(out, hello_cost(topology(t)?, tau_nl, hello_interval)?, "out"))
}

/// Periodic TC cost over a network lifetime of `tau_nl` seconds.
///
/// # Safety
/// `t` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mhs_tc_default_cost(t: *const MhsTopology, tau_nl: f64, tc_interval: f64, out: *mut f64) -> MhsStatus {
    guard(|| write_out(out, tc_default_cost(topology(t)?, tau_nl, tc_interval)?, "out"))
}

/// Largest bottleneck capacity over all `source -> sink` paths.
///
/// # Safety
/// `t` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mhs_widest_path(t: *const MhsTopology, source: u32, sink: u32, out: *mut f64) -> MhsStatus {
    guard(|| {
        let t = topology(t)?;
        write_out(out, widest_path(t, NodeId(source), NodeId(sink))?, "out")
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mhs_check_budget(
    energy_sum: f64,
    latency_sum: f64,
    beta_cri: f64,
    tau_cri: f64,
    out: *mut MhsBudget,
) -> MhsStatus {
    guard(|| {
        let b = match check_budget(energy_sum, latency_sum, beta_cri, tau_cri)? {
            BudgetStatus::Feasible => MhsBudget::Feasible,
            BudgetStatus::Critical => MhsBudget::Critical,
            BudgetStatus::Infeasible => MhsBudget::Infeasible,
        };
        write_out(out, b, "out")
    })
}
