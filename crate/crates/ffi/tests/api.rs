use std::ffi::{CStr, CString};
use std::ptr;

use mhop_sim_ffi::*;

fn last_error() -> String {
    let p = mhs_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn generate(nodes: usize, seed: u64) -> *mut MhsTopology {
    let mut t = ptr::null_mut();
    let st = unsafe { mhs_topology_generate(nodes, 300.0, 250.0, seed, 100, &mut t) };
    assert_eq!(st, MhsStatus::Ok);
    assert!(!t.is_null());
    t
}

#[test]
fn topology_round_trips_through_text() {
    let t = generate(8, 3);
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { mhs_topology_to_text(t, &mut text) }, MhsStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { mhs_topology_parse(text, &mut back) }, MhsStatus::Ok);

    let (mut a, mut b) = (0usize, 0usize);
    unsafe {
        mhs_topology_node_count(t, &mut a);
        mhs_topology_node_count(back, &mut b);
    }
    assert_eq!((a, b), (8, 8));
    for id in 0..8 {
        let (mut da, mut db) = (0usize, 0usize);
        unsafe {
            assert_eq!(mhs_topology_degree(t, id, &mut da), MhsStatus::Ok);
            assert_eq!(mhs_topology_degree(back, id, &mut db), MhsStatus::Ok);
        }
        assert_eq!(da, db);
    }
    unsafe {
        mhs_string_free(text);
        mhs_topology_free(t);
        mhs_topology_free(back);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut out = 0usize;
    assert_eq!(unsafe { mhs_topology_node_count(ptr::null(), &mut out) }, MhsStatus::NullPointer);
    assert!(last_error().contains("null"));

    let t = generate(5, 1);
    assert_eq!(unsafe { mhs_topology_degree(t, 99, &mut out) }, MhsStatus::UnknownNode);
    assert!(last_error().contains("99"));

    let garbage = CString::new("X 1 2\n").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { mhs_topology_parse(garbage.as_ptr(), &mut h) }, MhsStatus::ParseError);
    assert!(h.is_null());

    let mut v = 0.0;
    assert_eq!(unsafe { mhs_hello_cost(t, 900.0, 0.0, &mut v) }, MhsStatus::InvalidArgument);
    assert_eq!(unsafe { mhs_hello_cost(t, 900.0, 2.0, &mut v) }, MhsStatus::Ok);
    assert!(mhs_last_error_message().is_null());
    unsafe { mhs_topology_free(t) };
}

#[test]
fn overhead_functions_agree_with_formulas() {
    let t = generate(10, 5);
    let mut degree_sum = 0usize;
    for id in 0..10 {
        let mut d = 0usize;
        unsafe { mhs_topology_degree(t, id, &mut d) };
        degree_sum += d;
    }
    let (mut hello, mut tc5, mut tc15) = (0.0, 0.0, 0.0);
    unsafe {
        mhs_hello_cost(t, 900.0, 2.0, &mut hello);
        mhs_tc_default_cost(t, 900.0, 5.0, &mut tc5);
        mhs_tc_default_cost(t, 900.0, 15.0, &mut tc15);
    }
    assert_eq!(hello, 450.0 * degree_sum as f64);
    assert_eq!(tc5 / tc15, 3.0);

    let mut b = MhsBudget::Feasible;
    unsafe { mhs_check_budget(100.0, 1.0, 100.0, 10.0, &mut b) };
    assert_eq!(b, MhsBudget::Critical);
    let mut w = 0.0;
    assert_eq!(unsafe { mhs_widest_path(t, 0, 9, &mut w) }, MhsStatus::Ok);
    assert_eq!(w, 100.0);
    unsafe { mhs_topology_free(t) };
}

#[test]
fn path_costs() {
    let fd = [0.5, 1.0];
    let rd = [0.5, 0.8];
    let delay = [0.01, 0.02];
    let cost = |m| {
        let mut v = 0.0;
        let st = unsafe { mhs_path_cost(m, fd.as_ptr(), rd.as_ptr(), delay.as_ptr(), 2, &mut v) };
        assert_eq!(st, MhsStatus::Ok);
        v
    };
    assert_eq!(cost(MhsMetric::Etx), 4.0 + 1.25);
    assert_eq!(cost(MhsMetric::InvEtx), 0.25 + 0.8);
    assert_eq!(cost(MhsMetric::Ml), 0.25 * 0.8);
    assert_eq!(cost(MhsMetric::Md), 0.01 + 0.02);

    let mut v = 0.0;
    let st = unsafe { mhs_path_cost(MhsMetric::Md, fd.as_ptr(), rd.as_ptr(), ptr::null(), 2, &mut v) };
    assert_eq!(st, MhsStatus::InvalidArgument);
}

#[test]
fn simulate_fills_stats() {
    let t = generate(8, 2);
    let mut s = MhsStats::default();
    let st = unsafe { mhs_simulate(t, MhsProfile::Eolsr, MhsMetric::Etx, 2.0, 4, 30.0, 9, &mut s) };
    assert_eq!(st, MhsStatus::Ok, "{}", last_error());
    assert_eq!(s.data_sent, 4 * 60);
    assert_eq!(
        s.data_sent,
        s.data_delivered + s.in_flight + s.drop_loss + s.drop_no_route + s.drop_ttl + s.drop_queue
    );
    assert_eq!(s.throughput, s.data_delivered as f64 / 30.0);
    assert!(s.hello_tx > 0);

    let mut again = MhsStats::default();
    unsafe { mhs_simulate(t, MhsProfile::Eolsr, MhsMetric::Etx, 2.0, 4, 30.0, 9, &mut again) };
    assert_eq!(s.data_delivered, again.data_delivered);
    assert_eq!(s.routing_packets_transmitted, again.routing_packets_transmitted);

    let mut z = MhsStats::default();
    unsafe { mhs_simulate(t, MhsProfile::OlsrDefault, MhsMetric::Ml, 2.0, 4, 0.0, 9, &mut z) };
    assert_eq!(z.data_sent, 0);
    assert!(z.e2ed.is_nan() && z.nrl.is_nan());
    unsafe { mhs_topology_free(t) };
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(mhs_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
