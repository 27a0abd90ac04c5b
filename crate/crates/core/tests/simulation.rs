use mhop_sim::olsr::Profile;
use mhop_sim::overhead::{hello_cost, tc_default_cost};
use mhop_sim::sim::{finalize_stats, run, select_flows, transmit, CbrFlow, Direction, SimConfig, Simulation};
use mhop_sim::topology::{LinkQuality, Position, TopologyParams};
use mhop_sim::{MetricKind, NodeId, Topology};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn line(n: usize) -> Topology {
    Topology::from_parts(
        (0..n).map(|i| Position { x: i as f64, y: 0.0 }).collect(),
        n as f64,
        1.5,
        (1..n).map(|i| (NodeId::from(i - 1), NodeId::from(i), LinkQuality::PERFECT, 100.0)),
    )
    .unwrap()
}

fn small_random(seed: u64) -> Topology {
    let params = TopologyParams::new(12, 400.0, 250.0, seed);
    Topology::generate_connected(&params, 100).unwrap().0
}

#[test]
fn transmit_frequency_matches_probability() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let q = LinkQuality { fd: 0.7, rd: 0.3 };
    let trials = 100_000;
    let fwd = (0..trials).filter(|_| transmit(q, Direction::Forward, &mut rng)).count() as f64 / trials as f64;
    let rev = (0..trials).filter(|_| transmit(q, Direction::Reverse, &mut rng)).count() as f64 / trials as f64;
    assert!((fwd - 0.7).abs() < 0.01, "{fwd}");
    assert!((rev - 0.3).abs() < 0.01, "{rev}");
}

#[test]
fn perfect_line_latency_is_hops_times_per_hop_time() {
    // Data leaves at x.25 s; control is sent on whole seconds with jitter off,
    // so the data never queues behind control traffic.
    let t = line(4);
    let mut cfg = SimConfig::from_profile(Profile::OlsrDefault, MetricKind::Etx);
    cfg.jitter = false;
    let flow = CbrFlow::new(NodeId(0), NodeId(3), 1.0, 0.25, 100.0).unwrap();
    let s = run(&t, &cfg, &[flow], 100.0, 5).unwrap();
    assert_eq!(s.data_delivered, 100);
    let per_hop = 64.0 * 8.0 / 1e6 + 1e-6;
    let e2ed = finalize_stats(&s, 100.0).unwrap().e2ed.unwrap();
    assert!((e2ed - 3.0 * per_hop).abs() < 1e-12, "{e2ed}");
}

#[test]
fn lossless_hello_receptions_equal_analytical_cost() {
    let t = small_random(8).lossless();
    for profile in Profile::ALL {
        let mut cfg = SimConfig::from_profile(profile, MetricKind::Etx);
        cfg.jitter = false;
        let s = run(&t, &cfg, &[], 900.0, 1).unwrap();
        let want = hello_cost(&t, 900.0, cfg.olsr.hello_interval).unwrap();
        assert_eq!(s.hello_receptions as f64, want, "{profile}");
    }
}

#[test]
fn default_tc_emissions_scale_with_interval() {
    let t = small_random(9).lossless();
    let count = |p: Profile| {
        let mut cfg = SimConfig::from_profile(p, MetricKind::Etx);
        cfg.jitter = false;
        run(&t, &cfg, &[], 900.0, 1).unwrap().tc_default_originated
    };
    let (olsr, eolsr) = (count(Profile::OlsrDefault), count(Profile::Eolsr));
    assert_eq!(olsr, 3 * eolsr);
    assert_eq!(olsr as usize, 180 * t.node_count());
    let ratio = tc_default_cost(&t, 900.0, 5.0).unwrap() / tc_default_cost(&t, 900.0, 15.0).unwrap();
    assert_eq!(ratio, 3.0);
}

#[test]
fn static_lossless_network_stops_changing_mprs() {
    let t = small_random(10).lossless();
    let mut cfg = SimConfig::from_profile(Profile::OlsrDefault, MetricKind::Etx);
    cfg.jitter = false;
    let s = run(&t, &cfg, &[], 200.0, 2).unwrap();
    assert_eq!(s.mpr_changes, 0);
    assert_eq!(s.tc_triggered_originated, 0);
}

#[test]
fn runs_are_bit_identical_for_equal_seeds() {
    let t = small_random(11);
    let flows = select_flows(12, 5, 8.0, 60.0, 11).unwrap();
    for metric in MetricKind::ALL {
        let cfg = SimConfig::from_profile(Profile::Eolsr, metric);
        let a = run(&t, &cfg, &flows, 60.0, 77).unwrap();
        let b = run(&t, &cfg, &flows, 60.0, 77).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.latency_sum.to_bits(), b.latency_sum.to_bits());
    }
}

#[test]
fn mpr_log_matches_change_counter() {
    let t = small_random(12);
    let mut cfg = SimConfig::from_profile(Profile::OlsrDefault, MetricKind::Ml);
    cfg.record_mpr_log = true;
    let mut sim = Simulation::new(&t, cfg.clone(), &[], 120.0, 4).unwrap();
    sim.run().unwrap();
    let (lo, hi) = (cfg.warmup, cfg.warmup + 120.0);
    let in_window = sim
        .mpr_log()
        .unwrap()
        .changes()
        .iter()
        .filter(|c| c.time > lo && c.time <= hi)
        .count() as u64;
    assert_eq!(in_window, sim.stats().mpr_changes);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn packets_are_conserved(seed in 0u64..1000, m in 0usize..4, eolsr in any::<bool>(), rate in 1.0f64..20.0) {
        let t = small_random(seed);
        let flows = select_flows(12, 6, rate, 40.0, seed).unwrap();
        let profile = if eolsr { Profile::Eolsr } else { Profile::OlsrDefault };
        let mut cfg = SimConfig::from_profile(profile, MetricKind::ALL[m]);
        cfg.warmup = 20.0;
        let s = run(&t, &cfg, &flows, 40.0, seed).unwrap();
        prop_assert!(s.conserves_packets(), "{:?}", s);
        prop_assert!(s.routing_counters_consistent(), "{:?}", s);
        prop_assert!(s.data_delivered <= s.data_sent);
        prop_assert!(s.delivered_hops >= s.data_delivered);
        prop_assert!(s.delivered_hops <= s.data_delivered * cfg.ttl as u64);
    }
}
