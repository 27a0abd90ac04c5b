use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::io::Write;
use std::rc::Rc;

use rand::seq::SliceRandom;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::event::EventQueue;
use super::{CbrFlow, SimConfig, SimStats};
use crate::error::{Error, Result};
use crate::metrics::{LinkEstimate, MetricKind};
use crate::olsr::{
    compute_routing_table, flood_tc, DuplicateTable, FloodDecision, HelloMessage, LinkStateDb, NeighborState,
    RoutingTable, TcGenerator, TcMessage,
};
use crate::overhead::MprChangeLog;
use crate::topology::{LinkQuality, NodeId, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PacketKind {
    Hello,
    Tc,
    Probe,
    Data,
}

impl PacketKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PacketKind::Hello => "hello",
            PacketKind::Tc => "tc",
            PacketKind::Probe => "probe",
            PacketKind::Data => "data",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Reverse,
}

/// One Bernoulli draw deciding whether a transmission over `link` in
/// `direction` arrives. The draw is consumed whatever the outcome.
pub fn transmit<R: Rng + ?Sized>(link: LinkQuality, direction: Direction, rng: &mut R) -> bool {
    let p = match direction {
        Direction::Forward => link.fd,
        Direction::Reverse => link.rd,
    };
    let draw: f64 = rng.random();
    draw < p
}

#[derive(Debug, Clone)]
enum Payload {
    Hello(Rc<HelloMessage>),
    Tc(Rc<TcMessage>),
    Probe { sent_at: f64 },
    Data,
}

#[derive(Debug, Clone)]
struct Packet {
    payload: Payload,
    src: NodeId,
    dst: Option<NodeId>,
    /// Receiver of a unicast transmission; `None` broadcasts to every
    /// neighbor.
    link_to: Option<NodeId>,
    origin_time: f64,
    size_bytes: u32,
    hop_count: u32,
}

impl Packet {
    fn kind(&self) -> PacketKind {
        match self.payload {
            Payload::Hello(_) => PacketKind::Hello,
            Payload::Tc(_) => PacketKind::Tc,
            Payload::Probe { .. } => PacketKind::Probe,
            Payload::Data => PacketKind::Data,
        }
    }
}

#[derive(Debug)]
enum Event {
    HelloTimer { node: NodeId, round: u64 },
    TcTimer { node: NodeId, round: u64 },
    ProbeTimer { node: NodeId, round: u64 },
    ProbeSend { node: NodeId, to: NodeId },
    TxDone { node: NodeId },
    Arrival {
        from: NodeId,
        receivers: Vec<NodeId>,
        packet: Packet,
    },
    Emit { flow: usize, k: u64 },
}

#[derive(Debug, Clone)]
struct TopologyTuple {
    advertised: Vec<(NodeId, LinkEstimate)>,
    expires: f64,
}

struct Node {
    state: NeighborState,
    tc_gen: TcGenerator,
    dups: DuplicateTable,
    topology: BTreeMap<NodeId, TopologyTuple>,
    routes: RoutingTable,
    routes_dirty: bool,
    last_route_compute: Option<f64>,
    queue: VecDeque<Packet>,
    busy: bool,
}

fn reversed(e: LinkEstimate) -> LinkEstimate {
    LinkEstimate {
        fd: e.rd,
        rd: e.fd,
        delay: e.delay,
    }
}

/// One simulation run over a static topology.
pub struct Simulation<'a> {
    topology: &'a Topology,
    config: SimConfig,
    flows: Vec<CbrFlow>,
    window_start: f64,
    end: f64,
    now: f64,
    started: bool,
    rng: ChaCha8Rng,
    events: EventQueue<Event>,
    nodes: Vec<Node>,
    db: LinkStateDb,
    stats: SimStats,
    mpr_log: Option<MprChangeLog>,
    trace: Option<&'a mut dyn Write>,
}

impl<'a> Simulation<'a> {
    /// Prepares a run of `duration` measured seconds after the configured
    /// warm-up. Flow times are relative to the end of the warm-up.
    pub fn new(topology: &'a Topology, config: SimConfig, flows: &[CbrFlow], duration: f64, seed: u64) -> Result<Self> {
        config.validate()?;
        if !(duration >= 0.0) || !duration.is_finite() {
            return Err(Error::invalid("duration must be finite and non-negative"));
        }
        for f in flows {
            f.validate(topology.node_count())?;
        }
        let n = topology.node_count();
        let nodes = topology
            .nodes()
            .map(|id| Node {
                state: NeighborState::new(id, &config.olsr),
                tc_gen: TcGenerator::new(),
                dups: DuplicateTable::new(),
                topology: BTreeMap::new(),
                routes: RoutingTable::empty(id, n),
                routes_dirty: true,
                last_route_compute: None,
                queue: VecDeque::new(),
                busy: false,
            })
            .collect();
        let mpr_log = config.record_mpr_log.then(|| MprChangeLog::new(n));
        Ok(Simulation {
            topology,
            window_start: config.warmup,
            end: config.warmup + duration,
            config,
            flows: flows.to_vec(),
            now: 0.0,
            started: false,
            rng: ChaCha8Rng::seed_from_u64(seed),
            events: EventQueue::new(),
            nodes,
            db: LinkStateDb::new(n),
            stats: SimStats::default(),
            mpr_log,
            trace: None,
        })
    }

    /// Writes one `t kind node detail` line per processed event.
    pub fn with_trace(mut self, out: &'a mut dyn Write) -> Self {
        self.trace = Some(out);
        self
    }

    pub fn stats(&self) -> &SimStats {
        &self.stats
    }

    pub fn into_stats(self) -> SimStats {
        self.stats
    }

    pub fn mpr_log(&self) -> Option<&MprChangeLog> {
        self.mpr_log.as_ref()
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    /// End of the measurement window in simulation time.
    pub fn end_time(&self) -> f64 {
        self.end
    }

    pub fn neighbor_state(&self, node: NodeId) -> &NeighborState {
        &self.nodes[node.index()].state
    }

    /// Routing table of `node` recomputed at the current time.
    pub fn routing_table(&mut self, node: NodeId) -> &RoutingTable {
        self.recompute_routes(node);
        &self.nodes[node.index()].routes
    }

    /// Every node's routing table in `D` line format.
    pub fn dump_routes(&mut self) -> String {
        let mut out = String::new();
        for id in self.topology.nodes() {
            out.push_str(&self.routing_table(id).dump());
        }
        out
    }

    pub fn run(&mut self) -> Result<()> {
        if self.started {
            return Err(Error::invalid("a simulation can only run once"));
        }
        self.started = true;
        self.schedule_initial();
        while let Some(t) = self.events.peek_time() {
            if t > self.end {
                break;
            }
            let (t, ev) = self.events.pop().expect("peeked");
            self.now = t;
            self.handle(ev)?;
        }
        self.now = self.now.max(self.end);
        self.stats.in_flight = self.count_in_flight();
        if let Some(out) = self.trace.as_mut() {
            out.flush().map_err(|e| Error::io("<trace>", e))?;
        }
        Ok(())
    }

    fn in_window(&self) -> bool {
        self.now > self.window_start && self.now <= self.end
    }

    fn jitter(&mut self, interval: f64) -> f64 {
        if self.config.jitter {
            self.rng.random::<f64>() * 0.1 * interval
        } else {
            0.0
        }
    }

    fn probe_interval(&self) -> Option<f64> {
        (self.config.metric == MetricKind::Md)
            .then_some(self.config.olsr.probe_interval)
            .flatten()
    }

    fn schedule_initial(&mut self) {
        let h = self.config.olsr.hello_interval;
        let tc = self.config.olsr.tc_interval;
        for node in self.topology.nodes() {
            let t = self.jitter(h);
            self.events.push(t, Event::HelloTimer { node, round: 0 });
            let t = tc + self.jitter(tc);
            self.events.push(t, Event::TcTimer { node, round: 1 });
            if let Some(p) = self.probe_interval() {
                let t = self.jitter(p);
                self.events.push(t, Event::ProbeTimer { node, round: 0 });
            }
        }
        for (i, f) in self.flows.iter().enumerate() {
            if f.packet_count() > 0 {
                self.events
                    .push(self.window_start + f.emission_time(0), Event::Emit { flow: i, k: 0 });
            }
        }
    }

    fn trace(&mut self, kind: &str, node: NodeId, detail: fmt::Arguments<'_>) -> Result<()> {
        if let Some(out) = self.trace.as_mut() {
            writeln!(out, "{:.9} {} {} {}", self.now, kind, node, detail).map_err(|e| Error::io("<trace>", e))?;
        }
        Ok(())
    }

    fn handle(&mut self, ev: Event) -> Result<()> {
        match ev {
            Event::HelloTimer { node, round } => self.on_hello_timer(node, round),
            Event::TcTimer { node, round } => {
                self.trace("tc_timer", node, format_args!("round={round}"))?;
                self.originate_tc(node, false)?;
                let tc = self.config.olsr.tc_interval;
                let t = (round + 1) as f64 * tc + self.jitter(tc);
                self.events.push(t, Event::TcTimer { node, round: round + 1 });
                Ok(())
            }
            Event::ProbeTimer { node, round } => {
                self.trace("probe_timer", node, format_args!("round={round}"))?;
                self.send_probes(node)?;
                if let Some(p) = self.probe_interval() {
                    let t = (round + 1) as f64 * p + self.jitter(p);
                    self.events.push(t, Event::ProbeTimer { node, round: round + 1 });
                }
                Ok(())
            }
            Event::ProbeSend { node, to } => self.send_probe(node, to),
            Event::TxDone { node } => {
                self.nodes[node.index()].busy = false;
                self.start_tx(node)
            }
            Event::Arrival {
                from,
                receivers,
                packet,
            } => {
                for r in receivers {
                    self.receive(r, from, &packet)?;
                }
                Ok(())
            }
            Event::Emit { flow, k } => self.on_emit(flow, k),
        }
    }

    fn on_hello_timer(&mut self, node: NodeId, round: u64) -> Result<()> {
        let now = self.now;
        let in_window = self.in_window();
        let n = &mut self.nodes[node.index()];
        n.state.select_mprs(now);
        let changed = n.state.maybe_trigger_tc();
        n.routes_dirty = true;
        let hello = Rc::new(n.state.build_hello(now));
        if changed && in_window {
            self.stats.mpr_changes += 1;
        }
        if let Some(log) = self.mpr_log.as_mut() {
            log.record(node, now, self.nodes[node.index()].state.mpr_set());
        }
        self.trace(
            "hello",
            node,
            format_args!("neighbors={} mpr_changed={}", hello.entries.len(), changed as u8),
        )?;
        let size = hello.size_bytes();
        self.enqueue(
            node,
            Packet {
                payload: Payload::Hello(hello),
                src: node,
                dst: None,
                link_to: None,
                origin_time: now,
                size_bytes: size,
                hop_count: 0,
            },
        )?;
        if changed {
            self.originate_tc(node, true)?;
        }
        if self.config.metric == MetricKind::Md && self.config.olsr.probe_interval.is_none() {
            self.send_probes(node)?;
        }
        let h = self.config.olsr.hello_interval;
        let t = (round + 1) as f64 * h + self.jitter(h);
        self.events.push(t, Event::HelloTimer { node, round: round + 1 });
        Ok(())
    }

    fn originate_tc(&mut self, node: NodeId, triggered: bool) -> Result<()> {
        let now = self.now;
        let n = &mut self.nodes[node.index()];
        let msg = n.tc_gen.generate(&n.state, now, triggered);
        // Register our own sequence so echoes are recognised as duplicates.
        flood_tc(&mut n.dups, &msg, false);
        if self.in_window() {
            if triggered {
                self.stats.tc_triggered_originated += 1;
            } else {
                self.stats.tc_default_originated += 1;
            }
        }
        self.trace(
            "tc",
            node,
            format_args!("seq={} advertised={} triggered={}", msg.seq, msg.advertised.len(), triggered as u8),
        )?;
        let size = msg.size_bytes();
        self.enqueue(
            node,
            Packet {
                payload: Payload::Tc(Rc::new(msg)),
                src: node,
                dst: None,
                link_to: None,
                origin_time: now,
                size_bytes: size,
                hop_count: 0,
            },
        )
    }

    /// Spreads one probe per known neighbor evenly over the probe interval,
    /// in a freshly shuffled order, so probes do not queue behind each other.
    fn send_probes(&mut self, node: NodeId) -> Result<()> {
        let mut targets: Vec<NodeId> = self.nodes[node.index()].state.one_hop().keys().copied().collect();
        targets.shuffle(&mut self.rng);
        let spacing = self.config.olsr.effective_probe_interval() / targets.len().max(1) as f64;
        for (j, to) in targets.into_iter().enumerate() {
            if j == 0 {
                self.send_probe(node, to)?;
            } else {
                self.events
                    .push(self.now + j as f64 * spacing, Event::ProbeSend { node, to });
            }
        }
        Ok(())
    }

    fn send_probe(&mut self, node: NodeId, to: NodeId) -> Result<()> {
        if !self.nodes[node.index()].state.is_neighbor(to) {
            return Ok(());
        }
        self.enqueue(
            node,
            Packet {
                payload: Payload::Probe { sent_at: self.now },
                src: node,
                dst: Some(to),
                link_to: Some(to),
                origin_time: self.now,
                size_bytes: self.config.probe_size,
                hop_count: 0,
            },
        )
    }

    fn on_emit(&mut self, flow: usize, k: u64) -> Result<()> {
        let f = self.flows[flow];
        self.stats.data_sent += 1;
        self.trace("emit", f.src, format_args!("flow={flow} k={k} dst={}", f.dst))?;
        let packet = Packet {
            payload: Payload::Data,
            src: f.src,
            dst: Some(f.dst),
            link_to: None,
            origin_time: self.now,
            size_bytes: self.config.data_size,
            hop_count: 0,
        };
        self.forward_data(f.src, packet)?;
        let rel = f.emission_time(k + 1);
        if rel < f.stop {
            self.events.push(self.window_start + rel, Event::Emit { flow, k: k + 1 });
        }
        Ok(())
    }

    fn forward_data(&mut self, node: NodeId, mut packet: Packet) -> Result<()> {
        let dst = packet.dst.expect("data packets have a destination");
        if dst == node {
            let latency = self.now - packet.origin_time;
            self.stats.data_delivered += 1;
            self.stats.latency_sum += latency;
            self.stats.bytes_delivered += packet.size_bytes as u64;
            self.stats.delivered_hops += packet.hop_count as u64;
            return self.trace(
                "deliver",
                node,
                format_args!("src={} hops={} latency={:.9}", packet.src, packet.hop_count, latency),
            );
        }
        if packet.hop_count >= self.config.ttl {
            self.stats.drops.ttl += 1;
            return self.trace("drop", node, format_args!("reason=ttl dst={dst}"));
        }
        match self.next_hop(node, dst) {
            None => {
                self.stats.drops.no_route += 1;
                self.trace("drop", node, format_args!("reason=no_route dst={dst}"))
            }
            Some(nh) => {
                packet.hop_count += 1;
                packet.link_to = Some(nh);
                self.enqueue(node, packet)
            }
        }
    }

    fn next_hop(&mut self, node: NodeId, dst: NodeId) -> Option<NodeId> {
        let n = &self.nodes[node.index()];
        let stale = match n.last_route_compute {
            None => true,
            Some(t) => n.routes_dirty && self.now - t >= self.config.route_debounce,
        };
        if stale {
            self.recompute_routes(node);
        }
        self.nodes[node.index()].routes.get(dst).map(|e| e.next_hop)
    }

    fn recompute_routes(&mut self, node: NodeId) {
        let now = self.now;
        let n = &mut self.nodes[node.index()];
        let db = &mut self.db;
        db.clear();
        n.topology.retain(|_, t| t.expires >= now);
        for (v, est) in n.state.symmetric_neighbors(now) {
            db.add_link(node, v, est);
        }
        for (&origin, tuple) in &n.topology {
            for &(v, est) in &tuple.advertised {
                // First hops must come from our own neighbor table.
                if origin != node {
                    db.add_link(origin, v, est);
                }
                if v != node {
                    db.add_link(v, origin, reversed(est));
                }
            }
        }
        n.routes = compute_routing_table(node, db, self.config.metric);
        n.routes_dirty = false;
        n.last_route_compute = Some(now);
    }

    fn enqueue(&mut self, node: NodeId, packet: Packet) -> Result<()> {
        let n = &mut self.nodes[node.index()];
        if n.queue.len() >= self.config.queue_capacity {
            let kind = packet.kind();
            if kind == PacketKind::Data {
                self.stats.drops.queue += 1;
            } else if self.in_window() {
                self.stats.control_queue_drops += 1;
            }
            return self.trace("drop", node, format_args!("reason=queue kind={}", kind.as_str()));
        }
        n.queue.push_back(packet);
        if !n.busy {
            self.start_tx(node)?;
        }
        Ok(())
    }

    fn start_tx(&mut self, node: NodeId) -> Result<()> {
        let Some(packet) = self.nodes[node.index()].queue.pop_front() else {
            return Ok(());
        };
        self.nodes[node.index()].busy = true;
        let airtime = self.config.transmission_delay(packet.size_bytes);
        let kind = packet.kind();
        if self.in_window() {
            let s = &mut self.stats;
            match &packet.payload {
                Payload::Hello(_) => {
                    s.hello_tx += 1;
                    s.routing_packets_transmitted += 1;
                    s.airtime_periodic += airtime;
                }
                Payload::Tc(msg) => {
                    s.tc_tx += 1;
                    s.routing_packets_transmitted += 1;
                    if msg.triggered {
                        s.tc_triggered_tx += 1;
                        s.airtime_triggered += airtime;
                    } else {
                        s.tc_default_tx += 1;
                        s.airtime_periodic += airtime;
                    }
                }
                Payload::Probe { .. } => {
                    s.probe_tx += 1;
                    s.routing_packets_transmitted += 1;
                    s.airtime_metric += airtime;
                }
                Payload::Data => {}
            }
        }

        let receivers: Vec<NodeId> = match packet.link_to {
            None => {
                let topo = self.topology;
                topo.neighbors(node)
                    .iter()
                    .copied()
                    .filter(|&v| {
                        let q = topo.quality(node, v).expect("neighbors share a link");
                        transmit(q, Direction::Forward, &mut self.rng)
                    })
                    .collect()
            }
            Some(v) => {
                let q = self
                    .topology
                    .quality(node, v)
                    .unwrap_or(LinkQuality { fd: 0.0, rd: 0.0 });
                if transmit(q, Direction::Forward, &mut self.rng) {
                    vec![v]
                } else {
                    Vec::new()
                }
            }
        };
        self.trace(
            "tx",
            node,
            format_args!("kind={} size={} received={}", kind.as_str(), packet.size_bytes, receivers.len()),
        )?;
        if receivers.is_empty() {
            if kind == PacketKind::Data {
                self.stats.drops.loss += 1;
            }
        } else {
            let at = self.now + airtime + self.config.propagation_delay;
            self.events.push(
                at,
                Event::Arrival {
                    from: node,
                    receivers,
                    packet,
                },
            );
        }
        self.events.push(self.now + airtime, Event::TxDone { node });
        Ok(())
    }

    fn receive(&mut self, node: NodeId, from: NodeId, packet: &Packet) -> Result<()> {
        let now = self.now;
        match &packet.payload {
            Payload::Hello(msg) => {
                if self.in_window() {
                    self.stats.hello_receptions += 1;
                }
                let n = &mut self.nodes[node.index()];
                let before = n.state.estimate(from, now);
                let changed = n.state.process_hello(msg, now);
                if changed || n.state.estimate(from, now) != before {
                    n.routes_dirty = true;
                }
                Ok(())
            }
            Payload::Tc(msg) => {
                if self.in_window() {
                    self.stats.tc_receptions += 1;
                }
                let hold = self.config.olsr.topology_hold_time;
                let n = &mut self.nodes[node.index()];
                let is_mpr = n.state.one_hop().get(&from).is_some_and(|e| e.selected_us);
                let FloodDecision::Process { forward } = flood_tc(&mut n.dups, msg, is_mpr) else {
                    return Ok(());
                };
                let fresh = n
                    .topology
                    .get(&msg.origin)
                    .is_none_or(|t| t.advertised != msg.advertised);
                if fresh {
                    n.routes_dirty = true;
                }
                n.topology.insert(
                    msg.origin,
                    TopologyTuple {
                        advertised: msg.advertised.clone(),
                        expires: now + hold,
                    },
                );
                if forward {
                    self.trace("tc_forward", node, format_args!("origin={} seq={}", msg.origin, msg.seq))?;
                    self.enqueue(
                        node,
                        Packet {
                            payload: Payload::Tc(Rc::clone(msg)),
                            src: msg.origin,
                            dst: None,
                            link_to: None,
                            origin_time: packet.origin_time,
                            size_bytes: packet.size_bytes,
                            hop_count: packet.hop_count + 1,
                        },
                    )?;
                }
                Ok(())
            }
            Payload::Probe { sent_at } => self.nodes[node.index()].state.record_probe(from, now - sent_at),
            Payload::Data => self.forward_data(node, packet.clone()),
        }
    }

    fn count_in_flight(&self) -> u64 {
        let queued: usize = self
            .nodes
            .iter()
            .map(|n| n.queue.iter().filter(|p| p.kind() == PacketKind::Data).count())
            .sum();
        let on_air = self
            .events
            .iter()
            .filter(|e| matches!(e, Event::Arrival { packet, .. } if packet.kind() == PacketKind::Data))
            .count();
        (queued + on_air) as u64
    }
}

/// Runs one simulation and returns its counters.
pub fn run(topology: &Topology, config: &SimConfig, flows: &[CbrFlow], duration: f64, seed: u64) -> Result<SimStats> {
    let mut sim = Simulation::new(topology, config.clone(), flows, duration, seed)?;
    sim.run()?;
    Ok(sim.into_stats())
}
