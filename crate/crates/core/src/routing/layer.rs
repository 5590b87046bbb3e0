//! Event-driven routing layer: periodic discovery, neighbor liveness,
//! connection management and data transfer along selected routes.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::{
    select_route, DataFrame, DiscoveryReply, DiscoveryRequest, LinkParams, RouteError, Router,
    RoutingTable, Topology, TrafficClass,
};
use crate::cost::{kb_to_megabits, packet_count};
use crate::model::{NodeId, Scenario};
use crate::sim::engine::{EngineError, EventQueue};
use crate::trace::{path_string, Trace, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoutingParams {
    pub discovery_period: f64,
    pub entry_timeout: f64,
    pub ttl: u32,
    pub path_loss_exponent: f64,
    /// KB per frame.
    pub packet_size: f64,
}

impl Default for RoutingParams {
    fn default() -> Self {
        Self {
            discovery_period: 1.0,
            entry_timeout: 3.0,
            ttl: 16,
            path_loss_exponent: 2.0,
            packet_size: 1.5,
        }
    }
}

impl RoutingParams {
    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            discovery_period: s.params.discovery_period,
            entry_timeout: s.params.entry_timeout(),
            ttl: s.params.ttl,
            path_loss_exponent: s.params.path_loss_exponent,
            packet_size: s.packet_size,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Ev {
    Maintain,
    Emit(NodeId),
    Request { to: NodeId, req: DiscoveryRequest },
    Reply { to: NodeId, reply: DiscoveryReply },
    Expire { node: NodeId, neighbor: NodeId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnState {
    Open,
    /// The route went away; the record is kept until terminated.
    Degraded,
    Closed,
}

impl ConnState {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConnState::Open => "open",
            ConnState::Degraded => "degraded",
            ConnState::Closed => "closed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub local: NodeId,
    pub peer: NodeId,
    pub class: TrafficClass,
    pub state: ConnState,
    pub opened_at: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RoutingStats {
    pub requests_sent: u64,
    pub request_deliveries: u64,
    pub duplicate_requests: u64,
    pub replies_sent: u64,
    pub reply_entries: u64,
    pub frames_sent: u64,
    pub frames_forwarded: u64,
    pub frames_dropped: u64,
    pub frames_delivered: u64,
}

/// A completed transfer.
#[derive(Debug, Clone, PartialEq)]
pub struct Delivery {
    pub path: Vec<NodeId>,
    pub frames: u64,
    /// KB.
    pub payload: f64,
    pub departure: f64,
    pub arrival: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SendError {
    Route(RouteError),
    TtlExceeded { at: NodeId },
    NodeDown(NodeId),
    ConnectionClosed { local: NodeId, peer: NodeId },
}

impl SendError {
    pub fn reason(&self) -> &'static str {
        match self {
            SendError::Route(_) => "no-route",
            SendError::TtlExceeded { .. } => "ttl",
            SendError::NodeDown(_) => "node-down",
            SendError::ConnectionClosed { .. } => "closed",
        }
    }
}

impl fmt::Display for SendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SendError::Route(e) => write!(f, "{e}"),
            SendError::TtlExceeded { at } => write!(f, "ttl exceeded at {at}"),
            SendError::NodeDown(n) => write!(f, "node {n} is down"),
            SendError::ConnectionClosed { local, peer } => {
                write!(f, "connection {local}->{peer} is closed")
            }
        }
    }
}

impl From<RouteError> for SendError {
    fn from(e: RouteError) -> Self {
        SendError::Route(e)
    }
}

/// Time for `payload` KB to cross `hops`, frames pipelined hop by hop and
/// each hop's latency paid once.
pub fn transfer_duration(payload: f64, packet_size: f64, hops: &[LinkParams]) -> f64 {
    let latency: f64 = hops.iter().map(|h| h.latency).sum();
    if payload <= 0.0 || hops.is_empty() {
        return latency;
    }
    if let [only] = hops {
        return kb_to_megabits(payload) / only.bandwidth + latency;
    }
    let frames = packet_count(payload, 0.0, packet_size).unwrap_or(0).max(1);
    let last = payload - (frames - 1) as f64 * packet_size;
    let mut hop_free = vec![0.0f64; hops.len()];
    for j in 0..frames {
        let size = kb_to_megabits(if j + 1 == frames { last } else { packet_size });
        let mut ready = 0.0f64;
        for (i, h) in hops.iter().enumerate() {
            let start = ready.max(hop_free[i]);
            hop_free[i] = start + size / h.bandwidth;
            ready = hop_free[i];
        }
    }
    hop_free[hops.len() - 1] + latency
}

pub struct RoutingLayer {
    topology: Topology,
    routers: BTreeMap<NodeId, Router>,
    params: RoutingParams,
    queue: EventQueue<Ev>,
    trace: Trace,
    down: BTreeSet<NodeId>,
    connections: BTreeMap<(NodeId, NodeId), Connection>,
    stats: RoutingStats,
}

impl RoutingLayer {
    pub fn new(topology: Topology, params: RoutingParams, start: f64, trace_enabled: bool) -> Self {
        let routers = topology.nodes().map(|n| (n, Router::new(n))).collect();
        Self {
            topology,
            routers,
            params,
            queue: EventQueue::new(start),
            trace: Trace::new(trace_enabled),
            down: BTreeSet::new(),
            connections: BTreeMap::new(),
            stats: RoutingStats::default(),
        }
    }

    pub fn now(&self) -> f64 {
        self.queue.now()
    }

    pub fn params(&self) -> &RoutingParams {
        &self.params
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    /// Direct access for tests and mobility hooks. Links removed here
    /// vanish silently; neighbors notice through missed discovery.
    pub fn topology_mut(&mut self) -> &mut Topology {
        &mut self.topology
    }

    pub fn router(&self, n: NodeId) -> Option<&Router> {
        self.routers.get(&n)
    }

    pub fn router_mut(&mut self, n: NodeId) -> Option<&mut Router> {
        self.routers.get_mut(&n)
    }

    pub fn tables(&self) -> BTreeMap<NodeId, RoutingTable> {
        self.routers
            .iter()
            .filter(|(n, _)| !self.down.contains(*n))
            .map(|(n, r)| (*n, r.table.clone()))
            .collect()
    }

    pub fn stats(&self) -> RoutingStats {
        self.stats
    }

    pub fn is_down(&self, n: NodeId) -> bool {
        self.down.contains(&n)
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn trace_mut(&mut self) -> &mut Trace {
        &mut self.trace
    }

    pub fn take_trace(&mut self) -> Trace {
        let enabled = self.trace.enabled();
        core::mem::replace(&mut self.trace, Trace::new(enabled))
    }

    /// Runs `rounds` discovery periods starting now; every live node
    /// broadcasts at the start of each period.
    pub fn run_rounds(&mut self, rounds: u32) -> Result<(), EngineError> {
        let t0 = self.now();
        let p = self.params.discovery_period;
        let live: Vec<NodeId> = self.routers.keys().filter(|n| !self.down.contains(*n)).copied().collect();
        for k in 0..rounds {
            let t = t0 + f64::from(k) * p;
            self.queue.schedule(t, Ev::Maintain)?;
            for n in &live {
                self.queue.schedule(t, Ev::Emit(*n))?;
            }
        }
        self.advance_to(t0 + f64::from(rounds) * p)
    }

    /// Processes pending routing events up to `end`.
    pub fn advance_to(&mut self, end: f64) -> Result<(), EngineError> {
        if end < self.now() {
            return Err(EngineError::EndBeforeNow { now: self.now(), end });
        }
        while self.queue.peek_time().is_some_and(|t| t <= end) {
            let (t, ev) = self.queue.pop().expect("peeked");
            self.handle(t, ev)?;
        }
        self.queue.run_until(end, |_, _, _| Ok(()))
    }

    /// Drops pending discovery traffic and moves the clock to `t`.
    pub fn quiesce(&mut self, t: f64) {
        self.queue.clear();
        let _ = self.queue.run_until(t.max(self.now()), |_, _, _| Ok(()));
    }

    fn link_ok(&self, a: NodeId, b: NodeId) -> Option<LinkParams> {
        if self.down.contains(&a) || self.down.contains(&b) {
            return None;
        }
        self.topology.link(a, b)
    }

    fn handle(&mut self, t: f64, ev: Ev) -> Result<(), EngineError> {
        match ev {
            Ev::Maintain => self.maintain(t),
            Ev::Emit(n) => {
                if self.down.contains(&n) {
                    return Ok(());
                }
                let req = self.routers.get_mut(&n).expect("router").emit_discovery();
                self.stats.requests_sent += 1;
                self.trace.emit(|| {
                    TraceRecord::at(t, n, "disc-req").field("seq", req.sequence_no)
                });
                for m in self.topology.neighbors(n) {
                    if let Some(l) = self.link_ok(n, m) {
                        self.queue.schedule(t + l.latency, Ev::Request { to: m, req })?;
                    }
                }
            }
            Ev::Request { to, req } => {
                let Some(l) = self.link_ok(to, req.source) else {
                    return Ok(());
                };
                self.stats.request_deliveries += 1;
                let timeout = self.params.entry_timeout;
                let reply = self
                    .routers
                    .get_mut(&to)
                    .expect("router")
                    .handle_discovery_request(&req, l.bandwidth, t);
                let Some(reply) = reply else {
                    self.stats.duplicate_requests += 1;
                    return Ok(());
                };
                self.queue.schedule(t + timeout, Ev::Expire { node: to, neighbor: req.source })?;
                self.stats.replies_sent += 1;
                self.stats.reply_entries += reply.entries.len() as u64;
                self.trace.emit(|| {
                    TraceRecord::at(t, to, "disc-rep")
                        .field("dst", req.source)
                        .field("seq", reply.sequence_no)
                        .field("entries", reply.entries.len())
                });
                self.queue.schedule(t + l.latency, Ev::Reply { to: req.source, reply })?;
            }
            Ev::Reply { to, reply } => {
                let Some(l) = self.link_ok(to, reply.source) else {
                    return Ok(());
                };
                let timeout = self.params.entry_timeout;
                self.routers
                    .get_mut(&to)
                    .expect("router")
                    .merge_reply(reply.source, &reply, l.bandwidth, t);
                self.queue.schedule(t + timeout, Ev::Expire { node: to, neighbor: reply.source })?;
            }
            Ev::Expire { node, neighbor } => {
                if self.down.contains(&node) {
                    return Ok(());
                }
                let timeout = self.params.entry_timeout;
                let r = self.routers.get_mut(&node).expect("router");
                if r.neighbor_expired(neighbor, t, timeout) {
                    let broken = r.break_routes_via(neighbor, t);
                    self.trace.emit(|| {
                        TraceRecord::at(t, node, "route-break")
                            .field("via", neighbor)
                            .field("routes", broken.len())
                    });
                    self.maintain(t);
                }
            }
        }
        Ok(())
    }

    pub fn route(&self, src: NodeId, dst: NodeId, class: TrafficClass) -> Result<Vec<NodeId>, RouteError> {
        select_route(
            &self.tables(),
            self.topology.positions(),
            src,
            dst,
            class,
            self.params.path_loss_exponent,
        )
    }

    /// Opens a connection; fails exactly when no route exists.
    pub fn open(&mut self, local: NodeId, peer: NodeId, class: TrafficClass) -> Result<(), RouteError> {
        self.route(local, peer, class)?;
        let t = self.now();
        self.connections.insert(
            (local, peer),
            Connection {
                local,
                peer,
                class,
                state: ConnState::Open,
                opened_at: t,
            },
        );
        self.trace.emit(|| TraceRecord::at(t, local, "conn-open").field("peer", peer));
        Ok(())
    }

    /// Re-checks the route of every live connection.
    pub fn maintain(&mut self, t: f64) {
        let keys: Vec<(NodeId, NodeId)> = self.connections.keys().copied().collect();
        for k in keys {
            let c = &self.connections[&k];
            if c.state == ConnState::Closed {
                continue;
            }
            let ok = self.route(c.local, c.peer, c.class).is_ok();
            let next = if ok { ConnState::Open } else { ConnState::Degraded };
            if next != c.state {
                self.trace.emit(|| {
                    TraceRecord::at(t, k.0, if ok { "conn-restored" } else { "conn-degraded" })
                        .field("peer", k.1)
                });
                self.connections.get_mut(&k).expect("present").state = next;
            }
        }
    }

    pub fn terminate(&mut self, local: NodeId, peer: NodeId) {
        let t = self.now();
        if let Some(c) = self.connections.get_mut(&(local, peer)) {
            c.state = ConnState::Closed;
            self.trace.emit(|| TraceRecord::at(t, local, "conn-close").field("peer", peer));
        }
    }

    pub fn connection(&self, local: NodeId, peer: NodeId) -> Option<&Connection> {
        self.connections.get(&(local, peer))
    }

    /// Takes `n` out of the network at time `t`. Its neighbors notice at
    /// once and break their routes through it.
    pub fn fail_node(&mut self, n: NodeId, t: f64) {
        if !self.down.insert(n) {
            return;
        }
        let neighbors = self.topology.neighbors(n);
        self.topology.isolate(n);
        self.trace.emit(|| TraceRecord::at(t, n, "node-down"));
        for m in neighbors {
            if let Some(r) = self.routers.get_mut(&m) {
                let broken = r.break_routes_via(n, t);
                self.trace.emit(|| {
                    TraceRecord::at(t, m, "route-break")
                        .field("via", n)
                        .field("routes", broken.len())
                });
            }
        }
        self.maintain(t);
    }

    fn drop_frame(&mut self, t: f64, at: NodeId, dst: NodeId, reason: &str) {
        self.stats.frames_dropped += 1;
        self.trace.emit(|| {
            TraceRecord::at(t, at, "frame-drop")
                .field("dst", dst)
                .field("reason", reason)
        });
    }

    /// Sends `payload` KB from `src` to `dst`, departing at `t` (not before
    /// the layer's clock). A connection is opened on first use; sends on a
    /// terminated connection are rejected.
    pub fn send(&mut self, src: NodeId, dst: NodeId, payload: f64, class: TrafficClass, t: f64) -> Result<Delivery, SendError> {
        for n in [src, dst] {
            if self.down.contains(&n) {
                self.drop_frame(t, src, dst, "node-down");
                return Err(SendError::NodeDown(n));
            }
        }
        if src == dst {
            self.trace.emit(|| {
                TraceRecord::at(t, dst, "deliver")
                    .field("src", src)
                    .field("kb", payload)
                    .field("frames", 0)
                    .field("path", src)
            });
            return Ok(Delivery {
                path: vec![src],
                frames: 0,
                payload,
                departure: t,
                arrival: t,
            });
        }
        match self.connections.get(&(src, dst)).map(|c| c.state) {
            Some(ConnState::Closed) => {
                return Err(SendError::ConnectionClosed { local: src, peer: dst });
            }
            Some(_) => {}
            None => {
                if let Err(e) = self.open(src, dst, class) {
                    self.drop_frame(t, src, dst, "no-route");
                    return Err(e.into());
                }
            }
        }
        let path = match self.route(src, dst, class) {
            Ok(p) => p,
            Err(e) => {
                let at = match e {
                    RouteError::NoRoute { at, .. } => at,
                    RouteError::Loop { .. } => src,
                };
                self.drop_frame(t, at, dst, "no-route");
                return Err(e.into());
            }
        };
        let frames = packet_count(payload, 0.0, self.params.packet_size).unwrap_or(0);
        let mut frame = DataFrame {
            source: src,
            final_destination: dst,
            payload_size: payload,
            ttl: self.params.ttl,
            traffic_class: class,
            path_so_far: vec![src],
        };
        let mut hops = Vec::with_capacity(path.len() - 1);
        for w in path.windows(2) {
            let Some(l) = self.link_ok(w[0], w[1]) else {
                self.drop_frame(t, w[0], dst, "no-link");
                return Err(RouteError::NoRoute { at: w[0], destination: dst }.into());
            };
            if !frame.forward(w[1]) {
                self.drop_frame(t, w[0], dst, "ttl");
                return Err(SendError::TtlExceeded { at: w[0] });
            }
            hops.push(l);
        }
        let arrival = t + transfer_duration(payload, self.params.packet_size, &hops);
        self.stats.frames_sent += frames;
        self.stats.frames_forwarded += frames * (hops.len() as u64 - 1);
        self.stats.frames_delivered += frames;
        let ttl0 = self.params.ttl;
        self.trace.emit(|| {
            TraceRecord::at(t, src, "send")
                .field("dst", dst)
                .field("kb", payload)
                .field("frames", frames)
                .field("class", class.as_str())
                .field("path", path_string(&path))
        });
        for (i, w) in path.windows(2).enumerate() {
            self.trace.emit(|| {
                TraceRecord::at(t, w[0], "frame-fwd")
                    .field("next", w[1])
                    .field("dst", dst)
                    .field("frames", frames)
                    .field("ttl", ttl0 - i as u32)
            });
        }
        self.trace.emit(|| {
            TraceRecord::at(arrival, dst, "deliver")
                .field("src", src)
                .field("kb", payload)
                .field("frames", frames)
                .field("path", path_string(&frame.path_so_far))
        });
        Ok(Delivery {
            path,
            frames,
            payload,
            departure: t,
            arrival,
        })
    }

    /// One `route-snapshot` record per table row.
    pub fn snapshot(&mut self, t: f64) {
        if !self.trace.enabled() {
            return;
        }
        let rows: Vec<TraceRecord> = self
            .routers
            .iter()
            .filter(|(n, _)| !self.down.contains(*n))
            .flat_map(|(n, r)| {
                r.table.entries.values().map(move |e| {
                    let hops = if e.is_valid() { alloc::format!("{}", e.hops) } else { "inf".into() };
                    TraceRecord::at(t, *n, "route-snapshot")
                        .field("dst", e.destination)
                        .field("next", e.next_node)
                        .field("hops", hops)
                        .field("seq", e.sequence_no)
                        .field("bw", e.available_bandwidth)
                })
            })
            .collect();
        for r in rows {
            self.trace.emit(|| r);
        }
    }
}
