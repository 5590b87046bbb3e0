//! Multi-hop routing on top of the group star topology.
//!
//! Each device runs a [`Router`]: it periodically broadcasts a discovery
//! request to its direct neighbors, answers requests with the rows of its
//! table that changed since its last answer to that neighbor, and merges
//! the answers it receives with destination-sequenced distance-vector rules.
//! [`layer::RoutingLayer`] drives all routers through the event queue and
//! moves application data along the selected routes.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::model::{NodeId, Position};

pub mod layer;
mod topology;

pub use layer::{ConnState, Delivery, RoutingLayer, RoutingParams, SendError};
pub use topology::{LinkParams, Topology};

/// Hop count of a broken route.
pub const INFINITE_HOPS: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingTableEntry {
    pub destination: NodeId,
    pub next_node: NodeId,
    pub sequence_no: u64,
    /// [`INFINITE_HOPS`] marks a broken route.
    pub hops: u32,
    /// Mbps, bottleneck along the route.
    pub available_bandwidth: f64,
    pub last_updated: f64,
}

impl RoutingTableEntry {
    pub fn is_valid(&self) -> bool {
        self.hops != INFINITE_HOPS
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoutingTable {
    pub entries: BTreeMap<NodeId, RoutingTableEntry>,
}

impl RoutingTable {
    /// Valid route to `d`, if any.
    pub fn route(&self, d: NodeId) -> Option<&RoutingTableEntry> {
        self.entries.get(&d).filter(|e| e.is_valid())
    }

    pub fn valid_routes(&self) -> impl Iterator<Item = &RoutingTableEntry> {
        self.entries.values().filter(|e| e.is_valid())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiscoveryRequest {
    pub source: NodeId,
    pub sequence_no: u64,
}

/// One advertised row: `hops` and bandwidth as seen by the sender.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DigestEntry {
    pub destination: NodeId,
    pub sequence_no: u64,
    pub hops: u32,
    pub available_bandwidth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscoveryReply {
    pub source: NodeId,
    pub destination: NodeId,
    pub sequence_no: u64,
    pub entries: Vec<DigestEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrafficClass {
    RealTime,
    Bulk,
}

impl TrafficClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrafficClass::RealTime => "rt",
            TrafficClass::Bulk => "bulk",
        }
    }
}

/// A data frame in flight. `path_so_far` is kept for tracing only.
#[derive(Debug, Clone, PartialEq)]
pub struct DataFrame {
    pub source: NodeId,
    pub final_destination: NodeId,
    /// KB.
    pub payload_size: f64,
    pub ttl: u32,
    pub traffic_class: TrafficClass,
    pub path_so_far: Vec<NodeId>,
}

impl DataFrame {
    /// Moves the frame to `next`. Returns `false`, leaving the frame where it
    /// is, when the hop budget is spent.
    pub fn forward(&mut self, next: NodeId) -> bool {
        if self.ttl == 0 {
            return false;
        }
        self.ttl -= 1;
        self.path_so_far.push(next);
        true
    }
}

type Row = (u64, u32, f64);

/// Routing state of one device.
#[derive(Debug, Clone)]
pub struct Router {
    pub id: NodeId,
    seq: u64,
    pub table: RoutingTable,
    seen: BTreeSet<(NodeId, u64)>,
    /// Rows as of the last emission; replies are built from this.
    snapshot: BTreeMap<NodeId, Row>,
    advertised: BTreeMap<NodeId, BTreeMap<NodeId, Row>>,
    last_heard: BTreeMap<NodeId, f64>,
}

impl Router {
    pub fn new(id: NodeId) -> Self {
        let mut snapshot = BTreeMap::new();
        snapshot.insert(id, (0, 0, f64::INFINITY));
        Self {
            id,
            seq: 0,
            table: RoutingTable::default(),
            seen: BTreeSet::new(),
            snapshot,
            advertised: BTreeMap::new(),
            last_heard: BTreeMap::new(),
        }
    }

    pub fn sequence_no(&self) -> u64 {
        self.seq
    }

    fn rows(&self) -> BTreeMap<NodeId, Row> {
        let mut rows: BTreeMap<NodeId, Row> = self
            .table
            .entries
            .values()
            .map(|e| (e.destination, (e.sequence_no, e.hops, e.available_bandwidth)))
            .collect();
        rows.insert(self.id, (self.seq, 0, f64::INFINITY));
        rows
    }

    /// Starts a new discovery round. Own sequence numbers are even and grow
    /// by two per emission; odd numbers are reserved for broken routes.
    pub fn emit_discovery(&mut self) -> DiscoveryRequest {
        self.seq += 2;
        self.snapshot = self.rows();
        DiscoveryRequest {
            source: self.id,
            sequence_no: self.seq,
        }
    }

    fn hear(&mut self, n: NodeId, now: f64) {
        self.last_heard.insert(n, now);
    }

    pub fn last_heard(&self, n: NodeId) -> Option<f64> {
        self.last_heard.get(&n).copied()
    }

    /// Applies one candidate route; returns whether the row changed.
    fn offer(&mut self, cand: RoutingTableEntry) -> bool {
        if cand.destination == self.id {
            return false;
        }
        match self.table.entries.get_mut(&cand.destination) {
            None => {
                if cand.is_valid() {
                    self.table.entries.insert(cand.destination, cand);
                    true
                } else {
                    false
                }
            }
            Some(cur) => {
                let adopt = cand.sequence_no > cur.sequence_no
                    || (cand.sequence_no == cur.sequence_no && cand.hops < cur.hops)
                    || (cand.next_node == cur.next_node && cand.sequence_no >= cur.sequence_no);
                if !adopt {
                    return false;
                }
                let changed = cur.next_node != cand.next_node
                    || cur.sequence_no != cand.sequence_no
                    || cur.hops != cand.hops
                    || cur.available_bandwidth != cand.available_bandwidth;
                *cur = cand;
                changed
            }
        }
    }

    /// Handles a request heard over a link of `link_bw` Mbps. Returns the
    /// reply to unicast back, or `None` for a duplicate.
    pub fn handle_discovery_request(&mut self, req: &DiscoveryRequest, link_bw: f64, now: f64) -> Option<DiscoveryReply> {
        if !self.seen.insert((req.source, req.sequence_no)) {
            return None;
        }
        self.hear(req.source, now);
        self.offer(RoutingTableEntry {
            destination: req.source,
            next_node: req.source,
            sequence_no: req.sequence_no,
            hops: 1,
            available_bandwidth: link_bw,
            last_updated: now,
        });
        let sent = self.advertised.entry(req.source).or_default();
        let mut entries = Vec::new();
        for (d, row) in &self.snapshot {
            if *d == req.source || sent.get(d) == Some(row) {
                continue;
            }
            sent.insert(*d, *row);
            entries.push(DigestEntry {
                destination: *d,
                sequence_no: row.0,
                hops: row.1,
                available_bandwidth: row.2,
            });
        }
        Some(DiscoveryReply {
            source: self.id,
            destination: req.source,
            sequence_no: self.seq,
            entries,
        })
    }

    /// Merges a reply from direct neighbor `from`. Returns the destinations
    /// whose rows changed.
    pub fn merge_reply(&mut self, from: NodeId, reply: &DiscoveryReply, link_bw: f64, now: f64) -> Vec<NodeId> {
        self.hear(from, now);
        let mut changed = Vec::new();
        for e in &reply.entries {
            let cand = RoutingTableEntry {
                destination: e.destination,
                next_node: from,
                sequence_no: e.sequence_no,
                hops: e.hops.saturating_add(1),
                available_bandwidth: e.available_bandwidth.min(link_bw),
                last_updated: now,
            };
            if self.offer(cand) {
                changed.push(e.destination);
            }
        }
        changed
    }

    /// Marks every valid route through `n` as broken. Returns the affected
    /// destinations.
    pub fn break_routes_via(&mut self, n: NodeId, now: f64) -> Vec<NodeId> {
        self.last_heard.remove(&n);
        let mut broken = Vec::new();
        for e in self.table.entries.values_mut() {
            if e.next_node == n && e.is_valid() {
                e.sequence_no |= 1;
                e.hops = INFINITE_HOPS;
                e.last_updated = now;
                broken.push(e.destination);
            }
        }
        broken
    }

    /// Whether `n` has been silent for at least `timeout` seconds.
    pub fn neighbor_expired(&self, n: NodeId, now: f64, timeout: f64) -> bool {
        self.last_heard.get(&n).is_some_and(|t| now - t >= timeout)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteError {
    /// No valid table entry toward the destination.
    NoRoute { at: NodeId, destination: NodeId },
    /// Next-hop pointers revisit a node.
    Loop { destination: NodeId },
}

impl fmt::Display for RouteError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RouteError::NoRoute { at, destination } => write!(f, "no route from {at} to {destination}"),
            RouteError::Loop { destination } => write!(f, "routing loop toward {destination}"),
        }
    }
}

/// Follows next-node pointers from `src` to `dst`.
pub fn next_hop_path(tables: &BTreeMap<NodeId, RoutingTable>, src: NodeId, dst: NodeId) -> Result<Vec<NodeId>, RouteError> {
    let mut path = vec![src];
    let mut cur = src;
    while cur != dst {
        let e = tables
            .get(&cur)
            .and_then(|t| t.route(dst))
            .ok_or(RouteError::NoRoute { at: cur, destination: dst })?;
        if path.contains(&e.next_node) || path.len() > tables.len() {
            return Err(RouteError::Loop { destination: dst });
        }
        cur = e.next_node;
        path.push(cur);
    }
    Ok(path)
}

/// Picks the path for a transfer.
///
/// Real-time traffic takes the table's minimum-hop route. Bulk traffic takes
/// the path over known one-hop links that minimises the sum of hop distances
/// raised to `exponent`, then fewer hops, then the lexicographically smaller
/// node sequence. Either way the source must hold a valid entry.
pub fn select_route(
    tables: &BTreeMap<NodeId, RoutingTable>,
    positions: &BTreeMap<NodeId, Position>,
    src: NodeId,
    dst: NodeId,
    class: TrafficClass,
    exponent: f64,
) -> Result<Vec<NodeId>, RouteError> {
    if src == dst {
        return Ok(vec![src]);
    }
    if tables.get(&src).and_then(|t| t.route(dst)).is_none() {
        return Err(RouteError::NoRoute { at: src, destination: dst });
    }
    match class {
        TrafficClass::RealTime => next_hop_path(tables, src, dst),
        TrafficClass::Bulk => {
            let mut adj: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
            for (u, t) in tables {
                for e in t.valid_routes().filter(|e| e.hops == 1) {
                    adj.entry(*u).or_default().push(e.destination);
                }
            }
            cheapest_path(&adj, positions, src, dst, exponent)
                .ok_or(RouteError::NoRoute { at: src, destination: dst })
        }
    }
}

fn hop_cost(positions: &BTreeMap<NodeId, Position>, a: NodeId, b: NodeId, exponent: f64) -> f64 {
    match (positions.get(&a), positions.get(&b)) {
        (Some(p), Some(q)) if exponent == 2.0 => p.distance_sq(q),
        (Some(p), Some(q)) => libm::pow(p.distance(q), exponent),
        _ => 0.0,
    }
}

/// Label-setting search keyed on (cost, hops, path).
fn cheapest_path(
    adj: &BTreeMap<NodeId, Vec<NodeId>>,
    positions: &BTreeMap<NodeId, Position>,
    src: NodeId,
    dst: NodeId,
    exponent: f64,
) -> Option<Vec<NodeId>> {
    type Label = (f64, usize, Vec<NodeId>);
    let better = |a: &Label, b: &Label| {
        a.0.total_cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then_with(|| a.2.cmp(&b.2))
            .is_lt()
    };
    let mut best: BTreeMap<NodeId, Label> = BTreeMap::new();
    let mut done: BTreeSet<NodeId> = BTreeSet::new();
    best.insert(src, (0.0, 0, vec![src]));
    loop {
        let (u, label) = best
            .iter()
            .filter(|(n, _)| !done.contains(*n))
            .fold(None::<(NodeId, &Label)>, |acc, (n, l)| match acc {
                Some((_, al)) if !better(l, al) => acc,
                _ => Some((*n, l)),
            })
            .map(|(n, l)| (n, l.clone()))?;
        if u == dst {
            return Some(label.2);
        }
        done.insert(u);
        for v in adj.get(&u).into_iter().flatten() {
            if done.contains(v) {
                continue;
            }
            let mut path = label.2.clone();
            path.push(*v);
            let cand = (label.0 + hop_cost(positions, u, *v, exponent), label.1 + 1, path);
            if best.get(v).is_none_or(|cur| better(&cand, cur)) {
                best.insert(*v, cand);
            }
        }
    }
}

/// Hop distances from `src` over the undirected edge list.
pub fn bfs_distances(adj: &BTreeMap<NodeId, Vec<NodeId>>, src: NodeId) -> BTreeMap<NodeId, u32> {
    let mut dist = BTreeMap::new();
    dist.insert(src, 0);
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        let d = dist[&u];
        for v in adj.get(&u).into_iter().flatten() {
            if !dist.contains_key(v) {
                dist.insert(*v, d + 1);
                queue.push_back(*v);
            }
        }
    }
    dist
}
