//! Device discovery and standard group formation.
//!
//! Every device scans for a fixed time, then alternates between search and
//! listen with a uniformly random dwell. Two devices in radio range discover
//! each other the first time one is searching while the other listens. Once
//! discovery settles, devices act in order of first discovery: join the
//! strongest owner they know of, or negotiate ownership with their strongest
//! ungrouped peer through a request/response/confirmation handshake.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::model::{NodeId, NodeSpec, Scenario};
use crate::rng::{tie_breaker_bit, SimRng, STREAM_DISCOVERY};
use crate::sim::engine::EventQueue;
use crate::trace::{Trace, TraceRecord};

/// Shortest find-phase dwell, seconds.
pub const DWELL_MIN: f64 = 0.100;
/// Longest find-phase dwell, seconds.
pub const DWELL_MAX: f64 = 0.300;
/// Address of every group owner.
pub const OWNER_ADDRESS: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Idle,
    Scan,
    FindSearch,
    FindListen,
    Negotiating,
    Grouped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    None,
    Owner,
    Client,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::None => "none",
            Role::Owner => "owner",
            Role::Client => "client",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceState {
    pub node_id: NodeId,
    pub phase: Phase,
    pub discovered_peers: BTreeSet<NodeId>,
    pub role: Role,
    pub group_id: Option<u32>,
}

impl DeviceState {
    pub fn new(node_id: NodeId) -> Self {
        Self {
            node_id,
            phase: Phase::Idle,
            discovered_peers: BTreeSet::new(),
            role: Role::None,
            group_id: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub group_id: u32,
    pub owner: NodeId,
    /// In join order.
    pub clients: Vec<NodeId>,
    pub addresses: BTreeMap<NodeId, u32>,
}

impl Group {
    pub fn new(group_id: u32, owner: NodeId) -> Self {
        let mut addresses = BTreeMap::new();
        addresses.insert(owner, OWNER_ADDRESS);
        Self {
            group_id,
            owner,
            clients: Vec::new(),
            addresses,
        }
    }

    /// Adds `client` and returns its address.
    pub fn admit(&mut self, client: NodeId) -> u32 {
        let addr = self.clients.len() as u32 + 2;
        self.clients.push(client);
        self.addresses.insert(client, addr);
        addr
    }

    pub fn members(&self) -> impl Iterator<Item = NodeId> + '_ {
        core::iter::once(self.owner).chain(self.clients.iter().copied())
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.addresses.contains_key(&n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupError {
    InvalidScenario(String),
}

impl fmt::Display for GroupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupError::InvalidScenario(m) => write!(f, "invalid scenario: {m}"),
        }
    }
}

pub fn draw_dwell(rng: &mut SimRng) -> f64 {
    rng.uniform(DWELL_MIN, DWELL_MAX)
}

/// Toggles search and listen and draws the time until the next toggle.
/// Outside the find phase the state comes back unchanged.
pub fn find_phase_step(state: &DeviceState, rng: &mut SimRng) -> (DeviceState, f64) {
    let mut next = state.clone();
    next.phase = match state.phase {
        Phase::FindSearch => Phase::FindListen,
        Phase::FindListen => Phase::FindSearch,
        other => other,
    };
    (next, draw_dwell(rng))
}

pub fn in_range(a: &NodeSpec, b: &NodeSpec) -> bool {
    a.position.distance(&b.position) <= a.radio_range.min(b.radio_range)
}

/// The device with the larger intent owns. Equal intents are settled by a
/// bit derived from the seed and the lower id: set means the lower id wins.
pub fn negotiate_group_owner(a: &NodeSpec, b: &NodeSpec, seed: u64) -> NodeId {
    if a.go_intent != b.go_intent {
        return if a.go_intent > b.go_intent { a.id } else { b.id };
    }
    let (lo, hi) = if a.id < b.id { (a.id, b.id) } else { (b.id, a.id) };
    if tie_breaker_bit(seed, lo.0) {
        lo
    } else {
        hi
    }
}

/// Result of one owner negotiation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Negotiation {
    pub owner: NodeId,
    pub client: NodeId,
    /// Set when intents were equal.
    pub tie_breaker: Option<bool>,
    /// Time the confirmation arrives.
    pub end: f64,
}

/// Runs the three-message handshake started by `a` at time `t`, each
/// message taking `delta` seconds.
pub fn negotiate(a: &NodeSpec, b: &NodeSpec, seed: u64, t: f64, delta: f64, trace: &mut Trace) -> Negotiation {
    let owner = negotiate_group_owner(a, b, seed);
    let client = if owner == a.id { b.id } else { a.id };
    let tie_breaker = (a.go_intent == b.go_intent).then(|| tie_breaker_bit(seed, a.id.min(b.id).0));
    trace.emit(|| {
        TraceRecord::at(t, a.id, "go-neg-req")
            .field("peer", b.id)
            .field("intent", a.go_intent)
    });
    trace.emit(|| {
        let r = TraceRecord::at(t + delta, b.id, "go-neg-resp")
            .field("peer", a.id)
            .field("intent", b.go_intent);
        match tie_breaker {
            Some(bit) => r.field("tie", u8::from(bit)),
            None => r,
        }
    });
    trace.emit(|| {
        TraceRecord::at(t + 2.0 * delta, a.id, "go-neg-conf")
            .field("peer", b.id)
            .field("owner", owner)
    });
    Negotiation {
        owner,
        client,
        tie_breaker,
        end: t + 3.0 * delta,
    }
}

#[derive(Debug, Clone)]
pub struct Formation {
    pub groups: Vec<Group>,
    pub devices: BTreeMap<NodeId, DeviceState>,
    /// First discovery time of every device that found a peer.
    pub first_discovery: BTreeMap<NodeId, f64>,
    /// Owner negotiations performed.
    pub negotiations: Vec<Negotiation>,
    pub end_time: f64,
    pub trace: Trace,
}

impl Formation {
    /// Owner-client pairs, `(owner, client)`, sorted.
    pub fn links(&self) -> Vec<(NodeId, NodeId)> {
        let mut v: Vec<(NodeId, NodeId)> = self
            .groups
            .iter()
            .flat_map(|g| g.clients.iter().map(move |c| (g.owner, *c)))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn group_of(&self, n: NodeId) -> Vec<u32> {
        self.groups
            .iter()
            .filter(|g| g.contains(n))
            .map(|g| g.group_id)
            .collect()
    }
}

fn trace_role(trace: &mut Trace, t: f64, node: NodeId, role: Role, group: u32) {
    trace.emit(|| {
        TraceRecord::at(t, node, "role")
            .field("role", role.as_str())
            .field("group", group)
    });
}

fn trace_grant(trace: &mut Trace, t: f64, owner: NodeId, client: NodeId, addr: u32, group: u32) {
    trace.emit(|| {
        TraceRecord::at(t, owner, "addr-grant")
            .field("client", client)
            .field("addr", addr)
            .field("group", group)
    });
}

/// Realizes explicit groups, or runs discovery and greedy negotiation.
pub fn form_groups(s: &Scenario, trace_enabled: bool) -> Result<Formation, GroupError> {
    let mut devices: BTreeMap<NodeId, DeviceState> =
        s.nodes.iter().map(|n| (n.id, DeviceState::new(n.id))).collect();
    let mut trace = Trace::new(trace_enabled);
    match &s.groups {
        Some(specs) => {
            let mut groups = Vec::new();
            let mut count: BTreeMap<NodeId, usize> = BTreeMap::new();
            for (i, spec) in specs.iter().enumerate() {
                let gid = i as u32 + 1;
                let mut g = Group::new(gid, spec.owner);
                for m in core::iter::once(spec.owner).chain(spec.clients.iter().copied()) {
                    if !devices.contains_key(&m) {
                        return Err(GroupError::InvalidScenario(format!("unknown node {m} in group {gid}")));
                    }
                    let c = count.entry(m).or_insert(0);
                    *c += 1;
                    if *c > 2 {
                        return Err(GroupError::InvalidScenario(format!("node {m} in more than two groups")));
                    }
                }
                trace_role(&mut trace, 0.0, spec.owner, Role::Owner, gid);
                for c in &spec.clients {
                    if g.contains(*c) {
                        return Err(GroupError::InvalidScenario(format!("node {c} listed twice in group {gid}")));
                    }
                    let addr = g.admit(*c);
                    trace_role(&mut trace, 0.0, *c, Role::Client, gid);
                    trace_grant(&mut trace, 0.0, spec.owner, *c, addr, gid);
                }
                groups.push(g);
            }
            for g in &groups {
                for m in g.members() {
                    let d = devices.get_mut(&m).expect("checked");
                    d.phase = Phase::Grouped;
                    if m == g.owner {
                        d.role = Role::Owner;
                    } else if d.role == Role::None {
                        d.role = Role::Client;
                    }
                    d.group_id.get_or_insert(g.group_id);
                    d.discovered_peers.extend(g.members().filter(|p| *p != m));
                }
            }
            Ok(Formation {
                groups,
                devices,
                first_discovery: BTreeMap::new(),
                negotiations: Vec::new(),
                end_time: 0.0,
                trace,
            })
        }
        None => Ok(auto_form(s, devices, trace)),
    }
}

fn auto_form(s: &Scenario, mut devices: BTreeMap<NodeId, DeviceState>, mut trace: Trace) -> Formation {
    let spec: BTreeMap<NodeId, &NodeSpec> = s.nodes.iter().map(|n| (n.id, n)).collect();
    let ids: Vec<NodeId> = spec.keys().copied().collect();
    let mut pending: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    for (i, a) in ids.iter().enumerate() {
        for b in &ids[i + 1..] {
            if in_range(spec[a], spec[b]) {
                pending.insert((*a, *b));
            }
        }
    }

    let t_find = s.params.scan_duration;
    let deadline = t_find + s.params.formation_window;
    let mut rng = SimRng::new(s.rng_seed, STREAM_DISCOVERY);
    let mut queue: EventQueue<NodeId> = EventQueue::new(0.0);
    for id in &ids {
        devices.get_mut(id).expect("known").phase = Phase::Scan;
        trace.emit(|| TraceRecord::at(0.0, *id, "scan"));
    }
    for id in &ids {
        let d = devices.get_mut(id).expect("known");
        d.phase = if rng.bit() { Phase::FindSearch } else { Phase::FindListen };
        let dwell = draw_dwell(&mut rng);
        queue.schedule(t_find + dwell, *id).expect("future");
    }

    let mut first_discovery: BTreeMap<NodeId, f64> = BTreeMap::new();
    let mut last_found = t_find;

    let check = |who: Option<NodeId>,
                     t: f64,
                     devices: &mut BTreeMap<NodeId, DeviceState>,
                     pending: &mut BTreeSet<(NodeId, NodeId)>,
                     trace: &mut Trace,
                     first: &mut BTreeMap<NodeId, f64>| {
        let pairs: Vec<(NodeId, NodeId)> = pending
            .iter()
            .filter(|(a, b)| who.is_none_or(|w| *a == w || *b == w))
            .copied()
            .collect();
        let mut found = false;
        for (a, b) in pairs {
            let (pa, pb) = (devices[&a].phase, devices[&b].phase);
            let (searcher, listener) = match (pa, pb) {
                (Phase::FindSearch, Phase::FindListen) => (a, b),
                (Phase::FindListen, Phase::FindSearch) => (b, a),
                _ => continue,
            };
            trace.emit(|| TraceRecord::at(t, searcher, "probe-req").field("dst", listener));
            trace.emit(|| TraceRecord::at(t, listener, "probe-resp").field("dst", searcher));
            devices.get_mut(&a).expect("known").discovered_peers.insert(b);
            devices.get_mut(&b).expect("known").discovered_peers.insert(a);
            first.entry(a).or_insert(t);
            first.entry(b).or_insert(t);
            pending.remove(&(a, b));
            found = true;
        }
        found
    };

    if check(None, t_find, &mut devices, &mut pending, &mut trace, &mut first_discovery) {
        last_found = t_find;
    }
    while !pending.is_empty() {
        let Some(t) = queue.peek_time() else { break };
        if t > deadline {
            break;
        }
        let (t, id) = queue.pop().expect("peeked");
        let (next, dwell) = find_phase_step(&devices[&id], &mut rng);
        devices.insert(id, next);
        queue.schedule(t + dwell, id).expect("future");
        if check(Some(id), t, &mut devices, &mut pending, &mut trace, &mut first_discovery) {
            last_found = t;
        }
    }
    let mut t = if pending.is_empty() { last_found } else { deadline };

    let mut order: Vec<(f64, NodeId)> = first_discovery.iter().map(|(n, t)| (*t, *n)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let delta = s.params.default_latency;
    let mut groups: Vec<Group> = Vec::new();
    let mut negotiations = Vec::new();
    let strongest = |cands: &mut dyn Iterator<Item = NodeId>| -> Option<NodeId> {
        cands.max_by(|a, b| spec[a].go_intent.cmp(&spec[b].go_intent).then(b.cmp(a)))
    };
    for (_, id) in order {
        if devices[&id].role != Role::None {
            continue;
        }
        let peers = devices[&id].discovered_peers.clone();
        let owner = strongest(&mut peers.iter().copied().filter(|p| devices[p].role == Role::Owner));
        if let Some(o) = owner {
            let g = groups.iter_mut().find(|g| g.owner == o).expect("owner has a group");
            let gid = g.group_id;
            trace.emit(|| TraceRecord::at(t, id, "join").field("owner", o).field("group", gid));
            let addr = g.admit(id);
            trace_grant(&mut trace, t + delta, o, id, addr, gid);
            trace_role(&mut trace, t + delta, id, Role::Client, gid);
            let d = devices.get_mut(&id).expect("known");
            d.role = Role::Client;
            d.phase = Phase::Grouped;
            d.group_id = Some(gid);
            t += 2.0 * delta;
            continue;
        }
        let Some(p) = strongest(&mut peers.iter().copied().filter(|p| devices[p].role == Role::None)) else {
            continue;
        };
        devices.get_mut(&id).expect("known").phase = Phase::Negotiating;
        devices.get_mut(&p).expect("known").phase = Phase::Negotiating;
        let neg = negotiate(spec[&id], spec[&p], s.rng_seed, t, delta, &mut trace);
        t = neg.end;
        let gid = groups.len() as u32 + 1;
        let mut g = Group::new(gid, neg.owner);
        let addr = g.admit(neg.client);
        trace_role(&mut trace, t, neg.owner, Role::Owner, gid);
        trace_role(&mut trace, t, neg.client, Role::Client, gid);
        trace_grant(&mut trace, t, neg.owner, neg.client, addr, gid);
        for (n, role) in [(neg.owner, Role::Owner), (neg.client, Role::Client)] {
            let d = devices.get_mut(&n).expect("known");
            d.role = role;
            d.phase = Phase::Grouped;
            d.group_id = Some(gid);
        }
        groups.push(g);
        negotiations.push(neg);
    }
    for d in devices.values_mut() {
        if d.role == Role::None {
            d.phase = Phase::Idle;
        }
    }
    Formation {
        groups,
        devices,
        first_discovery,
        negotiations,
        end_time: t,
        trace,
    }
}
