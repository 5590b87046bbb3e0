//! End-to-end scenario execution.
//!
//! Formation, routing convergence, allocation, then a discrete-event replay
//! of the workload in which every node runs its tasks one at a time and
//! data moves over the routing layer. The single-node baseline replays the
//! same workload on the source node from the same release time.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::engine::{EngineError, EventQueue};
use super::metrics::{
    makespan, GroupSummary, MetricsReport, NodeMetrics, PacketMetrics, TaskMetrics, TaskStatus,
};
use crate::cost::{packet_count, Reach};
use crate::group::{form_groups, Formation, GroupError};
use crate::model::{
    check_scenario, NodeId, Position, Scenario, ScenarioEventKind, TaskId, ValidationError,
};
use crate::routing::{LinkParams, RoutingLayer, RoutingParams, Topology, TrafficClass};
use crate::scheduler::{allocate, sort_tasks, AllocParams, Assignment, RejectReason};
use crate::trace::TraceRecord;

#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    Invalid(ValidationError),
    Group(GroupError),
    Engine(EngineError),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Invalid(e) => write!(f, "{e}"),
            RunError::Group(e) => write!(f, "{e}"),
            RunError::Engine(e) => write!(f, "internal error: {e}"),
        }
    }
}

impl From<EngineError> for RunError {
    fn from(e: EngineError) -> Self {
        RunError::Engine(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub trace: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { trace: true }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: MetricsReport,
    /// Sorted by time; equal times keep emission order.
    pub trace: Vec<TraceRecord>,
}

/// Owner-client links from formation plus every explicit link. Explicit
/// links override the default bandwidth and latency.
pub fn build_topology(s: &Scenario, formation: &Formation) -> Topology {
    let mut t = Topology::new();
    for n in &s.nodes {
        t.add_node(n.id, n.position);
    }
    let default = LinkParams {
        bandwidth: s.params.default_bandwidth,
        latency: s.params.default_latency,
    };
    for (a, b) in formation.links() {
        t.add_link(a, b, default);
    }
    for l in &s.links {
        t.add_link(
            l.endpoints.0,
            l.endpoints.1,
            LinkParams {
                bandwidth: l.bandwidth,
                latency: l.latency,
            },
        );
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Ev {
    Release,
    InputArrived { task: TaskId, pred: Option<TaskId>, transfer: Option<usize> },
    TaskDone { task: TaskId },
    OutputDelivered { task: TaskId, transfer: usize },
    Disconnect(NodeId),
    Move(NodeId, Position),
}

struct Transfer {
    path: Vec<NodeId>,
    frames: u64,
    arrival: f64,
    /// Task charged for sending (producer) and receiving (consumer), if the
    /// endpoint executes one.
    sender: Option<TaskId>,
    receivers: Vec<TaskId>,
}

#[derive(Clone, Copy)]
struct NodeState {
    energy: f64,
    power: f64,
    a: f64,
    b: f64,
    busy: bool,
    down: bool,
    exhausted: bool,
}

struct Exec<'a> {
    s: &'a Scenario,
    layer: &'a mut RoutingLayer,
    placement: BTreeMap<TaskId, NodeId>,
    index: BTreeMap<TaskId, usize>,
    preds: BTreeMap<TaskId, Vec<TaskId>>,
    succs: BTreeMap<TaskId, Vec<TaskId>>,
    tasks: BTreeMap<TaskId, TaskMetrics>,
    nodes: BTreeMap<NodeId, NodeState>,
    energy: BTreeMap<NodeId, NodeMetrics>,
    waiting: BTreeMap<TaskId, BTreeSet<Option<TaskId>>>,
    ready: BTreeMap<NodeId, Vec<(f64, usize, TaskId)>>,
    outputs_pending: BTreeMap<TaskId, usize>,
    transfers: Vec<Transfer>,
    down_at: BTreeMap<NodeId, f64>,
    packets: PacketMetrics,
    apply_events: bool,
}

impl<'a> Exec<'a> {
    fn new(s: &'a Scenario, layer: &'a mut RoutingLayer, assignment: &Assignment, release: f64, apply_events: bool) -> Self {
        let order = sort_tasks(&s.workload);
        let index = order.iter().enumerate().map(|(i, t)| (*t, i)).collect();
        let mut tasks = BTreeMap::new();
        for t in &s.workload.tasks {
            let placement = assignment.placements.get(&t.id);
            let status = match assignment.unassigned.iter().find(|(id, _)| *id == t.id) {
                Some((_, reason)) => TaskStatus::Unassigned(*reason),
                None => TaskStatus::Completed,
            };
            tasks.insert(
                t.id,
                TaskMetrics {
                    id: t.id,
                    name: t.name.clone(),
                    node: placement.map(|p| p.node),
                    status,
                    release,
                    ready: None,
                    exec_start: None,
                    exec_end: None,
                    end: None,
                    estimated_time: placement.map(|p| p.estimated_execution_time),
                    estimated_energy: placement.map(|p| p.estimated_energy),
                    charged_energy: 0.0,
                },
            );
        }
        let nodes = s
            .nodes
            .iter()
            .map(|n| {
                (
                    n.id,
                    NodeState {
                        energy: n.available_energy,
                        power: n.processing_power,
                        a: n.proc_energy_rate,
                        b: n.tx_energy_per_packet,
                        busy: false,
                        down: false,
                        exhausted: n.available_energy <= 0.0,
                    },
                )
            })
            .collect();
        let energy = s
            .nodes
            .iter()
            .map(|n| {
                (
                    n.id,
                    NodeMetrics {
                        node: n.id,
                        name: n.name.clone(),
                        compute: 0.0,
                        tx: 0.0,
                        relay: 0.0,
                        rx: 0.0,
                        remaining: n.available_energy,
                        tasks_run: 0,
                    },
                )
            })
            .collect();
        let preds = s.workload.tasks.iter().map(|t| (t.id, s.workload.predecessors(t.id))).collect();
        let succs = s.workload.tasks.iter().map(|t| (t.id, s.workload.successors(t.id))).collect();
        Self {
            s,
            layer,
            placement: assignment.placements.iter().map(|(t, p)| (*t, p.node)).collect(),
            index,
            preds,
            succs,
            tasks,
            nodes,
            energy,
            waiting: BTreeMap::new(),
            ready: BTreeMap::new(),
            outputs_pending: BTreeMap::new(),
            transfers: Vec::new(),
            down_at: BTreeMap::new(),
            packets: PacketMetrics::default(),
            apply_events,
        }
    }

    fn emit(&mut self, make: impl FnOnce() -> TraceRecord) {
        self.layer.trace_mut().emit(make);
    }

    fn class_of(&self, t: TaskId) -> TrafficClass {
        match self.s.workload.task(t) {
            Some(spec) if !spec.real_time => TrafficClass::Bulk,
            _ => TrafficClass::RealTime,
        }
    }

    /// Takes `j` joules from `n`; the battery clamps at zero.
    fn spend(&mut self, n: NodeId, j: f64, t: f64) {
        let st = self.nodes.get_mut(&n).expect("node");
        st.energy = (st.energy - j).max(0.0);
        let exhausted_now = st.energy <= 0.0 && !st.exhausted && j > 0.0;
        if exhausted_now {
            st.exhausted = true;
        }
        self.energy.get_mut(&n).expect("node").remaining = st.energy;
        if exhausted_now {
            self.emit(|| TraceRecord::at(t, n, "node-exhausted"));
        }
    }

    fn fail(&mut self, task: TaskId, reason: &'static str, t: f64) {
        let mut stack = alloc::vec![task];
        while let Some(id) = stack.pop() {
            let m = self.tasks.get_mut(&id).expect("task");
            if m.end.is_some() || !matches!(m.status, TaskStatus::Completed) {
                continue;
            }
            m.status = TaskStatus::Failed(reason);
            let node = m.node;
            self.emit(|| TraceRecord::new(t, node, "task-failed").field("task", id).field("reason", reason));
            stack.extend(self.succs[&id].iter().copied());
        }
    }

    fn unassigned(&self) -> Vec<(TaskId, RejectReason)> {
        self.tasks
            .values()
            .filter_map(|m| match m.status {
                TaskStatus::Unassigned(r) => Some((m.id, r)),
                _ => None,
            })
            .collect()
    }

    fn is_live(&self, task: TaskId) -> bool {
        let m = &self.tasks[&task];
        matches!(m.status, TaskStatus::Completed) && m.node.is_some()
    }

    #[allow(clippy::too_many_arguments)]
    /// Ships `kb` from `from` to `to`. On success returns the transfer index
    /// and arrival time.
    fn ship(&mut self, from: NodeId, to: NodeId, kb: f64, class: TrafficClass, t: f64, sender: Option<TaskId>, receivers: Vec<TaskId>) -> Result<(usize, f64), &'static str> {
        if self.nodes[&from].down || self.nodes[&to].down {
            return Err("node-down");
        }
        if let Ok(path) = self.layer.route(from, to, class) {
            if let Some(n) = path.iter().find(|n| self.nodes[*n].exhausted) {
                let n = *n;
                self.packets.dropped += frames_for(kb, self.s.packet_size);
                self.emit(|| TraceRecord::at(t, n, "frame-drop").field("dst", to).field("reason", "node-exhausted"));
                return Err("node-exhausted");
            }
        }
        let delivery = self.layer.send(from, to, kb, class, t).map_err(|e| e.reason())?;
        self.packets.sent += delivery.frames;
        self.packets.forwarded += delivery.frames * (delivery.path.len() as u64 - 1).saturating_sub(1);
        let idx = self.transfers.len();
        let arrival = delivery.arrival;
        self.transfers.push(Transfer {
            path: delivery.path,
            frames: delivery.frames,
            arrival,
            sender,
            receivers,
        });
        Ok((idx, arrival))
    }

    /// Settles a transfer on arrival: checks that nobody on the path went
    /// down meanwhile and charges per-frame energy.
    fn land(&mut self, idx: usize, t: f64) -> bool {
        let path = self.transfers[idx].path.clone();
        let frames = self.transfers[idx].frames;
        let arrival = self.transfers[idx].arrival;
        if let Some(n) = path.iter().find(|n| self.down_at.get(*n).is_some_and(|d| *d <= arrival)) {
            let n = *n;
            self.packets.dropped += frames;
            let dst = *path.last().expect("non-empty");
            self.emit(|| TraceRecord::at(t, n, "frame-drop").field("dst", dst).field("reason", "node-down"));
            return false;
        }
        let f = frames as f64;
        let last = path.len() - 1;
        for (i, n) in path.iter().enumerate() {
            let b = self.nodes[n].b;
            let j = b * f;
            let m = self.energy.get_mut(n).expect("node");
            if i == 0 {
                m.tx += j;
            } else if i == last {
                m.rx += j;
            } else {
                m.relay += j;
            }
            self.spend(*n, j, t);
        }
        let src = path[0];
        let dst = path[last];
        if let Some(s) = self.transfers[idx].sender {
            let b = self.nodes[&src].b;
            self.tasks.get_mut(&s).expect("task").charged_energy += b * f;
        }
        let receivers = self.transfers[idx].receivers.clone();
        // Input frames count once per receiving node, charged to the first
        // consumer there.
        if let Some(r) = receivers.first() {
            let b = self.nodes[&dst].b;
            self.tasks.get_mut(r).expect("task").charged_energy += b * f;
        }
        self.packets.delivered += frames;
        true
    }

    fn input_arrived(&mut self, q: &mut EventQueue<Ev>, task: TaskId, pred: Option<TaskId>, t: f64) -> Result<(), EngineError> {
        if !self.is_live(task) {
            return Ok(());
        }
        let node = self.placement[&task];
        self.emit(|| {
            let r = TraceRecord::at(t, node, "task-input").field("task", task);
            match pred {
                Some(p) => r.field("pred", p),
                None => r.field("pred", "-"),
            }
        });
        let w = self.waiting.get_mut(&task).expect("waiting");
        w.remove(&pred);
        if w.is_empty() {
            let m = self.tasks.get_mut(&task).expect("task");
            m.ready = Some(t);
            let i = self.index[&task];
            self.ready.entry(node).or_default().push((t, i, task));
            self.emit(|| TraceRecord::at(t, node, "task-ready").field("task", task));
            self.try_start(q, node, t)?;
        }
        Ok(())
    }

    fn try_start(&mut self, q: &mut EventQueue<Ev>, node: NodeId, t: f64) -> Result<(), EngineError> {
        let st = self.nodes[&node];
        if st.busy || st.down {
            return Ok(());
        }
        let Some(queue) = self.ready.get_mut(&node) else {
            return Ok(());
        };
        let Some(pos) = (0..queue.len()).min_by(|a, b| {
            let (x, y) = (&queue[*a], &queue[*b]);
            x.0.total_cmp(&y.0).then(x.1.cmp(&y.1))
        }) else {
            return Ok(());
        };
        let (_, _, task) = queue.remove(pos);
        if !self.is_live(task) {
            return self.try_start(q, node, t);
        }
        if st.exhausted {
            self.fail(task, "node-exhausted", t);
            return self.try_start(q, node, t);
        }
        let size = self.s.workload.task(task).expect("task").size;
        let end = t + size / st.power;
        self.nodes.get_mut(&node).expect("node").busy = true;
        self.tasks.get_mut(&task).expect("task").exec_start = Some(t);
        self.emit(|| TraceRecord::at(t, node, "task-start").field("task", task));
        q.schedule(end, Ev::TaskDone { task })?;
        Ok(())
    }

    fn task_done(&mut self, q: &mut EventQueue<Ev>, task: TaskId, t: f64) -> Result<(), EngineError> {
        let node = self.placement[&task];
        self.nodes.get_mut(&node).expect("node").busy = false;
        if !self.is_live(task) {
            return self.try_start(q, node, t);
        }
        let spec = self.s.workload.task(task).expect("task").clone();
        let st = self.nodes[&node];
        let compute = st.a * (spec.size / st.power);
        self.energy.get_mut(&node).expect("node").compute += compute;
        self.energy.get_mut(&node).expect("node").tasks_run += 1;
        self.spend(node, compute, t);
        {
            let m = self.tasks.get_mut(&task).expect("task");
            m.exec_end = Some(t);
            m.charged_energy += compute;
        }
        self.emit(|| TraceRecord::at(t, node, "task-end").field("task", task));

        let succs: Vec<TaskId> = self.succs[&task].iter().copied().filter(|s| self.is_live(*s)).collect();
        let class = self.class_of(task);
        if self.succs[&task].is_empty() {
            let src = self.s.source_node;
            match self.ship(node, src, spec.output_data, class, t, Some(task), Vec::new()) {
                Ok((idx, at)) => {
                    self.outputs_pending.insert(task, 1);
                    q.schedule(at, Ev::OutputDelivered { task, transfer: idx })?;
                }
                Err(reason) => self.fail(task, reason, t),
            }
        } else {
            let mut by_node: BTreeMap<NodeId, Vec<TaskId>> = BTreeMap::new();
            for s in succs {
                by_node.entry(self.placement[&s]).or_default().push(s);
            }
            let mut pending = 0;
            for (m, consumers) in by_node {
                if m == node {
                    for c in consumers {
                        q.schedule(t, Ev::InputArrived { task: c, pred: Some(task), transfer: None })?;
                    }
                    continue;
                }
                match self.ship(node, m, spec.output_data, class, t, Some(task), consumers.clone()) {
                    Ok((idx, at)) => {
                        pending += 1;
                        q.schedule(at, Ev::OutputDelivered { task, transfer: idx })?;
                        for c in consumers {
                            q.schedule(at, Ev::InputArrived { task: c, pred: Some(task), transfer: Some(idx) })?;
                        }
                    }
                    Err(reason) => {
                        for c in consumers {
                            self.fail(c, reason, t);
                        }
                    }
                }
            }
            if pending == 0 {
                self.tasks.get_mut(&task).expect("task").end = Some(t);
            } else {
                self.outputs_pending.insert(task, pending);
            }
        }
        self.try_start(q, node, t)
    }

    fn run(mut self, events: &[(f64, ScenarioEventKind)], release: f64) -> Result<Self, EngineError> {
        let mut q: EventQueue<Ev> = EventQueue::new(release);
        q.schedule(release, Ev::Release)?;
        if self.apply_events {
            for (at, kind) in events {
                let ev = match kind {
                    ScenarioEventKind::Disconnect(n) => Ev::Disconnect(*n),
                    ScenarioEventKind::Move(n, p) => Ev::Move(*n, *p),
                };
                q.schedule(release + at, ev)?;
            }
        }
        // Input transfers are settled before the consumer hears about them,
        // so a failed landing must cancel the consumer instead.
        let mut landed: BTreeMap<usize, bool> = BTreeMap::new();
        while let Some((t, ev)) = q.pop() {
            match ev {
                Ev::Release => {
                    let order = sort_tasks(&self.s.workload);
                    for &(p, s) in &self.s.workload.edges {
                        self.emit(|| TraceRecord::new(t, None, "edge").field("from", p).field("to", s));
                    }
                    for id in &order {
                        let pending: BTreeSet<Option<TaskId>> = if self.preds[id].is_empty() {
                            BTreeSet::from([None])
                        } else {
                            self.preds[id].iter().map(|p| Some(*p)).collect()
                        };
                        self.waiting.insert(*id, pending);
                    }
                    for (id, _) in self.unassigned() {
                        for succ in self.succs[&id].clone() {
                            self.fail(succ, "predecessor-unassigned", t);
                        }
                    }
                    for id in order {
                        if !self.preds[&id].is_empty() || !self.is_live(id) {
                            continue;
                        }
                        let node = self.placement[&id];
                        let src = self.s.source_node;
                        if node == src {
                            q.schedule(t, Ev::InputArrived { task: id, pred: None, transfer: None })?;
                            continue;
                        }
                        let input = self.s.workload.task(id).expect("task").input_data;
                        let class = self.class_of(id);
                        match self.ship(src, node, input, class, t, None, alloc::vec![id]) {
                            Ok((idx, at)) => {
                                q.schedule(at, Ev::InputArrived { task: id, pred: None, transfer: Some(idx) })?;
                            }
                            Err(reason) => self.fail(id, reason, t),
                        }
                    }
                }
                Ev::InputArrived { task, pred, transfer } => {
                    if let Some(idx) = transfer {
                        let ok = *landed.entry(idx).or_insert_with(|| self.land(idx, t));
                        if !ok {
                            self.fail(task, "node-down", t);
                            continue;
                        }
                    }
                    self.input_arrived(&mut q, task, pred, t)?;
                }
                Ev::TaskDone { task } => self.task_done(&mut q, task, t)?,
                Ev::OutputDelivered { task, transfer } => {
                    let ok = *landed.entry(transfer).or_insert_with(|| self.land(transfer, t));
                    let live = self.tasks[&task].end.is_none();
                    if !ok {
                        if live && self.succs[&task].is_empty() {
                            self.fail(task, "node-down", t);
                        }
                        continue;
                    }
                    let left = self.outputs_pending.get_mut(&task).expect("pending");
                    *left -= 1;
                    if *left == 0 && live && !matches!(self.tasks[&task].status, TaskStatus::Failed(_)) {
                        self.tasks.get_mut(&task).expect("task").end = Some(t);
                        let node = self.placement[&task];
                        self.emit(|| TraceRecord::at(t, node, "task-complete").field("task", task));
                    }
                }
                Ev::Disconnect(n) => {
                    self.down_at.insert(n, t);
                    self.nodes.get_mut(&n).expect("node").down = true;
                    self.layer.fail_node(n, t);
                    let victims: Vec<TaskId> = self
                        .placement
                        .iter()
                        .filter(|(id, node)| **node == n && self.tasks[*id].exec_end.is_none())
                        .map(|(id, _)| *id)
                        .collect();
                    for v in victims {
                        self.fail(v, "node-down", t);
                    }
                }
                Ev::Move(n, p) => {
                    self.layer.topology_mut().set_position(n, p);
                    self.emit(|| TraceRecord::at(t, n, "move").field("x", p.x).field("y", p.y));
                }
            }
        }
        Ok(self)
    }

    fn finish(self) -> (Vec<TaskMetrics>, Vec<NodeMetrics>, PacketMetrics) {
        let mut tasks: Vec<TaskMetrics> = self.tasks.into_values().collect();
        for t in &mut tasks {
            if matches!(t.status, TaskStatus::Completed) && t.end.is_none() {
                t.status = TaskStatus::Failed("incomplete");
            }
        }
        (tasks, self.energy.into_values().collect(), self.packets)
    }
}

/// Replays the workload on the source node alone, from `release`.
pub fn run_baseline(s: &Scenario, release: f64) -> Result<Vec<TaskMetrics>, RunError> {
    check_scenario(s).map_err(RunError::Invalid)?;
    let mut topo = Topology::new();
    topo.add_node(s.source_node, Position::default());
    let mut layer = RoutingLayer::new(topo, RoutingParams::from_scenario(s), release, false);
    let mut assignment = Assignment::default();
    let src = s.node(s.source_node).expect("validated");
    for t in &s.workload.tasks {
        assignment.order.push(t.id);
        assignment.placements.insert(
            t.id,
            crate::scheduler::Placement {
                node: src.id,
                estimated_execution_time: t.size / src.processing_power,
                estimated_energy: 0.0,
            },
        );
    }
    // Energy is not a constraint for the reference run.
    let mut solo = s.clone();
    for n in &mut solo.nodes {
        n.available_energy = f64::INFINITY;
    }
    let exec = Exec::new(&solo, &mut layer, &assignment, release, false).run(&[], release)?;
    Ok(exec.finish().0)
}

/// Rounds of discovery run before release.
pub fn convergence_rounds(s: &Scenario, topology: &Topology) -> u32 {
    s.params
        .convergence_rounds
        .unwrap_or_else(|| 2 * topology.diameter())
}

pub fn run_scenario(s: &Scenario, opts: RunOptions) -> Result<RunOutput, RunError> {
    check_scenario(s).map_err(RunError::Invalid)?;
    let formation = form_groups(s, opts.trace).map_err(RunError::Group)?;
    let topology = build_topology(s, &formation);
    let rounds = convergence_rounds(s, &topology);
    let mut layer = RoutingLayer::new(topology, RoutingParams::from_scenario(s), formation.end_time, opts.trace);
    layer.run_rounds(rounds)?;
    let release = layer.now();
    layer.snapshot(release);
    layer.quiesce(release);

    let tables = layer.tables();
    let src = s.source_node;
    let reach = |n: NodeId| {
        if n == src {
            Reach::Local
        } else {
            match tables.get(&src).and_then(|t| t.route(n)) {
                Some(e) => Reach::Remote(e.available_bandwidth),
                None => Reach::Unreachable,
            }
        }
    };
    let assignment = allocate(&s.workload, &s.nodes, reach, &AllocParams::from_scenario(s));
    for id in &assignment.order {
        if let Some(p) = assignment.placements.get(id) {
            layer.trace_mut().emit(|| {
                TraceRecord::at(release, p.node, "assign")
                    .field("task", id)
                    .field("est_time", p.estimated_execution_time)
                    .field("est_energy", p.estimated_energy)
            });
        }
    }
    for (id, reason) in &assignment.unassigned {
        layer.trace_mut().emit(|| {
            TraceRecord::new(release, None, "unassigned")
                .field("task", id)
                .field("reason", reason)
        });
    }

    let before = layer.stats();
    let events: Vec<(f64, ScenarioEventKind)> = s.events.iter().map(|e| (e.at, e.kind.clone())).collect();
    let exec = Exec::new(s, &mut layer, &assignment, release, true).run(&events, release)?;
    let (tasks, nodes, mut packets) = exec.finish();
    let after = layer.stats();
    packets.dropped += after.frames_dropped - before.frames_dropped;

    let baseline_tasks = run_baseline(s, release)?;
    let feasible = tasks.iter().all(|t| matches!(t.status, TaskStatus::Completed));

    let mut records: Vec<TraceRecord> = formation.trace.into_records();
    records.extend(layer.take_trace().into_records());
    records.sort_by(|a, b| a.time.total_cmp(&b.time));

    let report = MetricsReport {
        seed: s.rng_seed,
        source_node: src,
        release_time: release,
        routing_rounds: rounds,
        feasible,
        makespan: makespan(&tasks),
        baseline_makespan: makespan(&baseline_tasks),
        tasks,
        baseline_tasks,
        nodes,
        packets,
        groups: formation
            .groups
            .iter()
            .map(|g| GroupSummary {
                group_id: g.group_id,
                owner: g.owner,
                clients: g.clients.clone(),
            })
            .collect(),
        assignment,
    };
    Ok(RunOutput { report, trace: records })
}

/// Frames a payload of `kb` KB occupies.
pub fn frames_for(kb: f64, packet_size: f64) -> u64 {
    packet_count(kb, 0.0, packet_size).unwrap_or(0)
}

/// Human-readable reason for a failed run, for diagnostics.
pub fn describe_failures(report: &MetricsReport) -> Vec<String> {
    report
        .tasks
        .iter()
        .filter_map(|t| match t.status {
            TaskStatus::Completed => None,
            TaskStatus::Unassigned(r) => Some(alloc::format!("task {} unassigned ({})", t.id, r)),
            TaskStatus::Failed(r) => Some(alloc::format!("task {} failed ({})", t.id, r)),
        })
        .collect()
}

#[cfg(test)]
mod tests;
