//! Domain types shared by every other module.
//!
//! Units used throughout the crate:
//!
//! | quantity            | unit                                  |
//! |---------------------|---------------------------------------|
//! | work / task size    | mega-instructions (MI)                |
//! | processing power    | MI per second                         |
//! | data sizes          | kilobytes (1 MB = 1000 KB, 1 KB = 8 kb)|
//! | bandwidth           | megabits per second                   |
//! | energy              | joules                                |
//! | time                | seconds                               |
//! | positions, range    | meters                                |

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Identifier of a mobile device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Identifier of a task inside a workload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaskId(pub u32);

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }

    /// Squared euclidean distance, exact for the common integer grids.
    pub fn distance_sq(&self, other: &Position) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// A mobile device taking part in the cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub id: NodeId,
    /// Human-readable label, only used in reports.
    pub name: String,
    /// MI per second.
    pub processing_power: f64,
    /// Joules left in the battery.
    pub available_energy: f64,
    /// Joules per second of computation.
    pub proc_energy_rate: f64,
    /// Joules per packet sent or received.
    pub tx_energy_per_packet: f64,
    pub position: Position,
    /// Meters.
    pub radio_range: f64,
    /// Group owner intent, 0..=15.
    pub go_intent: u8,
}

pub const MAX_GO_INTENT: u8 = 15;

/// A unit of work in the workload graph.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub id: TaskId,
    pub name: String,
    /// MI.
    pub size: f64,
    /// KB consumed.
    pub input_data: f64,
    /// KB produced.
    pub output_data: f64,
    /// Seconds from release.
    pub deadline: f64,
    pub real_time: bool,
}

/// Tasks plus their precedence edges `(predecessor, successor)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TaskGraph {
    pub tasks: Vec<TaskSpec>,
    pub edges: Vec<(TaskId, TaskId)>,
}

impl TaskGraph {
    pub fn new(tasks: Vec<TaskSpec>, edges: Vec<(TaskId, TaskId)>) -> Self {
        Self { tasks, edges }
    }

    pub fn task(&self, id: TaskId) -> Option<&TaskSpec> {
        self.tasks.iter().find(|t| t.id == id)
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn predecessors(&self, id: TaskId) -> Vec<TaskId> {
        let mut preds: Vec<TaskId> = self
            .edges
            .iter()
            .filter(|(_, s)| *s == id)
            .map(|(p, _)| *p)
            .collect();
        preds.sort_unstable();
        preds.dedup();
        preds
    }

    pub fn successors(&self, id: TaskId) -> Vec<TaskId> {
        let mut succs: Vec<TaskId> = self
            .edges
            .iter()
            .filter(|(p, _)| *p == id)
            .map(|(_, s)| *s)
            .collect();
        succs.sort_unstable();
        succs.dedup();
        succs
    }

    /// Some topological order (Kahn, smallest id first), or `None` when the
    /// edges contain a cycle or reference unknown tasks.
    pub fn topological_order(&self) -> Option<Vec<TaskId>> {
        let ids: BTreeSet<TaskId> = self.tasks.iter().map(|t| t.id).collect();
        let mut indegree: BTreeMap<TaskId, usize> = ids.iter().map(|id| (*id, 0)).collect();
        let mut edges: BTreeSet<(TaskId, TaskId)> = BTreeSet::new();
        for &(p, s) in &self.edges {
            if !ids.contains(&p) || !ids.contains(&s) {
                return None;
            }
            if edges.insert((p, s)) {
                *indegree.get_mut(&s)? += 1;
            }
        }
        let mut ready: BTreeSet<TaskId> = indegree
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(id, _)| *id)
            .collect();
        let mut order = Vec::with_capacity(ids.len());
        while let Some(id) = ready.pop_first() {
            order.push(id);
            for &(_, s) in edges.range((id, TaskId(0))..=(id, TaskId(u32::MAX))) {
                let d = indegree.get_mut(&s)?;
                *d -= 1;
                if *d == 0 {
                    ready.insert(s);
                }
            }
        }
        (order.len() == ids.len()).then_some(order)
    }
}

/// Data-link parameters between two devices.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub endpoints: (NodeId, NodeId),
    /// Megabits per second.
    pub bandwidth: f64,
    /// Seconds per hop.
    pub latency: f64,
}

/// Explicit group assignment. Bridge nodes may appear in two groups.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpec {
    pub owner: NodeId,
    pub clients: Vec<NodeId>,
}

/// Something that happens to the network after the workload is released.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioEventKind {
    /// The device leaves: its links disappear and it stops computing.
    Disconnect(NodeId),
    /// Position update hook; links are not re-formed.
    Move(NodeId, Position),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioEvent {
    /// Seconds after workload release.
    pub at: f64,
    pub kind: ScenarioEventKind,
}

/// Simulation knobs with their defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    /// Seconds between discovery broadcasts.
    pub discovery_period: f64,
    /// Hop budget of data frames.
    pub ttl: u32,
    /// Silence after which a neighbor is considered gone; `None` means
    /// three discovery periods.
    pub entry_timeout: Option<f64>,
    /// Fixed duration of the scan phase before find.
    pub scan_duration: f64,
    /// Upper bound on the find phase of automatic group formation.
    pub formation_window: f64,
    /// Bandwidth of links without an explicit [`LinkSpec`].
    pub default_bandwidth: f64,
    /// Per-hop latency of links without an explicit [`LinkSpec`].
    pub default_latency: f64,
    /// Exponent of the transmission-energy proxy used for bulk routes.
    pub path_loss_exponent: f64,
    /// Allocate without decrementing node energy between tasks.
    pub static_energy: bool,
    /// Discovery rounds run before the workload is released; `None` means
    /// twice the network diameter.
    pub convergence_rounds: Option<u32>,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            discovery_period: 1.0,
            ttl: 16,
            entry_timeout: None,
            scan_duration: 0.125,
            formation_window: 10.0,
            default_bandwidth: 250.0,
            default_latency: 0.002,
            path_loss_exponent: 2.0,
            static_energy: false,
            convergence_rounds: None,
        }
    }
}

impl SimParams {
    pub fn entry_timeout(&self) -> f64 {
        self.entry_timeout.unwrap_or(3.0 * self.discovery_period)
    }
}

/// Full experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub nodes: Vec<NodeSpec>,
    pub links: Vec<LinkSpec>,
    pub groups: Option<Vec<GroupSpec>>,
    pub workload: TaskGraph,
    /// Device holding the input data; results return here.
    pub source_node: NodeId,
    /// KB per packet.
    pub packet_size: f64,
    /// Joules; nodes at or below it receive no work.
    pub energy_threshold: f64,
    pub rng_seed: u64,
    pub params: SimParams,
    pub events: Vec<ScenarioEvent>,
}

impl Scenario {
    pub fn node(&self, id: NodeId) -> Option<&NodeSpec> {
        self.nodes.iter().find(|n| n.id == id)
    }
}

/// First violated invariant, with the path of the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationError {
    pub path: String,
    pub message: String,
}

impl ValidationError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

type Check = Result<(), ValidationError>;

fn finite(path: &str, v: f64) -> Check {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ValidationError::new(path, "must be finite"))
    }
}

fn positive(path: &str, v: f64) -> Check {
    finite(path, v)?;
    if v > 0.0 {
        Ok(())
    } else {
        Err(ValidationError::new(path, "must be > 0"))
    }
}

fn non_negative(path: &str, v: f64) -> Check {
    finite(path, v)?;
    if v >= 0.0 {
        Ok(())
    } else {
        Err(ValidationError::new(path, "must be >= 0"))
    }
}

impl NodeSpec {
    pub fn validate(&self) -> Check {
        self.validate_at("node")
    }

    fn validate_at(&self, at: &str) -> Check {
        positive(&format!("{at}.processing_power"), self.processing_power)?;
        non_negative(&format!("{at}.available_energy"), self.available_energy)?;
        non_negative(&format!("{at}.proc_energy_rate"), self.proc_energy_rate)?;
        non_negative(
            &format!("{at}.tx_energy_per_packet"),
            self.tx_energy_per_packet,
        )?;
        finite(&format!("{at}.position.x"), self.position.x)?;
        finite(&format!("{at}.position.y"), self.position.y)?;
        positive(&format!("{at}.radio_range"), self.radio_range)?;
        if self.go_intent > MAX_GO_INTENT {
            return Err(ValidationError::new(
                format!("{at}.go_intent"),
                "must be in 0..=15",
            ));
        }
        Ok(())
    }
}

impl TaskSpec {
    pub fn validate(&self) -> Check {
        self.validate_at("task")
    }

    fn validate_at(&self, at: &str) -> Check {
        positive(&format!("{at}.size"), self.size)?;
        non_negative(&format!("{at}.input_data"), self.input_data)?;
        non_negative(&format!("{at}.output_data"), self.output_data)?;
        positive(&format!("{at}.deadline"), self.deadline)
    }
}

impl TaskGraph {
    pub fn validate(&self) -> Check {
        self.validate_at("workload")
    }

    fn validate_at(&self, at: &str) -> Check {
        let mut ids = BTreeSet::new();
        for (i, t) in self.tasks.iter().enumerate() {
            let path = format!("{at}.tasks[{i}]");
            if !ids.insert(t.id) {
                return Err(ValidationError::new(
                    format!("{path}.id"),
                    format!("duplicate task id {}", t.id),
                ));
            }
            t.validate_at(&path)?;
        }
        for (i, (p, s)) in self.edges.iter().enumerate() {
            let path = format!("{at}.edges[{i}]");
            for end in [p, s] {
                if !ids.contains(end) {
                    return Err(ValidationError::new(path, format!("unknown task {end}")));
                }
            }
            if p == s {
                return Err(ValidationError::new(path, "cycle detected"));
            }
        }
        if self.topological_order().is_none() {
            return Err(ValidationError::new(format!("{at}.edges"), "cycle detected"));
        }
        Ok(())
    }
}

impl LinkSpec {
    fn validate_at(&self, at: &str) -> Check {
        if self.endpoints.0 == self.endpoints.1 {
            return Err(ValidationError::new(
                format!("{at}.endpoints"),
                "endpoints must be distinct",
            ));
        }
        positive(&format!("{at}.bandwidth"), self.bandwidth)?;
        non_negative(&format!("{at}.latency"), self.latency)
    }
}

impl SimParams {
    fn validate_at(&self, at: &str) -> Check {
        positive(&format!("{at}.discovery_period"), self.discovery_period)?;
        if self.ttl == 0 {
            return Err(ValidationError::new(format!("{at}.ttl"), "must be >= 1"));
        }
        if let Some(t) = self.entry_timeout {
            positive(&format!("{at}.entry_timeout"), t)?;
        }
        non_negative(&format!("{at}.scan_duration"), self.scan_duration)?;
        positive(&format!("{at}.formation_window"), self.formation_window)?;
        positive(&format!("{at}.default_bandwidth"), self.default_bandwidth)?;
        non_negative(&format!("{at}.default_latency"), self.default_latency)?;
        positive(&format!("{at}.path_loss_exponent"), self.path_loss_exponent)
    }
}

/// Checks every type invariant of `s`, returning it unchanged on success.
pub fn validate_scenario(s: Scenario) -> Result<Scenario, ValidationError> {
    check_scenario(&s)?;
    Ok(s)
}

pub fn check_scenario(s: &Scenario) -> Check {
    if s.nodes.is_empty() {
        return Err(ValidationError::new("nodes", "nodes empty"));
    }
    let mut ids = BTreeSet::new();
    for (i, n) in s.nodes.iter().enumerate() {
        let path = format!("nodes[{i}]");
        if !ids.insert(n.id) {
            return Err(ValidationError::new(
                format!("{path}.id"),
                format!("duplicate node id {}", n.id),
            ));
        }
        n.validate_at(&path)?;
    }
    for (i, l) in s.links.iter().enumerate() {
        let path = format!("links[{i}]");
        for end in [l.endpoints.0, l.endpoints.1] {
            if !ids.contains(&end) {
                return Err(ValidationError::new(
                    format!("{path}.endpoints"),
                    format!("unknown node {end}"),
                ));
            }
        }
        l.validate_at(&path)?;
    }
    if let Some(groups) = &s.groups {
        let mut membership: BTreeMap<NodeId, usize> = BTreeMap::new();
        for (i, g) in groups.iter().enumerate() {
            let path = format!("groups[{i}]");
            if !ids.contains(&g.owner) {
                return Err(ValidationError::new(
                    format!("{path}.owner"),
                    format!("unknown node {}", g.owner),
                ));
            }
            let mut seen = BTreeSet::new();
            for (j, c) in g.clients.iter().enumerate() {
                let cpath = format!("{path}.clients[{j}]");
                if !ids.contains(c) {
                    return Err(ValidationError::new(cpath, format!("unknown node {c}")));
                }
                if *c == g.owner {
                    return Err(ValidationError::new(cpath, "owner listed as client"));
                }
                if !seen.insert(*c) {
                    return Err(ValidationError::new(cpath, format!("duplicate client {c}")));
                }
            }
            for member in core::iter::once(g.owner).chain(g.clients.iter().copied()) {
                let count = membership.entry(member).or_insert(0);
                *count += 1;
                if *count > 2 {
                    return Err(ValidationError::new(
                        path.clone(),
                        format!("node {member} in more than two groups"),
                    ));
                }
            }
        }
    }
    s.workload.validate_at("workload")?;
    if !ids.contains(&s.source_node) {
        return Err(ValidationError::new(
            "source_node",
            format!("unknown node {}", s.source_node),
        ));
    }
    positive("packet_size", s.packet_size)?;
    non_negative("energy_threshold", s.energy_threshold)?;
    s.params.validate_at("params")?;
    for (i, e) in s.events.iter().enumerate() {
        let path = format!("events[{i}]");
        non_negative(&format!("{path}.at"), e.at)?;
        let node = match &e.kind {
            ScenarioEventKind::Disconnect(n) => *n,
            ScenarioEventKind::Move(n, p) => {
                finite(&format!("{path}.position.x"), p.x)?;
                finite(&format!("{path}.position.y"), p.y)?;
                *n
            }
        };
        if !ids.contains(&node) {
            return Err(ValidationError::new(
                format!("{path}.node"),
                format!("unknown node {node}"),
            ));
        }
    }
    Ok(())
}

/// Convenience constructor used heavily by tests and the workload builder.
impl TaskSpec {
    pub fn new(id: u32, name: &str, size: f64, input: f64, output: f64, deadline: f64) -> Self {
        Self {
            id: TaskId(id),
            name: name.to_string(),
            size,
            input_data: input,
            output_data: output,
            deadline,
            real_time: true,
        }
    }
}

impl NodeSpec {
    /// A node with zero energy coefficients, plenty of battery and default
    /// radio parameters.
    pub fn basic(id: u32, processing_power: f64) -> Self {
        Self {
            id: NodeId(id),
            name: format!("node-{id}"),
            processing_power,
            available_energy: 1.0e6,
            proc_energy_rate: 0.0,
            tx_energy_per_packet: 0.0,
            position: Position::default(),
            radio_range: 200.0,
            go_intent: 7,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    pub(crate) fn three_device_nodes() -> Vec<NodeSpec> {
        // Galaxy S7: 4 x 2.4 GHz + 4 x 1.6 GHz, S2: 2 x 1.2 GHz, Vega LTE: 2 x 1.5 GHz.
        vec![
            NodeSpec {
                name: "galaxy-s7".into(),
                ..NodeSpec::basic(1, 16_000.0)
            },
            NodeSpec {
                name: "galaxy-s2".into(),
                ..NodeSpec::basic(2, 2_400.0)
            },
            NodeSpec {
                name: "vega-lte".into(),
                ..NodeSpec::basic(3, 3_000.0)
            },
        ]
    }

    fn scenario(nodes: Vec<NodeSpec>, workload: TaskGraph) -> Scenario {
        Scenario {
            nodes,
            links: vec![],
            groups: None,
            workload,
            source_node: NodeId(1),
            packet_size: 1.5,
            energy_threshold: 0.0,
            rng_seed: 1,
            params: SimParams::default(),
            events: vec![],
        }
    }

    fn pipeline() -> TaskGraph {
        TaskGraph::new(
            vec![
                TaskSpec::new(1, "detection", 100.0, 1000.0, 500.0, 10.0),
                TaskSpec::new(2, "tracking", 200.0, 500.0, 10.0, 10.0),
                TaskSpec::new(3, "classification", 50.0, 500.0, 5.0, 10.0),
            ],
            vec![(TaskId(1), TaskId(2)), (TaskId(2), TaskId(3))],
        )
    }

    #[test]
    fn empty_node_list_is_rejected() {
        let err = validate_scenario(scenario(vec![], pipeline())).unwrap_err();
        assert_eq!(err.message, "nodes empty");
    }

    #[test]
    fn three_device_roster_with_pipeline_is_accepted() {
        let s = scenario(three_device_nodes(), pipeline());
        assert_eq!(validate_scenario(s.clone()).unwrap(), s);
    }

    #[test]
    fn two_cycle_is_rejected() {
        let mut g = pipeline();
        g.edges = vec![(TaskId(1), TaskId(2)), (TaskId(2), TaskId(1))];
        let err = validate_scenario(scenario(three_device_nodes(), g)).unwrap_err();
        assert_eq!(err.message, "cycle detected");
        assert_eq!(err.path, "workload.edges");
    }

    #[test]
    fn error_carries_field_path() {
        let mut nodes = three_device_nodes();
        nodes[1].radio_range = 0.0;
        let err = validate_scenario(scenario(nodes, pipeline())).unwrap_err();
        assert_eq!(err.path, "nodes[1].radio_range");
    }

    #[test]
    fn node_in_three_groups_is_rejected() {
        let mut s = scenario(
            vec![
                NodeSpec::basic(1, 1.0),
                NodeSpec::basic(2, 1.0),
                NodeSpec::basic(3, 1.0),
                NodeSpec::basic(4, 1.0),
            ],
            TaskGraph::default(),
        );
        s.groups = Some(vec![
            GroupSpec { owner: NodeId(1), clients: vec![NodeId(4)] },
            GroupSpec { owner: NodeId(2), clients: vec![NodeId(4)] },
            GroupSpec { owner: NodeId(3), clients: vec![NodeId(4)] },
        ]);
        assert!(check_scenario(&s).is_err());
    }

    /// Independent cycle detector: depth-first search with colours.
    fn has_cycle(n: u32, edges: &[(u32, u32)]) -> bool {
        fn visit(u: u32, edges: &[(u32, u32)], colour: &mut Vec<u8>) -> bool {
            colour[u as usize] = 1;
            for &(a, b) in edges {
                if a == u {
                    let c = colour[b as usize];
                    match c {
                        1 => return true,
                        0 if visit(b, edges, colour) => return true,
                        _ => {}
                    }
                }
            }
            colour[u as usize] = 2;
            false
        }
        let mut colour = vec![0u8; n as usize];
        (0..n).any(|u| colour[u as usize] == 0 && visit(u, edges, &mut colour))
    }

    proptest! {
        #[test]
        fn topological_order_exists_iff_acyclic(
            n in 1u32..8,
            raw in proptest::collection::vec((0u32..8, 0u32..8), 0..14),
        ) {
            let edges: Vec<(u32, u32)> = raw.into_iter().map(|(a, b)| (a % n, b % n)).collect();
            let graph = TaskGraph::new(
                (0..n).map(|i| TaskSpec::new(i, "t", 1.0, 0.0, 0.0, 1.0)).collect(),
                edges.iter().map(|&(a, b)| (TaskId(a), TaskId(b))).collect(),
            );
            let cyclic = has_cycle(n, &edges);
            prop_assert_eq!(graph.validate().is_ok(), !cyclic);
            prop_assert_eq!(graph.topological_order().is_some(), !cyclic);
            if let Some(order) = graph.topological_order() {
                let pos = |id: TaskId| order.iter().position(|x| *x == id).unwrap();
                for &(a, b) in &graph.edges {
                    prop_assert!(pos(a) < pos(b));
                }
            }
        }

        #[test]
        fn node_rejected_exactly_when_invariant_broken(
            power in -2.0f64..2.0,
            energy in -2.0f64..2.0,
            a in -2.0f64..2.0,
            b in -2.0f64..2.0,
            range in -2.0f64..2.0,
            intent in 0u8..20,
        ) {
            let node = NodeSpec {
                processing_power: power,
                available_energy: energy,
                proc_energy_rate: a,
                tx_energy_per_packet: b,
                radio_range: range,
                go_intent: intent,
                ..NodeSpec::basic(1, 1.0)
            };
            let ok = power > 0.0 && energy >= 0.0 && a >= 0.0 && b >= 0.0 && range > 0.0 && intent <= 15;
            prop_assert_eq!(node.validate().is_ok(), ok);
        }

        #[test]
        fn task_rejected_exactly_when_invariant_broken(
            size in -2.0f64..2.0,
            input in -2.0f64..2.0,
            output in -2.0f64..2.0,
            deadline in -2.0f64..2.0,
        ) {
            let task = TaskSpec::new(1, "t", size, input, output, deadline);
            let ok = size > 0.0 && input >= 0.0 && output >= 0.0 && deadline > 0.0;
            prop_assert_eq!(task.validate().is_ok(), ok);
        }

        #[test]
        fn link_rejected_exactly_when_invariant_broken(
            a in 1u32..3, b in 1u32..3, bw in -2.0f64..2.0, lat in -2.0f64..2.0,
        ) {
            let mut s = scenario(vec![NodeSpec::basic(1, 1.0), NodeSpec::basic(2, 1.0)], TaskGraph::default());
            s.links = vec![LinkSpec { endpoints: (NodeId(a), NodeId(b)), bandwidth: bw, latency: lat }];
            let ok = a != b && bw > 0.0 && lat >= 0.0;
            prop_assert_eq!(check_scenario(&s).is_ok(), ok);
        }
    }
}
