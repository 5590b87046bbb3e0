//! Two-step resource allocation: keep the nodes whose estimated execution
//! time meets the task deadline, then place the task on the one with the
//! lowest estimated energy.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::cost::{self, CostEstimate, Reach};
use crate::model::{NodeId, NodeSpec, Scenario, TaskGraph, TaskId, TaskSpec};

pub mod oracle;

pub use oracle::{oracle_allocate, OracleError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocParams {
    /// KB per packet.
    pub packet_size: f64,
    /// Nodes with `available_energy <= energy_threshold` are skipped.
    pub energy_threshold: f64,
    /// Do not charge estimated energy to nodes between tasks.
    pub static_energy: bool,
}

impl AllocParams {
    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            packet_size: s.packet_size,
            energy_threshold: s.energy_threshold,
            static_energy: s.params.static_energy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RejectReason {
    /// No node meets the deadline.
    Deadline,
    /// Some node meets the deadline but none has the energy.
    Energy,
}

impl RejectReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            RejectReason::Deadline => "deadline",
            RejectReason::Energy => "energy",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub node: NodeId,
    pub estimated_execution_time: f64,
    pub estimated_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Assignment {
    /// Tasks in the order they were considered.
    pub order: Vec<TaskId>,
    pub placements: BTreeMap<TaskId, Placement>,
    pub unassigned: Vec<(TaskId, RejectReason)>,
}

impl Assignment {
    pub fn node_of(&self, task: TaskId) -> Option<NodeId> {
        self.placements.get(&task).map(|p| p.node)
    }

    pub fn total_energy(&self) -> f64 {
        self.order
            .iter()
            .filter_map(|t| self.placements.get(t))
            .map(|p| p.estimated_energy)
            .sum()
    }

    pub fn is_complete(&self) -> bool {
        self.unassigned.is_empty()
    }
}

/// Topological order; among tasks whose predecessors are all placed, the
/// earliest deadline goes first, ties by ascending id. Edges on a cycle are
/// never released, so cyclic input yields a partial order.
pub fn sort_tasks(graph: &TaskGraph) -> Vec<TaskId> {
    let mut indegree: BTreeMap<TaskId, usize> = graph.tasks.iter().map(|t| (t.id, 0)).collect();
    let edges: BTreeSet<(TaskId, TaskId)> = graph.edges.iter().copied().collect();
    for &(_, s) in &edges {
        if let Some(d) = indegree.get_mut(&s) {
            *d += 1;
        }
    }
    let deadline: BTreeMap<TaskId, f64> = graph.tasks.iter().map(|t| (t.id, t.deadline)).collect();
    let key = |id: TaskId| (deadline[&id], id);

    let mut ready: Vec<TaskId> = indegree.iter().filter(|(_, d)| **d == 0).map(|(id, _)| *id).collect();
    let mut order = Vec::with_capacity(graph.tasks.len());
    while !ready.is_empty() {
        let (idx, _) = ready
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                let (da, ia) = key(**a);
                let (db, ib) = key(**b);
                da.total_cmp(&db).then(ia.cmp(&ib))
            })
            .expect("non-empty");
        let id = ready.swap_remove(idx);
        order.push(id);
        for &(_, s) in edges.range((id, TaskId(0))..=(id, TaskId(u32::MAX))) {
            if let Some(d) = indegree.get_mut(&s) {
                *d -= 1;
                if *d == 0 {
                    ready.push(s);
                }
            }
        }
    }
    order
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    node: NodeId,
    estimate: CostEstimate,
}

/// Lower energy, then lower execution time, then lower node id.
fn better(a: &Candidate, b: &Candidate) -> bool {
    let ord = a
        .estimate
        .energy
        .partial_cmp(&b.estimate.energy)
        .unwrap_or(Ordering::Equal)
        .then(
            a.estimate
                .execution_time
                .partial_cmp(&b.estimate.execution_time)
                .unwrap_or(Ordering::Equal),
        )
        .then(a.node.cmp(&b.node));
    ord == Ordering::Less
}

enum Screen {
    Feasible(Vec<Candidate>),
    Rejected(RejectReason),
}

fn screen<F>(task: &TaskSpec, nodes: &[NodeSpec], reach_of: &F, packet_size: f64, energy_threshold: f64) -> Screen
where
    F: Fn(NodeId) -> Reach,
{
    let mut any_on_time = false;
    let mut feasible = Vec::new();
    for node in nodes {
        let Ok(estimate) = cost::estimate(task, node, reach_of(node.id), packet_size) else {
            continue;
        };
        if estimate.execution_time > task.deadline {
            continue;
        }
        any_on_time = true;
        if node.available_energy > energy_threshold && node.available_energy >= estimate.energy {
            feasible.push(Candidate { node: node.id, estimate });
        }
    }
    if !feasible.is_empty() {
        Screen::Feasible(feasible)
    } else if any_on_time {
        Screen::Rejected(RejectReason::Energy)
    } else {
        Screen::Rejected(RejectReason::Deadline)
    }
}

/// Nodes that can finish `task` before its deadline with energy to spare,
/// in input order.
pub fn feasible_nodes<F>(task: &TaskSpec, nodes: &[NodeSpec], reach_of: F, packet_size: f64, energy_threshold: f64) -> Vec<NodeId>
where
    F: Fn(NodeId) -> Reach,
{
    match screen(task, nodes, &reach_of, packet_size, energy_threshold) {
        Screen::Feasible(c) => c.into_iter().map(|c| c.node).collect(),
        Screen::Rejected(_) => Vec::new(),
    }
}

/// Greedy allocation in [`sort_tasks`] order. Partial results are reported
/// through [`Assignment::unassigned`].
pub fn allocate<F>(graph: &TaskGraph, nodes: &[NodeSpec], reach_of: F, params: &AllocParams) -> Assignment
where
    F: Fn(NodeId) -> Reach,
{
    let mut pool: Vec<NodeSpec> = nodes.to_vec();
    let mut assignment = Assignment::default();
    for id in sort_tasks(graph) {
        let Some(task) = graph.task(id) else { continue };
        assignment.order.push(id);
        match screen(task, &pool, &reach_of, params.packet_size, params.energy_threshold) {
            Screen::Feasible(candidates) => {
                let mut best = candidates[0];
                for c in &candidates[1..] {
                    if better(c, &best) {
                        best = *c;
                    }
                }
                if !params.static_energy {
                    if let Some(n) = pool.iter_mut().find(|n| n.id == best.node) {
                        n.available_energy = (n.available_energy - best.estimate.energy).max(0.0);
                    }
                }
                assignment.placements.insert(
                    id,
                    Placement {
                        node: best.node,
                        estimated_execution_time: best.estimate.execution_time,
                        estimated_energy: best.estimate.energy,
                    },
                );
            }
            Screen::Rejected(reason) => assignment.unassigned.push((id, reason)),
        }
    }
    assignment
}

#[cfg(test)]
mod tests;
