use alloc::string::String;
use alloc::vec::Vec;

use crate::model::{NodeId, TaskId};
use crate::scheduler::{Assignment, RejectReason};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskStatus {
    Completed,
    Unassigned(RejectReason),
    /// Lost to a disconnect, an exhausted battery or a failed predecessor.
    Failed(&'static str),
}

impl TaskStatus {
    pub fn label(&self) -> &'static str {
        match self {
            TaskStatus::Completed => "completed",
            TaskStatus::Unassigned(RejectReason::Deadline) => "unassigned-deadline",
            TaskStatus::Unassigned(RejectReason::Energy) => "unassigned-energy",
            TaskStatus::Failed(_) => "failed",
        }
    }
}

/// Timeline and cost of one task. Times are absolute simulation seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskMetrics {
    pub id: TaskId,
    pub name: String,
    pub node: Option<NodeId>,
    pub status: TaskStatus,
    pub release: f64,
    /// All inputs present on the executing node.
    pub ready: Option<f64>,
    pub exec_start: Option<f64>,
    pub exec_end: Option<f64>,
    /// Output delivered to every consumer.
    pub end: Option<f64>,
    pub estimated_time: Option<f64>,
    pub estimated_energy: Option<f64>,
    /// Compute energy plus the executing node's per-frame cost for the
    /// task's received inputs and sent outputs.
    pub charged_energy: f64,
}

impl TaskMetrics {
    pub fn measured_time(&self) -> Option<f64> {
        self.end.map(|e| e - self.release)
    }
}

/// Joules spent per node, split by cause.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMetrics {
    pub node: NodeId,
    pub name: String,
    pub compute: f64,
    pub tx: f64,
    pub relay: f64,
    pub rx: f64,
    pub remaining: f64,
    pub tasks_run: u32,
}

impl NodeMetrics {
    pub fn total(&self) -> f64 {
        self.compute + self.tx + self.relay + self.rx
    }
}

/// Frame counters over the execution phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PacketMetrics {
    pub sent: u64,
    pub forwarded: u64,
    pub dropped: u64,
    pub delivered: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub group_id: u32,
    pub owner: NodeId,
    pub clients: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub seed: u64,
    pub source_node: NodeId,
    /// Time the workload was released, after formation and convergence.
    pub release_time: f64,
    pub routing_rounds: u32,
    pub feasible: bool,
    pub makespan: f64,
    pub baseline_makespan: f64,
    pub tasks: Vec<TaskMetrics>,
    pub baseline_tasks: Vec<TaskMetrics>,
    pub nodes: Vec<NodeMetrics>,
    pub packets: PacketMetrics,
    pub groups: Vec<GroupSummary>,
    pub assignment: Assignment,
}

impl MetricsReport {
    /// Fractional makespan reduction against the single-node baseline.
    pub fn improvement(&self) -> f64 {
        if self.baseline_makespan > 0.0 {
            1.0 - self.makespan / self.baseline_makespan
        } else {
            0.0
        }
    }

    pub fn task(&self, id: TaskId) -> Option<&TaskMetrics> {
        self.tasks.iter().find(|t| t.id == id)
    }
}

/// Makespan over the tasks that produced an end time.
pub fn makespan(tasks: &[TaskMetrics]) -> f64 {
    let start = tasks.iter().map(|t| t.release).fold(f64::INFINITY, f64::min);
    let end = tasks.iter().filter_map(|t| t.end).fold(f64::NEG_INFINITY, f64::max);
    if end.is_finite() && start.is_finite() {
        end - start
    } else {
        0.0
    }
}
