//! Brute-force reference for [`allocate`](super::allocate).
//!
//! Written without touching the cost module or the production sort so the
//! two can be compared instance by instance.

use alloc::vec::Vec;
use core::fmt;

use super::{AllocParams, Assignment, Placement, RejectReason};
use crate::cost::Reach;
use crate::model::{NodeId, NodeSpec, TaskGraph, TaskId};

pub const MAX_TASKS: usize = 8;
pub const MAX_NODES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleError {
    TooLarge { tasks: usize, nodes: usize },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::TooLarge { tasks, nodes } => write!(
                f,
                "instance too large for the oracle: {tasks} tasks, {nodes} nodes (max {MAX_TASKS}, {MAX_NODES})"
            ),
        }
    }
}

fn packets(kb: f64, pkt: f64) -> f64 {
    let q = kb / pkt;
    let r = libm::round(q);
    if libm::fabs(q - r) <= 1e-9 * q.max(1.0) {
        r
    } else {
        libm::ceil(q)
    }
}

pub fn oracle_allocate<F>(graph: &TaskGraph, nodes: &[NodeSpec], reach_of: F, params: &AllocParams) -> Result<Assignment, OracleError>
where
    F: Fn(NodeId) -> Reach,
{
    if graph.tasks.len() > MAX_TASKS || nodes.len() > MAX_NODES {
        return Err(OracleError::TooLarge {
            tasks: graph.tasks.len(),
            nodes: nodes.len(),
        });
    }

    let mut energy: Vec<f64> = nodes.iter().map(|n| n.available_energy).collect();
    let mut done: Vec<TaskId> = Vec::new();
    let mut out = Assignment::default();

    loop {
        // Every task not yet handled whose predecessors all are; take the
        // smallest (deadline, id).
        let mut next: Option<usize> = None;
        for (i, t) in graph.tasks.iter().enumerate() {
            if done.contains(&t.id) {
                continue;
            }
            let blocked = graph
                .edges
                .iter()
                .any(|&(p, s)| s == t.id && !done.contains(&p));
            if blocked {
                continue;
            }
            next = match next {
                None => Some(i),
                Some(j) => {
                    let u = &graph.tasks[j];
                    if t.deadline < u.deadline || (t.deadline == u.deadline && t.id < u.id) {
                        Some(i)
                    } else {
                        Some(j)
                    }
                }
            };
        }
        let Some(i) = next else { break };
        let task = &graph.tasks[i];
        done.push(task.id);
        out.order.push(task.id);

        let mut best: Option<(usize, f64, f64)> = None;
        let mut on_time = false;
        for (k, node) in nodes.iter().enumerate() {
            let dtt = match reach_of(node.id) {
                Reach::Local => 0.0,
                Reach::Remote(bw) => {
                    task.input_data * 8.0 / 1000.0 / bw + task.output_data * 8.0 / 1000.0 / bw
                }
                Reach::Unreachable => f64::INFINITY,
            };
            let compute = task.size / node.processing_power;
            let time = compute + dtt;
            let pkts = packets(task.input_data, params.packet_size)
                + packets(task.output_data, params.packet_size);
            let joules = node.proc_energy_rate * compute + node.tx_energy_per_packet * pkts;
            if !(time <= task.deadline) {
                continue;
            }
            on_time = true;
            if !(energy[k] > params.energy_threshold && energy[k] >= joules) {
                continue;
            }
            let wins = match best {
                None => true,
                Some((b, be, bt)) => {
                    joules < be || (joules == be && (time < bt || (time == bt && node.id < nodes[b].id)))
                }
            };
            if wins {
                best = Some((k, joules, time));
            }
        }

        match best {
            Some((k, joules, time)) => {
                if !params.static_energy {
                    energy[k] = (energy[k] - joules).max(0.0);
                }
                out.placements.insert(
                    task.id,
                    Placement {
                        node: nodes[k].id,
                        estimated_execution_time: time,
                        estimated_energy: joules,
                    },
                );
            }
            None => out.unassigned.push((
                task.id,
                if on_time {
                    RejectReason::Energy
                } else {
                    RejectReason::Deadline
                },
            )),
        }
    }
    Ok(out)
}
