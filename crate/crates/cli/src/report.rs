//! Report rendering: fixed 6-decimal text tables and a JSON document.

use std::fmt::Write as _;

use adhoc_cloud_core::sim::{MetricsReport, TaskMetrics, TaskStatus};
use serde::Serialize;

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"))
}

fn status(t: &TaskMetrics) -> String {
    match t.status {
        TaskStatus::Failed(reason) => format!("failed:{reason}"),
        s => s.label().to_string(),
    }
}

fn task_table(out: &mut String, tasks: &[TaskMetrics]) {
    let _ = writeln!(
        out,
        "{:>4} {:<16} {:>5} {:<22} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "id", "name", "node", "status", "ready", "start", "finish", "end", "estimated", "measured", "energy"
    );
    for t in tasks {
        let node = t.node.map_or_else(|| "-".to_string(), |n| n.to_string());
        let _ = writeln!(
            out,
            "{:>4} {:<16} {:>5} {:<22} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12.6}",
            t.id,
            t.name,
            node,
            status(t),
            opt(t.ready),
            opt(t.exec_start),
            opt(t.exec_end),
            opt(t.end),
            opt(t.estimated_time),
            opt(t.measured_time()),
            t.charged_energy
        );
    }
}

pub fn render_text(r: &MetricsReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "seed               {}", r.seed);
    let _ = writeln!(out, "source node        {}", r.source_node);
    let _ = writeln!(out, "release time       {:.6} s", r.release_time);
    let _ = writeln!(out, "routing rounds     {}", r.routing_rounds);
    let _ = writeln!(out, "feasible           {}", if r.feasible { "yes" } else { "no" });
    let _ = writeln!(out, "makespan           {:.6} s", r.makespan);
    let _ = writeln!(out, "baseline makespan  {:.6} s", r.baseline_makespan);
    let _ = writeln!(out, "improvement        {:.6} %", 100.0 * r.improvement());

    let _ = writeln!(out, "\ngroups");
    let _ = writeln!(out, "{:>4} {:>6}  clients", "id", "owner");
    for g in &r.groups {
        let clients: Vec<String> = g.clients.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "{:>4} {:>6}  {}", g.group_id, g.owner, clients.join(","));
    }

    let _ = writeln!(out, "\nassignment");
    let _ = writeln!(out, "{:>4} {:>5} {:>12} {:>12}", "task", "node", "est_time", "est_energy");
    for id in &r.assignment.order {
        match r.assignment.placements.get(id) {
            Some(p) => {
                let _ = writeln!(out, "{:>4} {:>5} {:>12.6} {:>12.6}", id, p.node, p.estimated_execution_time, p.estimated_energy);
            }
            None => {
                let reason = r.assignment.unassigned.iter().find(|(t, _)| t == id).map_or("?", |(_, why)| why.as_str());
                let _ = writeln!(out, "{:>4} {:>5} unassigned ({reason})", id, "-");
            }
        }
    }

    let _ = writeln!(out, "\ntasks");
    task_table(&mut out, &r.tasks);

    let _ = writeln!(out, "\nbaseline tasks (node {})", r.source_node);
    task_table(&mut out, &r.baseline_tasks);

    let _ = writeln!(out, "\nenergy (J)");
    let _ = writeln!(
        out,
        "{:>4} {:<16} {:>12} {:>12} {:>12} {:>12} {:>12} {:>14} {:>5}",
        "node", "name", "compute", "tx", "relay", "rx", "total", "remaining", "tasks"
    );
    for n in &r.nodes {
        let _ = writeln!(
            out,
            "{:>4} {:<16} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>14.6} {:>5}",
            n.node, n.name, n.compute, n.tx, n.relay, n.rx, n.total(), n.remaining, n.tasks_run
        );
    }

    let p = &r.packets;
    let _ = writeln!(out, "\npackets");
    let _ = writeln!(out, "sent {}  forwarded {}  dropped {}  delivered {}", p.sent, p.forwarded, p.dropped, p.delivered);
    out
}

#[derive(Serialize)]
struct TaskJson<'a> {
    id: u32,
    name: &'a str,
    node: Option<u32>,
    status: String,
    release: f64,
    ready: Option<f64>,
    start: Option<f64>,
    finish: Option<f64>,
    end: Option<f64>,
    estimated_time: Option<f64>,
    measured_time: Option<f64>,
    estimated_energy: Option<f64>,
    charged_energy: f64,
}

impl<'a> From<&'a TaskMetrics> for TaskJson<'a> {
    fn from(t: &'a TaskMetrics) -> Self {
        Self {
            id: t.id.0,
            name: &t.name,
            node: t.node.map(|n| n.0),
            status: status(t),
            release: t.release,
            ready: t.ready,
            start: t.exec_start,
            finish: t.exec_end,
            end: t.end,
            estimated_time: t.estimated_time,
            measured_time: t.measured_time(),
            estimated_energy: t.estimated_energy,
            charged_energy: t.charged_energy,
        }
    }
}

#[derive(Serialize)]
struct NodeJson<'a> {
    id: u32,
    name: &'a str,
    compute: f64,
    tx: f64,
    relay: f64,
    rx: f64,
    total: f64,
    remaining: f64,
    tasks_run: u32,
}

#[derive(Serialize)]
struct GroupJson {
    id: u32,
    owner: u32,
    clients: Vec<u32>,
}

#[derive(Serialize)]
struct PacketsJson {
    sent: u64,
    forwarded: u64,
    dropped: u64,
    delivered: u64,
}

#[derive(Serialize)]
struct AssignmentJson {
    task: u32,
    node: Option<u32>,
    reason: Option<&'static str>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    seed: u64,
    source_node: u32,
    release_time: f64,
    routing_rounds: u32,
    feasible: bool,
    makespan: f64,
    baseline_makespan: f64,
    improvement: f64,
    groups: Vec<GroupJson>,
    assignment: Vec<AssignmentJson>,
    tasks: Vec<TaskJson<'a>>,
    baseline_tasks: Vec<TaskJson<'a>>,
    nodes: Vec<NodeJson<'a>>,
    packets: PacketsJson,
}

pub fn render_json(r: &MetricsReport) -> String {
    let doc = ReportJson {
        seed: r.seed,
        source_node: r.source_node.0,
        release_time: r.release_time,
        routing_rounds: r.routing_rounds,
        feasible: r.feasible,
        makespan: r.makespan,
        baseline_makespan: r.baseline_makespan,
        improvement: r.improvement(),
        groups: r
            .groups
            .iter()
            .map(|g| GroupJson {
                id: g.group_id,
                owner: g.owner.0,
                clients: g.clients.iter().map(|c| c.0).collect(),
            })
            .collect(),
        assignment: r
            .assignment
            .order
            .iter()
            .map(|id| AssignmentJson {
                task: id.0,
                node: r.assignment.node_of(*id).map(|n| n.0),
                reason: r.assignment.unassigned.iter().find(|(t, _)| t == id).map(|(_, why)| why.as_str()),
            })
            .collect(),
        tasks: r.tasks.iter().map(TaskJson::from).collect(),
        baseline_tasks: r.baseline_tasks.iter().map(TaskJson::from).collect(),
        nodes: r
            .nodes
            .iter()
            .map(|n| NodeJson {
                id: n.node.0,
                name: &n.name,
                compute: n.compute,
                tx: n.tx,
                relay: n.relay,
                rx: n.rx,
                total: n.total(),
                remaining: n.remaining,
                tasks_run: n.tasks_run,
            })
            .collect(),
        packets: PacketsJson {
            sent: r.packets.sent,
            forwarded: r.packets.forwarded,
            dropped: r.packets.dropped,
            delivered: r.packets.delivered,
        },
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

/// Single-node run only.
pub fn render_baseline_text(source: u32, tasks: &[TaskMetrics], makespan: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "source node        {source}");
    let _ = writeln!(out, "baseline makespan  {makespan:.6} s");
    let _ = writeln!(out, "\ntasks");
    task_table(&mut out, tasks);
    out
}

#[derive(Serialize)]
struct BaselineJson<'a> {
    source_node: u32,
    baseline_makespan: f64,
    tasks: Vec<TaskJson<'a>>,
}

pub fn render_baseline_json(source: u32, tasks: &[TaskMetrics], makespan: f64) -> String {
    let doc = BaselineJson {
        source_node: source,
        baseline_makespan: makespan,
        tasks: tasks.iter().map(TaskJson::from).collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

/// One row of a size sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub input_mb: f64,
    pub baseline_makespan: f64,
    pub makespan: f64,
    /// Percent.
    pub improvement: f64,
    pub feasible: bool,
}

impl SweepRow {
    pub fn from_report(input_mb: f64, r: &MetricsReport) -> Self {
        Self {
            input_mb,
            baseline_makespan: r.baseline_makespan,
            makespan: r.makespan,
            improvement: 100.0 * r.improvement(),
            feasible: r.feasible,
        }
    }
}

pub fn render_sweep_text(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:>10} {:>14} {:>14} {:>14} {:>9}", "input_mb", "single_node_s", "cluster_s", "improvement_%", "feasible");
    for r in rows {
        let _ = writeln!(
            out,
            "{:>10.6} {:>14.6} {:>14.6} {:>14.6} {:>9}",
            r.input_mb,
            r.baseline_makespan,
            r.makespan,
            r.improvement,
            if r.feasible { "yes" } else { "no" }
        );
    }
    out
}

pub fn render_sweep_json(rows: &[SweepRow]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("sweep serializes");
    s.push('\n');
    s
}
