//! Re-verification of a written trace: ordering, causality and loop
//! freedom.

use std::collections::{BTreeMap, BTreeSet};

use adhoc_cloud_core::trace::{parse_path, TraceRecord};
use adhoc_cloud_core::NodeId;

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("line {line}: malformed trace record")]
pub struct MalformedLine {
    pub line: usize,
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceRecord>, MalformedLine> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| TraceRecord::parse(l).ok_or(MalformedLine { line: i + 1 }))
        .collect()
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct CheckSummary {
    pub records: usize,
    pub tasks_checked: usize,
    pub chains_checked: usize,
    pub paths_checked: usize,
    pub violations: Vec<String>,
}

impl CheckSummary {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_records(records: &[TraceRecord]) -> CheckSummary {
    let mut s = CheckSummary {
        records: records.len(),
        ..CheckSummary::default()
    };
    for (i, w) in records.windows(2).enumerate() {
        if w[1].time < w[0].time {
            s.violations.push(format!("record {} goes back in time ({} after {})", i + 2, w[1].time, w[0].time));
        }
    }
    check_causality(records, &mut s);
    check_snapshots(records, &mut s);
    check_paths(records, &mut s);
    s
}

fn check_causality(records: &[TraceRecord], s: &mut CheckSummary) {
    let mut preds: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.kind == "edge") {
        if let (Some(from), Some(to)) = (r.get("from"), r.get("to")) {
            preds.entry(to.to_string()).or_default().push(from.to_string());
        }
    }
    let mut ended: BTreeSet<String> = BTreeSet::new();
    let mut inputs: BTreeSet<(String, String)> = BTreeSet::new();
    for (i, r) in records.iter().enumerate() {
        let Some(task) = r.get("task") else { continue };
        match r.kind.as_str() {
            "task-end" => {
                ended.insert(task.to_string());
            }
            "task-input" => {
                inputs.insert((task.to_string(), r.get("pred").unwrap_or("-").to_string()));
            }
            "task-start" => {
                s.tasks_checked += 1;
                let list = preds.get(task).cloned().unwrap_or_default();
                if list.is_empty() && !inputs.contains(&(task.to_string(), "-".to_string())) {
                    s.violations.push(format!("record {}: task {task} started before its input arrived", i + 1));
                }
                for p in list {
                    if !ended.contains(&p) {
                        s.violations.push(format!("record {}: task {task} started before predecessor {p} finished", i + 1));
                    }
                    if !inputs.contains(&(task.to_string(), p.clone())) {
                        s.violations.push(format!("record {}: task {task} started before output of {p} arrived", i + 1));
                    }
                }
            }
            _ => {}
        }
    }
}

/// Every snapshot row's next-hop chain must reach its destination within
/// N-1 steps without revisiting a node.
fn check_snapshots(records: &[TraceRecord], s: &mut CheckSummary) {
    let mut snapshots: BTreeMap<u64, Vec<&TraceRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.kind == "route-snapshot") {
        snapshots.entry(r.time.to_bits()).or_default().push(r);
    }
    for rows in snapshots.values() {
        let mut next: BTreeMap<(NodeId, NodeId), NodeId> = BTreeMap::new();
        let mut nodes = BTreeSet::new();
        for r in rows {
            let (Some(at), Some(dst), Some(nh), Some(hops)) = (r.node, r.get("dst"), r.get("next"), r.get("hops")) else {
                s.violations.push(format!("route-snapshot at {:.6} is missing fields", r.time));
                continue;
            };
            let (Ok(dst), Ok(nh)) = (dst.parse().map(NodeId), nh.parse().map(NodeId)) else {
                s.violations.push(format!("route-snapshot at {:.6} has bad node ids", r.time));
                continue;
            };
            nodes.insert(at);
            nodes.insert(dst);
            if hops != "inf" {
                next.insert((at, dst), nh);
            }
        }
        let limit = nodes.len().saturating_sub(1);
        for &(from, dst) in next.keys() {
            s.chains_checked += 1;
            let mut cur = from;
            let mut seen = BTreeSet::from([from]);
            let mut steps = 0;
            while cur != dst {
                let Some(&n) = next.get(&(cur, dst)) else {
                    s.violations.push(format!("route chain {from}->{dst} dangles at {cur}"));
                    break;
                };
                steps += 1;
                if !seen.insert(n) || steps > limit {
                    s.violations.push(format!("route chain {from}->{dst} loops"));
                    break;
                }
                cur = n;
            }
        }
    }
}

fn check_paths(records: &[TraceRecord], s: &mut CheckSummary) {
    for (i, r) in records.iter().enumerate() {
        if r.kind != "send" && r.kind != "deliver" {
            continue;
        }
        let Some(path) = r.get("path").and_then(parse_path) else {
            s.violations.push(format!("record {}: {} without a valid path", i + 1, r.kind));
            continue;
        };
        s.paths_checked += 1;
        let distinct: BTreeSet<NodeId> = path.iter().copied().collect();
        if distinct.len() != path.len() {
            s.violations.push(format!("record {}: path revisits a node", i + 1));
        }
    }
}
