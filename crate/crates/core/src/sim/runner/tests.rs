use super::*;
use crate::model::{NodeSpec, ScenarioEvent, SimParams, TaskGraph, TaskSpec};
use alloc::format;
use alloc::vec;
use proptest::prelude::*;

fn scenario(nodes: Vec<NodeSpec>, workload: TaskGraph) -> Scenario {
    Scenario {
        source_node: nodes[0].id,
        nodes,
        links: Vec::new(),
        groups: None,
        workload,
        packet_size: 1.5,
        energy_threshold: 0.0,
        rng_seed: 7,
        params: SimParams::default(),
        events: Vec::new(),
    }
}

fn placed(n: NodeSpec, x: f64, intent: u8) -> NodeSpec {
    NodeSpec {
        position: Position { x, y: 0.0 },
        go_intent: intent,
        ..n
    }
}

fn pipeline() -> TaskGraph {
    TaskGraph::new(
        vec![
            TaskSpec::new(1, "a", 3000.0, 3000.0, 600.0, 50.0),
            TaskSpec::new(2, "b", 8000.0, 600.0, 60.0, 50.0),
            TaskSpec::new(3, "c", 500.0, 600.0, 30.0, 50.0),
        ],
        vec![(TaskId(1), TaskId(2)), (TaskId(1), TaskId(3))],
    )
}

fn three_nodes() -> Vec<NodeSpec> {
    vec![
        placed(NodeSpec { proc_energy_rate: 0.6, tx_energy_per_packet: 2.4e-4, ..NodeSpec::basic(1, 3000.0) }, 0.0, 12),
        placed(NodeSpec { proc_energy_rate: 2.0, tx_energy_per_packet: 2.8e-4, ..NodeSpec::basic(2, 16000.0) }, 30.0, 7),
        placed(NodeSpec { proc_energy_rate: 0.9, tx_energy_per_packet: 2.2e-4, ..NodeSpec::basic(3, 2400.0) }, 60.0, 3),
    ]
}

fn lines(trace: &[TraceRecord]) -> Vec<String> {
    trace.iter().map(|r| format!("{r}")).collect()
}

#[test]
fn single_node_matches_baseline_exactly() {
    let s = scenario(vec![NodeSpec::basic(1, 2000.0)], pipeline());
    let out = run_scenario(&s, RunOptions::default()).unwrap();
    assert!(out.report.feasible);
    assert_eq!(out.report.makespan, out.report.baseline_makespan);
    assert_eq!(out.report.makespan, (3000.0 + 8000.0 + 500.0) / 2000.0);
}

#[test]
fn three_node_run_completes_and_is_causal() {
    let s = scenario(three_nodes(), pipeline());
    let out = run_scenario(&s, RunOptions::default()).unwrap();
    assert!(out.report.feasible, "{:?}", describe_failures(&out.report));
    for t in &out.report.tasks {
        let start = t.exec_start.unwrap();
        for p in s.workload.predecessors(t.id) {
            let arrived = out
                .trace
                .iter()
                .find(|r| r.kind == "task-input" && r.get("task") == Some(&format!("{}", t.id)) && r.get("pred") == Some(&format!("{p}")))
                .expect("input record");
            assert!(arrived.time <= start);
            assert!(out.report.task(p).unwrap().exec_end.unwrap() <= start);
        }
    }
    let times: Vec<f64> = out.trace.iter().map(|r| r.time).collect();
    let sorted = {
        let mut v = times.clone();
        v.sort_by(f64::total_cmp);
        v
    };
    assert_eq!(times, sorted);
    for n in &out.report.nodes {
        assert!(n.compute >= 0.0 && n.tx >= 0.0 && n.relay >= 0.0 && n.rx >= 0.0);
    }
}

#[test]
fn disconnect_fails_tasks_but_reports() {
    let mut s = scenario(three_nodes(), pipeline());
    let before = run_scenario(&s, RunOptions::default()).unwrap();
    let victim = before.report.task(TaskId(2)).unwrap().node.unwrap();
    assert_ne!(victim, s.source_node);
    s.events.push(ScenarioEvent { at: 0.0, kind: ScenarioEventKind::Disconnect(victim) });
    let out = run_scenario(&s, RunOptions::default()).unwrap();
    assert!(!out.report.feasible);
    assert!(matches!(out.report.task(TaskId(2)).unwrap().status, TaskStatus::Failed(_)));
    assert!(out.trace.iter().any(|r| r.kind == "node-down"));
}

#[test]
fn same_seed_same_output() {
    let s = scenario(three_nodes(), pipeline());
    let a = run_scenario(&s, RunOptions::default()).unwrap();
    let b = run_scenario(&s, RunOptions::default()).unwrap();
    assert_eq!(a.report, b.report);
    assert_eq!(lines(&a.trace), lines(&b.trace));
}

#[test]
fn tracing_does_not_change_results() {
    let s = scenario(three_nodes(), pipeline());
    let a = run_scenario(&s, RunOptions { trace: true }).unwrap();
    let b = run_scenario(&s, RunOptions { trace: false }).unwrap();
    assert_eq!(a.report, b.report);
    assert!(b.trace.is_empty());
}

#[test]
fn unassigned_task_marks_report_infeasible() {
    let mut g = pipeline();
    g.tasks[1].deadline = 1e-6;
    let s = scenario(three_nodes(), g);
    let out = run_scenario(&s, RunOptions::default()).unwrap();
    assert!(!out.report.feasible);
    assert_eq!(out.report.task(TaskId(2)).unwrap().status, TaskStatus::Unassigned(crate::scheduler::RejectReason::Deadline));
}

fn offload(size: f64, input: f64, output: f64, power: f64, bw: f64, a: f64, b: f64) -> Scenario {
    let source = placed(NodeSpec { proc_energy_rate: 1e3, ..NodeSpec::basic(1, 1.0) }, 0.0, 15);
    let worker = placed(NodeSpec { proc_energy_rate: a, tx_energy_per_packet: b, ..NodeSpec::basic(2, power) }, 10.0, 0);
    let mut s = scenario(vec![source, worker], TaskGraph::new(vec![TaskSpec::new(1, "t", size, input, output, 1e9)], vec![]));
    s.params.default_latency = 0.0;
    s.params.default_bandwidth = bw;
    s
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn single_hop_matches_estimates(
        size in 1.0f64..1e5,
        input in 0.0f64..5000.0,
        output in 0.0f64..5000.0,
        power in 100.0f64..20000.0,
        bw in 1.0f64..500.0,
        a in 0.0f64..3.0,
        b in 0.0f64..1e-3,
    ) {
        let s = offload(size, input, output, power, bw, a, b);
        let out = run_scenario(&s, RunOptions { trace: false }).unwrap();
        let t = out.report.task(TaskId(1)).unwrap();
        prop_assert_eq!(t.node, Some(NodeId(2)));
        let ee = size / power + (input + output) * 8.0 / 1000.0 / bw;
        prop_assert!(rel(t.measured_time().unwrap(), ee) < 1e-9);
        let pkts = libm::ceil(input / 1.5) + libm::ceil(output / 1.5);
        let eec = a * size / power + b * pkts;
        if eec > 0.0 {
            prop_assert!(rel(t.charged_energy, eec) < 1e-9, "{} vs {}", t.charged_energy, eec);
        } else {
            prop_assert_eq!(t.charged_energy, 0.0);
        }
    }
}
