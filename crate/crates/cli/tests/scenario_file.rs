use std::path::Path;

use adhoc_cloud::scenario_file::{with_input_size, WorkloadSource};
use adhoc_cloud::{parse_scenario, parse_scenario_str, write_scenario, ParseOptions, ScenarioFileError};
use adhoc_cloud_core::model::{
    check_scenario, GroupSpec, LinkSpec, NodeId, NodeSpec, Position, Scenario, ScenarioEvent,
    ScenarioEventKind, SimParams, TaskGraph, TaskId, TaskSpec,
};
use adhoc_cloud_core::sim::WorkloadError;
use proptest::prelude::*;

const STRICT: ParseOptions = ParseOptions { lenient: false };
const LENIENT: ParseOptions = ParseOptions { lenient: true };

fn shipped(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

#[test]
fn threenode_file_holds_the_three_device_roster() {
    let p = parse_scenario(&shipped("threenode.toml"), STRICT).unwrap();
    let s = &p.scenario;
    let roster: Vec<(&str, f64)> = s.nodes.iter().map(|n| (n.name.as_str(), n.processing_power)).collect();
    // Octa 4 x 2.4 + 4 x 1.6 GHz; dual 1.2 GHz; dual 1.5 GHz.
    assert_eq!(roster, [("galaxy-s7", 16_000.0), ("galaxy-s2", 2_400.0), ("vega-lte", 3_000.0)]);
    assert_eq!(s.source_node, NodeId(3));
    let names: Vec<&str> = s.workload.tasks.iter().map(|t| t.name.as_str()).collect();
    assert_eq!(names, ["detection", "tracking", "classification"]);
    assert!(matches!(p.workload, WorkloadSource::Profile { input_mb, .. } if input_mb == 30.0));
    assert!(p.warnings.is_empty());
}

#[test]
fn empty_file_is_a_syntax_error() {
    for text in ["", "   \n\n"] {
        assert!(matches!(parse_scenario_str(text, None, STRICT), Err(ScenarioFileError::Syntax { line: 1, .. })));
    }
}

#[test]
fn syntax_error_reports_its_line() {
    let text = "[params]\nseed = 1\n\n[[nodes]]\nid = = 3\n";
    match parse_scenario_str(text, None, STRICT) {
        Err(ScenarioFileError::Syntax { line, .. }) => assert_eq!(line, 5),
        other => panic!("{other:?}"),
    }
}

#[test]
fn nodes_only_takes_defaults() {
    let text = "[[nodes]]\nid = 4\nprocessing_power = 1000\navailable_energy = 50\n\n[[nodes]]\nid = 2\nprocessing_power = 500\navailable_energy = 50\n";
    let p = parse_scenario_str(text, None, STRICT).unwrap();
    let s = &p.scenario;
    assert_eq!(s.params, SimParams::default());
    assert_eq!(s.packet_size, 1.5);
    assert_eq!(s.energy_threshold, 0.0);
    assert_eq!(s.source_node, NodeId(2));
    assert!(s.groups.is_none());
    assert_eq!(s.nodes[0].radio_range, 200.0);
    assert_eq!(s.nodes[0].go_intent, 7);
    assert_eq!(s.workload.tasks.len(), 3);
}

#[test]
fn unknown_keys_fail_strict_and_warn_lenient() {
    let text = "[[nodes]]\nid = 1\nprocessing_power = 1000\navailable_energy = 50\nprocesing_power = 3\n";
    match parse_scenario_str(text, None, STRICT) {
        Err(ScenarioFileError::UnknownKey(k)) => assert!(k.contains("procesing_power"), "{k}"),
        other => panic!("{other:?}"),
    }
    let p = parse_scenario_str(text, None, LENIENT).unwrap();
    assert_eq!(p.warnings.len(), 1);
    assert!(p.warnings[0].contains("procesing_power"));
}

#[test]
fn unknown_profile_is_an_error() {
    let text = "[[nodes]]\nid = 1\nprocessing_power = 1\navailable_energy = 1\n[workload]\nprofile = \"avss9\"\n";
    assert!(matches!(
        parse_scenario_str(text, None, STRICT),
        Err(ScenarioFileError::Workload(WorkloadError::UnknownProfile(p))) if p == "avss9"
    ));
}

#[test]
fn cyclic_inline_workload_names_the_field() {
    let text = "[[nodes]]\nid = 1\nprocessing_power = 1\navailable_energy = 1\n\
                [workload]\nedges = [[1, 2], [2, 1]]\n\
                [[workload.tasks]]\nid = 1\nsize = 1\ndeadline = 1\n\
                [[workload.tasks]]\nid = 2\nsize = 1\ndeadline = 1\n";
    match parse_scenario_str(text, None, STRICT) {
        Err(ScenarioFileError::Invalid(e)) => {
            assert_eq!(e.message, "cycle detected");
            assert!(e.path.starts_with("workload.edges"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn validation_errors_carry_file_paths() {
    let text = "[params]\npacket_size = 0\n[[nodes]]\nid = 1\nprocessing_power = 1\navailable_energy = 1\n";
    match parse_scenario_str(text, None, STRICT) {
        Err(ScenarioFileError::Invalid(e)) => assert_eq!(e.path, "params.packet_size"),
        other => panic!("{other:?}"),
    }
    let text = "[[nodes]]\nid = 1\nprocessing_power = -1\navailable_energy = 1\n";
    match parse_scenario_str(text, None, STRICT) {
        Err(ScenarioFileError::Invalid(e)) => assert_eq!(e.path, "nodes[0].processing_power"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn events_parse_and_bad_kinds_fail() {
    let base = "[[nodes]]\nid = 1\nprocessing_power = 1\navailable_energy = 1\n";
    let good = format!("{base}[[events]]\nat = 0.5\nkind = \"disconnect\"\nnode = 1\n[[events]]\nat = 1\nkind = \"move\"\nnode = 1\nposition = [3, 4]\n");
    let s = parse_scenario_str(&good, None, STRICT).unwrap().scenario;
    assert_eq!(s.events[0].kind, ScenarioEventKind::Disconnect(NodeId(1)));
    assert_eq!(s.events[1].kind, ScenarioEventKind::Move(NodeId(1), Position { x: 3.0, y: 4.0 }));
    let bad = format!("{base}[[events]]\nat = 0.5\nkind = \"explode\"\nnode = 1\n");
    assert!(matches!(parse_scenario_str(&bad, None, STRICT), Err(ScenarioFileError::Invalid(_))));
}

#[test]
fn profile_file_resolves_relative_to_the_scenario() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p.toml"), adhoc_cloud::profile::write_profile(&adhoc_cloud::profile::builtin("avss6").unwrap())).unwrap();
    let text = "[[nodes]]\nid = 1\nprocessing_power = 1\navailable_energy = 1\n[workload]\nprofile_file = \"p.toml\"\ninput_mb = 2\n";
    std::fs::write(dir.path().join("s.toml"), text).unwrap();
    let p = parse_scenario(&dir.path().join("s.toml"), STRICT).unwrap();
    assert_eq!(p.scenario.workload.tasks.len(), 6);
    let bigger = with_input_size(&p, 4.0).unwrap();
    assert_eq!(bigger.workload.tasks[0].input_data, 4000.0);
}

#[test]
fn shipped_scenario_round_trips() {
    let s = parse_scenario(&shipped("threenode.toml"), STRICT).unwrap().scenario;
    let again = parse_scenario_str(&write_scenario(&s), None, STRICT).unwrap().scenario;
    assert_eq!(again, s);
}

fn finite(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    prop_oneof![lo..hi, Just(lo), (1u32..1000).prop_map(move |k| lo + (hi - lo) / k as f64)]
}

prop_compose! {
    fn node(id: u32)(
        power in finite(1e-3, 1e5),
        energy in finite(0.0, 1e6),
        a in finite(0.0, 10.0),
        b in finite(0.0, 1e-2),
        x in -500.0f64..500.0,
        y in -500.0f64..500.0,
        range in finite(1.0, 400.0),
        intent in 0u8..=15,
    ) -> NodeSpec {
        NodeSpec {
            id: NodeId(id),
            name: format!("n{id}"),
            processing_power: power,
            available_energy: energy,
            proc_energy_rate: a,
            tx_energy_per_packet: b,
            position: Position { x, y },
            radio_range: range,
            go_intent: intent,
        }
    }
}

fn task(id: u32) -> impl Strategy<Value = TaskSpec> {
    (finite(1e-3, 1e5), finite(0.0, 1e5), finite(0.0, 1e5), finite(1e-3, 100.0), any::<bool>()).prop_map(
        move |(size, input, output, deadline, real_time)| TaskSpec {
            id: TaskId(id),
            name: format!("t{id}"),
            size,
            input_data: input,
            output_data: output,
            deadline,
            real_time,
        },
    )
}

fn scenario() -> impl Strategy<Value = Scenario> {
    (1usize..5, 0usize..5).prop_flat_map(|(n, t)| {
        let nodes: Vec<_> = (1..=n as u32).map(node).collect();
        let tasks: Vec<_> = (1..=t as u32).map(task).collect();
        let pairs: Vec<(u32, u32)> = (1..=t as u32).flat_map(|a| (a + 1..=t as u32).map(move |b| (a, b))).collect();
        let node_pairs: Vec<(u32, u32)> = (1..=n as u32).flat_map(|a| (a + 1..=n as u32).map(move |b| (a, b))).collect();
        (
            nodes,
            tasks,
            proptest::sample::subsequence(pairs.clone(), 0..=pairs.len()),
            proptest::sample::subsequence(node_pairs.clone(), 0..=node_pairs.len()),
            proptest::collection::vec((finite(1.0, 1000.0), finite(0.0, 0.01)), node_pairs.len()),
            proptest::option::of(1u32..=n as u32),
            1u32..=n as u32,
            (finite(0.01, 10.0), finite(0.0, 100.0), any::<u64>()),
            (finite(0.1, 5.0), 1u32..64, proptest::option::of(finite(0.1, 20.0)), any::<bool>(), proptest::option::of(1u32..10)),
            proptest::collection::vec((finite(0.0, 10.0), 1u32..=n as u32, proptest::option::of((-9.0f64..9.0, -9.0f64..9.0))), 0..3),
        )
    })
    .prop_map(|(nodes, tasks, edges, links, link_params, owner, source, (pkt, thr, seed), (period, ttl, timeout, static_energy, rounds), events)| {
        let n = nodes.len() as u32;
        Scenario {
            links: links
                .iter()
                .zip(link_params)
                .map(|(&(a, b), (bw, lat))| LinkSpec {
                    endpoints: (NodeId(a), NodeId(b)),
                    bandwidth: bw,
                    latency: lat,
                })
                .collect(),
            groups: owner.map(|o| {
                vec![GroupSpec {
                    owner: NodeId(o),
                    clients: (1..=n).filter(|c| *c != o).map(NodeId).collect(),
                }]
            }),
            nodes,
            workload: TaskGraph::new(tasks, edges.into_iter().map(|(a, b)| (TaskId(a), TaskId(b))).collect()),
            source_node: NodeId(source),
            packet_size: pkt,
            energy_threshold: thr,
            rng_seed: seed,
            params: SimParams {
                discovery_period: period,
                ttl,
                entry_timeout: timeout,
                static_energy,
                convergence_rounds: rounds,
                ..SimParams::default()
            },
            events: events
                .into_iter()
                .map(|(at, node, pos)| ScenarioEvent {
                    at,
                    kind: match pos {
                        Some((x, y)) => ScenarioEventKind::Move(NodeId(node), Position { x, y }),
                        None => ScenarioEventKind::Disconnect(NodeId(node)),
                    },
                })
                .collect(),
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn write_then_parse_is_identity(s in scenario()) {
        prop_assume!(check_scenario(&s).is_ok());
        let text = write_scenario(&s);
        let back = parse_scenario_str(&text, None, STRICT).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back.scenario, s);
        prop_assert!(back.warnings.is_empty());
    }
}
