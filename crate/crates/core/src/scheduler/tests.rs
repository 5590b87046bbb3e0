use super::*;
use crate::model::NodeSpec;
use alloc::vec;
use alloc::vec::Vec;
use proptest::prelude::*;

fn params() -> AllocParams {
    AllocParams {
        packet_size: 1.5,
        energy_threshold: 0.0,
        static_energy: false,
    }
}

fn local(_: NodeId) -> Reach {
    Reach::Local
}

fn threenode() -> Vec<NodeSpec> {
    vec![
        NodeSpec::basic(1, 16_000.0),
        NodeSpec::basic(2, 2_400.0),
        NodeSpec::basic(3, 3_000.0),
    ]
}

#[test]
fn empty_graph_sorts_to_nothing() {
    assert!(sort_tasks(&TaskGraph::default()).is_empty());
    let a = allocate(&TaskGraph::default(), &threenode(), local, &params());
    assert!(a.placements.is_empty() && a.unassigned.is_empty());
}

#[test]
fn chain_order_ignores_deadlines() {
    let g = TaskGraph::new(
        vec![
            TaskSpec::new(3, "classify", 1.0, 0.0, 0.0, 1.0),
            TaskSpec::new(1, "detect", 1.0, 0.0, 0.0, 9.0),
            TaskSpec::new(2, "track", 1.0, 0.0, 0.0, 5.0),
        ],
        vec![(TaskId(1), TaskId(2)), (TaskId(2), TaskId(3))],
    );
    assert_eq!(sort_tasks(&g), vec![TaskId(1), TaskId(2), TaskId(3)]);
}

#[test]
fn earlier_deadline_first() {
    let g = TaskGraph::new(
        vec![
            TaskSpec::new(1, "a", 1.0, 0.0, 0.0, 5.0),
            TaskSpec::new(2, "b", 1.0, 0.0, 0.0, 2.0),
        ],
        vec![],
    );
    assert_eq!(sort_tasks(&g), vec![TaskId(2), TaskId(1)]);
}

#[test]
fn equal_deadlines_break_by_id() {
    let g = TaskGraph::new(
        vec![
            TaskSpec::new(7, "a", 1.0, 0.0, 0.0, 2.0),
            TaskSpec::new(4, "b", 1.0, 0.0, 0.0, 2.0),
        ],
        vec![],
    );
    assert_eq!(sort_tasks(&g), vec![TaskId(4), TaskId(7)]);
}

#[test]
fn feasibility_filters() {
    let nodes = threenode();
    let loose = TaskSpec::new(1, "t", 8_000.0, 0.0, 0.0, 1.0e9);
    assert_eq!(feasible_nodes(&loose, &nodes, local, 1.5, 0.0).len(), 3);
    let tight = TaskSpec::new(1, "t", 8_000.0, 0.0, 0.0, 0.001);
    assert!(feasible_nodes(&tight, &nodes, local, 1.5, 0.0).is_empty());
    // 0.5 s on the S7, 3.33 s on the S2, 2.67 s on the Vega.
    let mid = TaskSpec::new(1, "t", 8_000.0, 0.0, 0.0, 3.0);
    assert_eq!(
        feasible_nodes(&mid, &nodes, local, 1.5, 0.0),
        vec![NodeId(1), NodeId(3)]
    );
}

#[test]
fn energy_threshold_excludes_weak_nodes() {
    let mut nodes = threenode();
    nodes[0].available_energy = 5.0;
    let t = TaskSpec::new(1, "t", 100.0, 0.0, 0.0, 10.0);
    assert_eq!(
        feasible_nodes(&t, &nodes, local, 1.5, 5.0),
        vec![NodeId(2), NodeId(3)]
    );
}

#[test]
fn single_node_gets_the_task() {
    let g = TaskGraph::new(vec![TaskSpec::new(1, "t", 10.0, 0.0, 0.0, 10.0)], vec![]);
    let a = allocate(&g, &[NodeSpec::basic(9, 10.0)], local, &params());
    assert_eq!(a.node_of(TaskId(1)), Some(NodeId(9)));
}

#[test]
fn identical_nodes_tie_to_lower_id() {
    let g = TaskGraph::new(vec![TaskSpec::new(1, "t", 10.0, 0.0, 0.0, 10.0)], vec![]);
    let nodes = [NodeSpec::basic(5, 10.0), NodeSpec::basic(2, 10.0)];
    let a = allocate(&g, &nodes, local, &params());
    assert_eq!(a.node_of(TaskId(1)), Some(NodeId(2)));
}

#[test]
fn rejection_reasons() {
    let g = TaskGraph::new(
        vec![
            TaskSpec::new(1, "late", 1_000.0, 0.0, 0.0, 0.001),
            TaskSpec::new(2, "hungry", 1_000.0, 0.0, 0.0, 100.0),
        ],
        vec![],
    );
    let node = NodeSpec {
        proc_energy_rate: 10.0,
        available_energy: 1.0,
        ..NodeSpec::basic(1, 100.0)
    };
    let a = allocate(&g, &[node], local, &params());
    assert_eq!(
        a.unassigned,
        vec![(TaskId(1), RejectReason::Deadline), (TaskId(2), RejectReason::Energy)]
    );
}

#[test]
fn unreachable_nodes_miss_every_deadline() {
    let t = TaskSpec::new(1, "t", 1.0, 10.0, 0.0, 1.0e12);
    assert!(feasible_nodes(&t, &threenode(), |_| Reach::Unreachable, 1.5, 0.0).is_empty());
}

#[test]
fn energy_is_charged_between_tasks() {
    let g = TaskGraph::new(
        vec![
            TaskSpec::new(1, "a", 100.0, 0.0, 0.0, 10.0),
            TaskSpec::new(2, "b", 100.0, 0.0, 0.0, 10.0),
        ],
        vec![],
    );
    let cheap = NodeSpec {
        proc_energy_rate: 1.0,
        available_energy: 1.5,
        ..NodeSpec::basic(1, 100.0)
    };
    let dear = NodeSpec {
        proc_energy_rate: 1.2,
        ..NodeSpec::basic(2, 100.0)
    };
    let a = allocate(&g, &[cheap.clone(), dear.clone()], local, &params());
    assert_eq!(a.node_of(TaskId(1)), Some(NodeId(1)));
    assert_eq!(a.node_of(TaskId(2)), Some(NodeId(2)));

    let fixed = AllocParams {
        static_energy: true,
        ..params()
    };
    let b = allocate(&g, &[cheap, dear], local, &fixed);
    assert_eq!(b.node_of(TaskId(2)), Some(NodeId(1)));
}

#[test]
fn oracle_refuses_large_instances() {
    let tasks = (1..=9)
        .map(|i| TaskSpec::new(i, "t", 1.0, 0.0, 0.0, 1.0))
        .collect();
    let g = TaskGraph::new(tasks, vec![]);
    assert!(oracle_allocate(&g, &threenode(), local, &params()).is_err());
    let empty = oracle_allocate(&TaskGraph::default(), &threenode(), local, &params()).unwrap();
    assert_eq!(empty, Assignment::default());
}

pub(crate) fn instance() -> impl Strategy<Value = (TaskGraph, Vec<NodeSpec>, Vec<Option<f64>>, AllocParams)> {
    let task = (1.0f64..5_000.0, 0.0f64..5_000.0, 0.0f64..5_000.0, 0.05f64..5.0);
    let node = (100.0f64..20_000.0, 0.0f64..50.0, 0.0f64..3.0, 0.0f64..0.01, prop::option::of(1.0f64..300.0));
    (
        prop::collection::vec(task, 0..=6),
        prop::collection::vec(node, 1..=5),
        prop::collection::vec(any::<bool>(), 15),
        0.0f64..5.0,
        any::<bool>(),
        prop::sample::select(vec![0.5, 1.0, 1.5, 4.0]),
    )
        .prop_map(|(ts, ns, edge_bits, threshold, static_energy, pkt)| {
            let tasks: Vec<TaskSpec> = ts
                .iter()
                .enumerate()
                .map(|(i, &(size, input, output, deadline))| {
                    TaskSpec::new(i as u32 + 1, "t", size, input, output, deadline)
                })
                .collect();
            // Forward edges only, so the graph is a DAG.
            let mut edges = Vec::new();
            let mut bit = 0;
            for i in 0..tasks.len() {
                for j in i + 1..tasks.len() {
                    if edge_bits[bit % edge_bits.len()] {
                        edges.push((tasks[i].id, tasks[j].id));
                    }
                    bit += 1;
                }
            }
            let mut reach = Vec::new();
            let nodes = ns
                .iter()
                .enumerate()
                .map(|(i, &(power, energy, a, b, bw))| {
                    reach.push(if i == 0 { None } else { bw });
                    NodeSpec {
                        available_energy: energy,
                        proc_energy_rate: a,
                        tx_energy_per_packet: b,
                        ..NodeSpec::basic(i as u32 + 1, power)
                    }
                })
                .collect();
            let params = AllocParams {
                packet_size: pkt,
                energy_threshold: threshold,
                static_energy,
            };
            (TaskGraph::new(tasks, edges), nodes, reach, params)
        })
}

pub(crate) fn reach_fn(reach: &[Option<f64>]) -> impl Fn(NodeId) -> Reach + '_ {
    move |id: NodeId| match reach.get(id.0 as usize - 1).copied().flatten() {
        _ if id.0 == 1 => Reach::Local,
        Some(bw) => Reach::Remote(bw),
        None => Reach::Unreachable,
    }
}

proptest! {
    #[test]
    fn matches_oracle((g, nodes, reach, p) in instance()) {
        let fast = allocate(&g, &nodes, reach_fn(&reach), &p);
        let slow = oracle_allocate(&g, &nodes, reach_fn(&reach), &p).unwrap();
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn assigned_tasks_meet_deadlines((g, nodes, reach, p) in instance()) {
        let a = allocate(&g, &nodes, reach_fn(&reach), &p);
        for (id, pl) in &a.placements {
            prop_assert!(pl.estimated_execution_time <= g.task(*id).unwrap().deadline);
        }
        prop_assert_eq!(a.placements.len() + a.unassigned.len(), g.tasks.len());
    }

    #[test]
    fn energy_never_goes_negative((g, nodes, reach, p) in instance()) {
        let a = allocate(&g, &nodes, reach_fn(&reach), &p);
        if !p.static_energy {
            for n in &nodes {
                let spent: f64 = a.placements.values().filter(|pl| pl.node == n.id).map(|pl| pl.estimated_energy).sum();
                prop_assert!(spent <= n.available_energy * (1.0 + 1e-12));
            }
        }
        let per_node: f64 = nodes.iter().map(|n| a.placements.values().filter(|pl| pl.node == n.id).map(|pl| pl.estimated_energy).sum::<f64>()).sum();
        prop_assert!((per_node - a.total_energy()).abs() <= 1e-9 * per_node.max(1.0));
    }

    #[test]
    fn scaling_coefficients_keeps_choices((g, mut nodes, reach, mut p) in instance(), k in prop::sample::select(vec![2.0, 4.0, 0.5, 0.25])) {
        // Energy budgets and the threshold scale too so the filters agree;
        // powers of two keep every product exact.
        let before = allocate(&g, &nodes, reach_fn(&reach), &p);
        for n in &mut nodes {
            n.proc_energy_rate *= k;
            n.tx_energy_per_packet *= k;
            n.available_energy *= k;
        }
        p.energy_threshold *= k;
        let after = allocate(&g, &nodes, reach_fn(&reach), &p);
        for id in &before.order {
            prop_assert_eq!(before.node_of(*id), after.node_of(*id));
        }
    }
}
