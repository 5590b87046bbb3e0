//! The scenario file: one TOML document per experiment.
//!
//! ```toml
//! [params]
//! source_node = 3
//! packet_size = 1.5
//! seed = 7
//!
//! [[nodes]]
//! id = 1
//! processing_power = 16000
//! available_energy = 41580
//! position = [0, 0]
//!
//! [workload]
//! profile = "avss3"
//! input_mb = 30
//! ```
//!
//! Omitted parameters take the defaults listed in the README. Unknown keys
//! are errors unless the lenient flag is set, in which case they come back
//! as warnings.

use std::fs;
use std::path::{Path, PathBuf};

use adhoc_cloud_core::model::{
    check_scenario, GroupSpec, LinkSpec, NodeId, NodeSpec, Position, Scenario, ScenarioEvent,
    ScenarioEventKind, SimParams, TaskGraph, TaskId, TaskSpec, ValidationError,
};
use adhoc_cloud_core::sim::{build_avss_workload, WorkloadError, WorkloadProfile};
use serde::{Deserialize, Serialize};

use crate::profile;

pub const DEFAULT_PACKET_SIZE: f64 = 1.5;
pub const DEFAULT_PROFILE: &str = "avss3";
pub const DEFAULT_INPUT_MB: f64 = 30.0;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioFileError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid scenario: {0}")]
    Invalid(ValidationError),
    #[error("workload: {0}")]
    Workload(WorkloadError),
    #[error("profile: {0}")]
    Profile(String),
}

pub(crate) fn read_text(path: &Path) -> Result<String, ScenarioFileError> {
    fs::read_to_string(path).map_err(|source| ScenarioFileError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Maps a TOML error to a 1-based line and column.
pub(crate) fn syntax_error(text: &str, e: &toml::de::Error) -> ScenarioFileError {
    let (line, column) = match e.span() {
        Some(span) => {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
            (line, column)
        }
        None => (1, 1),
    };
    ScenarioFileError::Syntax {
        line,
        column,
        message: e.message().trim().to_string(),
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct Doc {
    #[serde(default)]
    params: ParamsDoc,
    #[serde(default)]
    nodes: Vec<NodeDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    links: Vec<LinkDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    groups: Option<Vec<GroupDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    workload: Option<WorkloadDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    events: Vec<EventDoc>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct ParamsDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    source_node: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    packet_size: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    energy_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<SeedDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    discovery_period: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ttl: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    entry_timeout: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scan_duration: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    formation_window: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    default_bandwidth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    default_latency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    path_loss_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    static_energy: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    convergence_rounds: Option<u32>,
}

/// TOML integers stop at `i64::MAX`; larger seeds are written as decimal
/// strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum SeedDoc {
    Int(i64),
    Text(String),
}

impl SeedDoc {
    fn new(seed: u64) -> Self {
        match i64::try_from(seed) {
            Ok(v) => SeedDoc::Int(v),
            Err(_) => SeedDoc::Text(seed.to_string()),
        }
    }

    fn value(&self) -> Result<u64, ScenarioFileError> {
        let bad = || invalid("params.seed".into(), "must be an integer in 0..2^64");
        match self {
            SeedDoc::Int(v) => u64::try_from(*v).map_err(|_| bad()),
            SeedDoc::Text(t) => t.parse().map_err(|_| bad()),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeDoc {
    id: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    processing_power: f64,
    available_energy: f64,
    #[serde(default)]
    proc_energy_rate: f64,
    #[serde(default)]
    tx_energy_per_packet: f64,
    #[serde(default)]
    position: [f64; 2],
    #[serde(default = "default_range")]
    radio_range: f64,
    #[serde(default = "default_intent")]
    go_intent: u8,
}

fn default_range() -> f64 {
    200.0
}

fn default_intent() -> u8 {
    7
}

#[derive(Debug, Serialize, Deserialize)]
struct LinkDoc {
    endpoints: [u32; 2],
    bandwidth: f64,
    latency: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct GroupDoc {
    owner: u32,
    #[serde(default)]
    clients: Vec<u32>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct WorkloadDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    profile: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    profile_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    input_mb: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    edges: Vec<[u32; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    tasks: Vec<TaskDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TaskDoc {
    id: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    size: f64,
    #[serde(default)]
    input_data: f64,
    #[serde(default)]
    output_data: f64,
    deadline: f64,
    #[serde(default = "yes")]
    real_time: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Serialize, Deserialize)]
struct EventDoc {
    at: f64,
    kind: String,
    node: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    position: Option<[f64; 2]>,
}

/// Where the workload graph came from.
#[derive(Debug, Clone, PartialEq)]
pub enum WorkloadSource {
    Profile { profile: WorkloadProfile, input_mb: f64 },
    Inline,
}

#[derive(Debug, Clone)]
pub struct ParsedScenario {
    pub scenario: Scenario,
    pub workload: WorkloadSource,
    /// Unknown keys skipped in lenient mode.
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    pub lenient: bool,
}

pub fn parse_scenario(path: &Path, opts: ParseOptions) -> Result<ParsedScenario, ScenarioFileError> {
    let text = read_text(path)?;
    parse_scenario_str(&text, path.parent(), opts)
}

/// Parses and validates scenario text. `base` resolves relative
/// `profile_file` paths.
pub fn parse_scenario_str(text: &str, base: Option<&Path>, opts: ParseOptions) -> Result<ParsedScenario, ScenarioFileError> {
    if text.trim().is_empty() {
        return Err(ScenarioFileError::Syntax {
            line: 1,
            column: 1,
            message: "empty scenario file".into(),
        });
    }
    let de = toml::Deserializer::new(text);
    let mut unknown = Vec::new();
    let doc: Doc = serde_ignored::deserialize(de, |p| unknown.push(p.to_string())).map_err(|e| syntax_error(text, &e))?;
    if !opts.lenient {
        if let Some(k) = unknown.into_iter().next() {
            return Err(ScenarioFileError::UnknownKey(k));
        }
        unknown = Vec::new();
    }
    let warnings = unknown.into_iter().map(|k| format!("ignored unknown key `{k}`")).collect();
    let (scenario, workload) = build(doc, base)?;
    check_scenario(&scenario).map_err(|e| ScenarioFileError::Invalid(file_path(e)))?;
    Ok(ParsedScenario { scenario, workload, warnings })
}

/// Scenario-level fields live under `[params]` in the file.
fn file_path(mut e: ValidationError) -> ValidationError {
    if matches!(e.path.as_str(), "source_node" | "packet_size" | "energy_threshold") {
        e.path = format!("params.{}", e.path);
    }
    e
}

fn build(doc: Doc, base: Option<&Path>) -> Result<(Scenario, WorkloadSource), ScenarioFileError> {
    let defaults = SimParams::default();
    let p = doc.params;
    let seed = p.seed.as_ref().map_or(Ok(0), SeedDoc::value)?;
    let params = SimParams {
        discovery_period: p.discovery_period.unwrap_or(defaults.discovery_period),
        ttl: p.ttl.unwrap_or(defaults.ttl),
        entry_timeout: p.entry_timeout,
        scan_duration: p.scan_duration.unwrap_or(defaults.scan_duration),
        formation_window: p.formation_window.unwrap_or(defaults.formation_window),
        default_bandwidth: p.default_bandwidth.unwrap_or(defaults.default_bandwidth),
        default_latency: p.default_latency.unwrap_or(defaults.default_latency),
        path_loss_exponent: p.path_loss_exponent.unwrap_or(defaults.path_loss_exponent),
        static_energy: p.static_energy.unwrap_or(defaults.static_energy),
        convergence_rounds: p.convergence_rounds,
    };
    let nodes: Vec<NodeSpec> = doc
        .nodes
        .into_iter()
        .map(|n| NodeSpec {
            id: NodeId(n.id),
            name: n.name.unwrap_or_else(|| format!("node-{}", n.id)),
            processing_power: n.processing_power,
            available_energy: n.available_energy,
            proc_energy_rate: n.proc_energy_rate,
            tx_energy_per_packet: n.tx_energy_per_packet,
            position: Position {
                x: n.position[0],
                y: n.position[1],
            },
            radio_range: n.radio_range,
            go_intent: n.go_intent,
        })
        .collect();
    let source = p
        .source_node
        .map(NodeId)
        .or_else(|| nodes.iter().map(|n| n.id).min())
        .unwrap_or(NodeId(0));
    let links = doc
        .links
        .into_iter()
        .map(|l| LinkSpec {
            endpoints: (NodeId(l.endpoints[0]), NodeId(l.endpoints[1])),
            bandwidth: l.bandwidth,
            latency: l.latency,
        })
        .collect();
    let groups = doc.groups.map(|gs| {
        gs.into_iter()
            .map(|g| GroupSpec {
                owner: NodeId(g.owner),
                clients: g.clients.into_iter().map(NodeId).collect(),
            })
            .collect()
    });
    let mut events = Vec::with_capacity(doc.events.len());
    for (i, e) in doc.events.into_iter().enumerate() {
        let node = NodeId(e.node);
        let kind = match (e.kind.as_str(), e.position) {
            ("disconnect", None) => ScenarioEventKind::Disconnect(node),
            ("move", Some([x, y])) => ScenarioEventKind::Move(node, Position { x, y }),
            ("move", None) => return Err(invalid(format!("events[{i}].position"), "move needs a position")),
            ("disconnect", Some(_)) => return Err(invalid(format!("events[{i}].position"), "disconnect takes no position")),
            (other, _) => return Err(invalid(format!("events[{i}].kind"), &format!("unknown event kind {other:?}"))),
        };
        events.push(ScenarioEvent { at: e.at, kind });
    }
    // No [workload] section means the default profile; an empty one means
    // no tasks.
    let w = doc.workload.unwrap_or_else(|| WorkloadDoc {
        profile: Some(DEFAULT_PROFILE.to_string()),
        ..WorkloadDoc::default()
    });
    let (workload, source_kind) = build_workload(w, base)?;
    let scenario = Scenario {
        nodes,
        links,
        groups,
        workload,
        source_node: source,
        packet_size: p.packet_size.unwrap_or(DEFAULT_PACKET_SIZE),
        energy_threshold: p.energy_threshold.unwrap_or(0.0),
        rng_seed: seed,
        params,
        events,
    };
    Ok((scenario, source_kind))
}

fn invalid(path: String, message: &str) -> ScenarioFileError {
    ScenarioFileError::Invalid(ValidationError {
        path,
        message: message.to_string(),
    })
}

fn build_workload(w: WorkloadDoc, base: Option<&Path>) -> Result<(TaskGraph, WorkloadSource), ScenarioFileError> {
    let named = w.profile.is_some() || w.profile_file.is_some();
    let inline = !w.tasks.is_empty() || !w.edges.is_empty() || (!named && w.input_mb.is_none());
    if inline {
        if named || w.input_mb.is_some() {
            return Err(invalid("workload".into(), "give either a profile or inline tasks, not both"));
        }
        let tasks = w
            .tasks
            .into_iter()
            .map(|t| TaskSpec {
                id: TaskId(t.id),
                name: t.name.unwrap_or_else(|| format!("task-{}", t.id)),
                size: t.size,
                input_data: t.input_data,
                output_data: t.output_data,
                deadline: t.deadline,
                real_time: t.real_time,
            })
            .collect();
        let edges = w.edges.into_iter().map(|[a, b]| (TaskId(a), TaskId(b))).collect();
        return Ok((TaskGraph::new(tasks, edges), WorkloadSource::Inline));
    }
    let profile = match (w.profile, w.profile_file) {
        (Some(_), Some(_)) => return Err(invalid("workload".into(), "give either profile or profile_file")),
        (None, Some(file)) => {
            let path = match base {
                Some(b) => b.join(&file),
                None => PathBuf::from(&file),
            };
            profile::load_profile(&path)?
        }
        (name, None) => {
            let name = name.unwrap_or_else(|| DEFAULT_PROFILE.to_string());
            profile::builtin(&name).ok_or(ScenarioFileError::Workload(WorkloadError::UnknownProfile(name)))?
        }
    };
    let input_mb = w.input_mb.unwrap_or(DEFAULT_INPUT_MB);
    let graph = build_avss_workload(input_mb, &profile).map_err(ScenarioFileError::Workload)?;
    Ok((graph, WorkloadSource::Profile { profile, input_mb }))
}

/// Canonical serialization. Every field is written explicitly and the
/// workload always as an inline task table, so the output parses back to
/// the same scenario regardless of defaults.
pub fn write_scenario(s: &Scenario) -> String {
    let p = &s.params;
    let doc = Doc {
        params: ParamsDoc {
            source_node: Some(s.source_node.0),
            packet_size: Some(s.packet_size),
            energy_threshold: Some(s.energy_threshold),
            seed: Some(SeedDoc::new(s.rng_seed)),
            discovery_period: Some(p.discovery_period),
            ttl: Some(p.ttl),
            entry_timeout: p.entry_timeout,
            scan_duration: Some(p.scan_duration),
            formation_window: Some(p.formation_window),
            default_bandwidth: Some(p.default_bandwidth),
            default_latency: Some(p.default_latency),
            path_loss_exponent: Some(p.path_loss_exponent),
            static_energy: Some(p.static_energy),
            convergence_rounds: p.convergence_rounds,
        },
        nodes: s
            .nodes
            .iter()
            .map(|n| NodeDoc {
                id: n.id.0,
                name: Some(n.name.clone()),
                processing_power: n.processing_power,
                available_energy: n.available_energy,
                proc_energy_rate: n.proc_energy_rate,
                tx_energy_per_packet: n.tx_energy_per_packet,
                position: [n.position.x, n.position.y],
                radio_range: n.radio_range,
                go_intent: n.go_intent,
            })
            .collect(),
        links: s
            .links
            .iter()
            .map(|l| LinkDoc {
                endpoints: [l.endpoints.0 .0, l.endpoints.1 .0],
                bandwidth: l.bandwidth,
                latency: l.latency,
            })
            .collect(),
        groups: s.groups.as_ref().map(|gs| {
            gs.iter()
                .map(|g| GroupDoc {
                    owner: g.owner.0,
                    clients: g.clients.iter().map(|c| c.0).collect(),
                })
                .collect()
        }),
        workload: Some(WorkloadDoc {
            edges: s.workload.edges.iter().map(|(a, b)| [a.0, b.0]).collect(),
            tasks: s
                .workload
                .tasks
                .iter()
                .map(|t| TaskDoc {
                    id: t.id.0,
                    name: Some(t.name.clone()),
                    size: t.size,
                    input_data: t.input_data,
                    output_data: t.output_data,
                    deadline: t.deadline,
                    real_time: t.real_time,
                })
                .collect(),
            ..WorkloadDoc::default()
        }),
        events: s
            .events
            .iter()
            .map(|e| match &e.kind {
                ScenarioEventKind::Disconnect(n) => EventDoc {
                    at: e.at,
                    kind: "disconnect".into(),
                    node: n.0,
                    position: None,
                },
                ScenarioEventKind::Move(n, p) => EventDoc {
                    at: e.at,
                    kind: "move".into(),
                    node: n.0,
                    position: Some([p.x, p.y]),
                },
            })
            .collect(),
    };
    toml::to_string(&doc).expect("scenario serializes")
}

/// Rebuilds the workload of a profile-based scenario at another input size.
pub fn with_input_size(parsed: &ParsedScenario, input_mb: f64) -> Result<Scenario, ScenarioFileError> {
    match &parsed.workload {
        WorkloadSource::Profile { profile, .. } => {
            let mut s = parsed.scenario.clone();
            s.workload = build_avss_workload(input_mb, profile).map_err(ScenarioFileError::Workload)?;
            Ok(s)
        }
        WorkloadSource::Inline => Err(invalid("workload".into(), "input size can only vary for profile workloads")),
    }
}
