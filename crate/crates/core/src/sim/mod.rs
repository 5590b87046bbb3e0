//! Discrete-event engine, workload builder and end-to-end scenario runs.

pub mod calibrate;
pub mod engine;
pub mod metrics;
pub mod runner;
pub mod workload;

pub use calibrate::{solve2, CalibrationError, Solution};
pub use engine::{EngineError, EventQueue};
pub use metrics::{makespan, MetricsReport, NodeMetrics, PacketMetrics, TaskMetrics, TaskStatus};
pub use runner::{run_baseline, run_scenario, RunError, RunOptions, RunOutput};
pub use workload::{build_avss_workload, Stage, StageProfile, WorkloadError, WorkloadProfile};
