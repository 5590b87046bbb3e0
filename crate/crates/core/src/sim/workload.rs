//! Video-surveillance workload builder.
//!
//! The pipeline template is
//!
//! ```text
//! detection -> tracking -----------\
//! detection -> classification -> behavior -> action
//! detection -> indexing
//! ```
//!
//! A profile picks which stages exist and how big they are. Stages whose
//! template predecessors are all missing hang off detection.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

use crate::cost::KB_PER_MB;
use crate::model::{TaskGraph, TaskId, TaskSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Detection,
    Tracking,
    Classification,
    Indexing,
    Behavior,
    Action,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Detection,
        Stage::Tracking,
        Stage::Classification,
        Stage::Indexing,
        Stage::Behavior,
        Stage::Action,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Stage::Detection => "detection",
            Stage::Tracking => "tracking",
            Stage::Classification => "classification",
            Stage::Indexing => "indexing",
            Stage::Behavior => "behavior",
            Stage::Action => "action",
        }
    }

    pub fn from_name(s: &str) -> Option<Stage> {
        Stage::ALL.into_iter().find(|st| st.name() == s)
    }

    /// Fixed task id of the stage.
    pub fn task_id(&self) -> TaskId {
        TaskId(*self as u32 + 1)
    }

    fn template_predecessors(&self) -> &'static [Stage] {
        match self {
            Stage::Detection => &[],
            Stage::Tracking | Stage::Classification | Stage::Indexing => &[Stage::Detection],
            Stage::Behavior => &[Stage::Tracking, Stage::Classification],
            Stage::Action => &[Stage::Behavior],
        }
    }
}

/// Size table for one stage; every rate is per MB of camera input.
#[derive(Debug, Clone, PartialEq)]
pub struct StageProfile {
    pub stage: Stage,
    /// MI per MB.
    pub work_per_mb: f64,
    /// MI paid once per run regardless of input size.
    pub setup_work: f64,
    /// KB of output per MB.
    pub output_kb_per_mb: f64,
    /// Seconds.
    pub deadline_base: f64,
    /// Seconds per MB.
    pub deadline_per_mb: f64,
    pub real_time: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadProfile {
    pub name: String,
    pub stages: Vec<StageProfile>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WorkloadError {
    InvalidInputSize(f64),
    UnknownProfile(String),
    MissingDetection,
    DuplicateStage(Stage),
    InvalidStage { stage: Stage, message: String },
}

impl fmt::Display for WorkloadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WorkloadError::InvalidInputSize(v) => write!(f, "input size must be > 0, got {v}"),
            WorkloadError::UnknownProfile(p) => write!(f, "unknown profile {p:?}"),
            WorkloadError::MissingDetection => f.write_str("profile has no detection stage"),
            WorkloadError::DuplicateStage(s) => write!(f, "stage {} listed twice", s.name()),
            WorkloadError::InvalidStage { stage, message } => {
                write!(f, "stage {}: {message}", stage.name())
            }
        }
    }
}

impl WorkloadProfile {
    pub fn stage(&self, s: Stage) -> Option<&StageProfile> {
        self.stages.iter().find(|p| p.stage == s)
    }

    pub fn validate(&self) -> Result<(), WorkloadError> {
        let mut seen = Vec::new();
        for p in &self.stages {
            if seen.contains(&p.stage) {
                return Err(WorkloadError::DuplicateStage(p.stage));
            }
            seen.push(p.stage);
            let bad = |m: &str| WorkloadError::InvalidStage {
                stage: p.stage,
                message: m.to_string(),
            };
            let fields = [
                ("work_per_mb", p.work_per_mb),
                ("setup_work", p.setup_work),
                ("output_kb_per_mb", p.output_kb_per_mb),
                ("deadline_base", p.deadline_base),
                ("deadline_per_mb", p.deadline_per_mb),
            ];
            for (name, v) in fields {
                if !v.is_finite() || v < 0.0 {
                    return Err(bad(&format!("{name} must be finite and >= 0")));
                }
            }
            if p.work_per_mb == 0.0 && p.setup_work == 0.0 {
                return Err(bad("stage has no work"));
            }
            if p.deadline_base == 0.0 && p.deadline_per_mb == 0.0 {
                return Err(bad("stage has no deadline"));
            }
        }
        if !seen.contains(&Stage::Detection) {
            return Err(WorkloadError::MissingDetection);
        }
        Ok(())
    }

    fn predecessors(&self, s: Stage) -> Vec<Stage> {
        let present: Vec<Stage> = s
            .template_predecessors()
            .iter()
            .copied()
            .filter(|p| self.stage(*p).is_some())
            .collect();
        if present.is_empty() && s != Stage::Detection {
            vec![Stage::Detection]
        } else {
            present
        }
    }
}

/// Builds the task graph for `input_mb` MB of video.
pub fn build_avss_workload(input_mb: f64, profile: &WorkloadProfile) -> Result<TaskGraph, WorkloadError> {
    if !(input_mb > 0.0) || !input_mb.is_finite() {
        return Err(WorkloadError::InvalidInputSize(input_mb));
    }
    profile.validate()?;
    let mut stages: Vec<&StageProfile> = profile.stages.iter().collect();
    stages.sort_by_key(|p| p.stage);

    let mut tasks = Vec::with_capacity(stages.len());
    let mut edges = Vec::new();
    for p in &stages {
        let preds = profile.predecessors(p.stage);
        let input = if p.stage == Stage::Detection {
            input_mb * KB_PER_MB
        } else {
            preds
                .iter()
                .map(|s| profile.stage(*s).expect("present").output_kb_per_mb * input_mb)
                .sum()
        };
        for s in &preds {
            edges.push((s.task_id(), p.stage.task_id()));
        }
        tasks.push(TaskSpec {
            id: p.stage.task_id(),
            name: p.stage.name().to_string(),
            size: p.setup_work + p.work_per_mb * input_mb,
            input_data: input,
            output_data: p.output_kb_per_mb * input_mb,
            deadline: p.deadline_base + p.deadline_per_mb * input_mb,
            real_time: p.real_time,
        });
    }
    Ok(TaskGraph::new(tasks, edges))
}
