//! Workload profile files.
//!
//! A profile is a TOML document listing, per pipeline stage, the work and
//! output produced per MB of camera input. Two profiles ship with the
//! binary: `avss3` (detection, tracking, classification; calibrated against
//! the three-node cluster) and `avss6` (the full pipeline).

use std::path::Path;

use adhoc_cloud_core::sim::{Stage, StageProfile, WorkloadProfile};
use serde::{Deserialize, Serialize};

use crate::scenario_file::{read_text, syntax_error, ScenarioFileError};

const AVSS3: &str = include_str!("../profiles/avss3.toml");
const AVSS6: &str = include_str!("../profiles/avss6.toml");

pub const BUILTIN: [&str; 2] = ["avss3", "avss6"];

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    name: String,
    stages: Vec<StageDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StageDoc {
    stage: String,
    work_per_mb: f64,
    #[serde(default)]
    setup_work: f64,
    output_kb_per_mb: f64,
    #[serde(default)]
    deadline_base: f64,
    #[serde(default)]
    deadline_per_mb: f64,
    #[serde(default = "yes")]
    real_time: bool,
}

fn yes() -> bool {
    true
}

pub fn parse_profile(text: &str) -> Result<WorkloadProfile, ScenarioFileError> {
    let doc: ProfileDoc = toml::from_str(text).map_err(|e| syntax_error(text, &e))?;
    let mut stages = Vec::with_capacity(doc.stages.len());
    for (i, s) in doc.stages.into_iter().enumerate() {
        let stage = Stage::from_name(&s.stage).ok_or_else(|| ScenarioFileError::Profile(format!("stages[{i}].stage: unknown stage {:?}", s.stage)))?;
        stages.push(StageProfile {
            stage,
            work_per_mb: s.work_per_mb,
            setup_work: s.setup_work,
            output_kb_per_mb: s.output_kb_per_mb,
            deadline_base: s.deadline_base,
            deadline_per_mb: s.deadline_per_mb,
            real_time: s.real_time,
        });
    }
    let profile = WorkloadProfile { name: doc.name, stages };
    profile.validate().map_err(|e| ScenarioFileError::Profile(e.to_string()))?;
    Ok(profile)
}

pub fn write_profile(p: &WorkloadProfile) -> String {
    let doc = ProfileDoc {
        name: p.name.clone(),
        stages: p
            .stages
            .iter()
            .map(|s| StageDoc {
                stage: s.stage.name().to_string(),
                work_per_mb: s.work_per_mb,
                setup_work: s.setup_work,
                output_kb_per_mb: s.output_kb_per_mb,
                deadline_base: s.deadline_base,
                deadline_per_mb: s.deadline_per_mb,
                real_time: s.real_time,
            })
            .collect(),
    };
    toml::to_string(&doc).expect("profile serializes")
}

/// One of the profiles compiled into the binary.
pub fn builtin(name: &str) -> Option<WorkloadProfile> {
    let text = match name {
        "avss3" => AVSS3,
        "avss6" => AVSS6,
        _ => return None,
    };
    Some(parse_profile(text).expect("shipped profile is valid"))
}

pub fn load_profile(path: &Path) -> Result<WorkloadProfile, ScenarioFileError> {
    parse_profile(&read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse() {
        for name in BUILTIN {
            let p = builtin(name).unwrap();
            assert_eq!(p.name, name);
        }
        assert_eq!(builtin("avss3").unwrap().stages.len(), 3);
        assert_eq!(builtin("avss6").unwrap().stages.len(), 6);
        assert!(builtin("nope").is_none());
    }

    #[test]
    fn write_then_parse_is_identity() {
        for name in BUILTIN {
            let p = builtin(name).unwrap();
            assert_eq!(parse_profile(&write_profile(&p)).unwrap(), p);
        }
    }

    #[test]
    fn unknown_stage_is_rejected() {
        let text = "name = \"x\"\n[[stages]]\nstage = \"juggling\"\nwork_per_mb = 1\noutput_kb_per_mb = 1\ndeadline_base = 1\n";
        assert!(matches!(parse_profile(text), Err(ScenarioFileError::Profile(_))));
    }
}
