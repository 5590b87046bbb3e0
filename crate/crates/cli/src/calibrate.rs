//! Fitting the three-stage profile to target improvements.
//!
//! Two numbers are free: tracking's work per MB and detection's fixed setup
//! work. Everything else in the profile is held. Tracking's deadline follows
//! its work so that only the fastest node can meet it:
//!
//! ```text
//! deadline_per_mb = slack * (work_per_mb / fastest_power + transfer_per_mb)
//! ```
//!
//! where `transfer_per_mb` is tracking's input plus output per MB moved at
//! the default link bandwidth. The fit then solves
//! `improvement(m) = target(m)` at two input sizes with [`solve2`].

use adhoc_cloud_core::cost::kb_to_megabits;
use adhoc_cloud_core::model::Scenario;
use adhoc_cloud_core::sim::{build_avss_workload, run_scenario, solve2, CalibrationError, RunError, RunOptions, Solution, Stage, WorkloadProfile};

/// Deadline head-room over the fastest node's estimate.
pub const TRACKING_SLACK: f64 = 1.25;

#[derive(Debug, Clone, PartialEq)]
pub struct Targets {
    pub sizes_mb: [f64; 2],
    /// Fractions, e.g. 0.17.
    pub improvements: [f64; 2],
}

impl Default for Targets {
    fn default() -> Self {
        Self {
            sizes_mb: [30.0, 50.0],
            improvements: [0.17, 0.20],
        }
    }
}

/// `template` with tracking work and detection setup replaced by `x`.
pub fn apply(template: &WorkloadProfile, s: &Scenario, x: [f64; 2]) -> WorkloadProfile {
    let fastest = s.nodes.iter().map(|n| n.processing_power).fold(0.0, f64::max);
    let detection_out = template.stage(Stage::Detection).map_or(0.0, |d| d.output_kb_per_mb);
    let mut p = template.clone();
    for st in &mut p.stages {
        match st.stage {
            Stage::Tracking => {
                let per_mb = kb_to_megabits(detection_out + st.output_kb_per_mb) / s.params.default_bandwidth;
                st.work_per_mb = x[0];
                st.deadline_base = 0.0;
                st.deadline_per_mb = TRACKING_SLACK * (x[0] / fastest + per_mb);
            }
            Stage::Detection => st.setup_work = x[1],
            _ => {}
        }
    }
    p
}

/// Improvement over the single-node baseline at each target size.
pub fn improvements(profile: &WorkloadProfile, s: &Scenario, sizes: [f64; 2]) -> Result<[f64; 2], RunError> {
    let mut out = [0.0; 2];
    for (o, mb) in out.iter_mut().zip(sizes) {
        let mut sc = s.clone();
        sc.workload = build_avss_workload(mb, profile).map_err(|e| {
            RunError::Invalid(adhoc_cloud_core::ValidationError {
                path: "workload".into(),
                message: e.to_string(),
            })
        })?;
        let r = run_scenario(&sc, RunOptions { trace: false })?.report;
        if !r.feasible {
            return Err(RunError::Invalid(adhoc_cloud_core::ValidationError {
                path: "workload".into(),
                message: format!("infeasible at {mb} MB"),
            }));
        }
        *o = r.improvement();
    }
    Ok(out)
}

/// Solves for `[tracking work_per_mb, detection setup_work]`.
pub fn fit(template: &WorkloadProfile, s: &Scenario, targets: &Targets, x0: [f64; 2]) -> Result<(WorkloadProfile, Solution), CalibrationError<RunError>> {
    let sol = solve2(
        |x| improvements(&apply(template, s, x), s, targets.sizes_mb),
        x0,
        targets.improvements,
        [0.05, 1.0],
        1e-6,
        60,
    )?;
    Ok((apply(template, s, sol.x), sol))
}
