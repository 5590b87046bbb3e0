//! Scenario files, reports, traces and the `adhoc-cloud` command line on
//! top of [`adhoc_cloud_core`].

pub mod app;
pub mod calibrate;
pub mod profile;
pub mod report;
pub mod scenario_file;
pub mod trace_check;

pub use scenario_file::{parse_scenario, parse_scenario_str, write_scenario, ParseOptions, ParsedScenario, ScenarioFileError};
