//! Mobile ad hoc cloud: a virtual compute cluster built from nearby mobile
//! devices.
//!
//! The crate is `no_std` (with `alloc`) and contains everything that does not
//! touch a filesystem:
//!
//! * [`model`]: validated domain types (nodes, tasks, links, scenarios).
//! * [`cost`]: execution-time, transfer-time and energy estimates.
//! * [`scheduler`]: deadline-filtered, energy-minimising task allocation and
//!   its brute-force oracle.
//! * [`group`]: device discovery and group-owner negotiation.
//! * [`routing`]: the routing layer that gives group clients and separate
//!   groups multi-hop connectivity.
//! * [`sim`]: the discrete-event engine, the video-surveillance workload
//!   builder, scenario execution and profile calibration.
//!
//! File formats, trace files and the command line live in the `adhoc-cloud`
//! crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cost;
pub mod group;
pub mod model;
pub mod rng;
pub mod routing;
pub mod scheduler;
pub mod sim;
pub mod trace;

pub use model::{
    GroupSpec, LinkSpec, NodeId, NodeSpec, Position, Scenario, ScenarioEvent, SimParams, TaskGraph,
    TaskId, TaskSpec, ValidationError,
};
