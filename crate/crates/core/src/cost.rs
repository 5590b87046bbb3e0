//! Cost estimation: execution time, data transfer time, energy and packet
//! counts for running a task on a node.
//!
//! ```text
//! EE  = size / power + DTT
//! DTT = input / B + output / B
//! EEC = a * size / power + b * packets
//! packets = ceil(input / packet_size) + ceil(output / packet_size)
//! ```

use core::fmt;

use crate::model::{NodeSpec, TaskSpec};

/// Kilobits per kilobyte.
pub const KILOBITS_PER_KB: f64 = 8.0;
/// Kilobits per megabit.
pub const KILOBITS_PER_MEGABIT: f64 = 1000.0;
/// Kilobytes per megabyte.
pub const KB_PER_MB: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostError {
    InvalidArgument(&'static str),
}

impl fmt::Display for CostError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostError::InvalidArgument(what) => write!(f, "invalid argument: {what}"),
        }
    }
}

pub fn kb_to_megabits(kb: f64) -> f64 {
    kb * KILOBITS_PER_KB / KILOBITS_PER_MEGABIT
}

/// Packets needed for `data` KB. Quotients within 1e-9 (relative) of an
/// integer count as that integer so that `0.3 / 0.1` is 3 packets, not 4.
fn frames(data: f64, packet_size: f64) -> u64 {
    let q = data / packet_size;
    let nearest = libm::round(q);
    let whole = if libm::fabs(q - nearest) <= 1e-9 * q.max(1.0) {
        nearest
    } else {
        libm::ceil(q)
    };
    whole as u64
}

pub fn packet_count(input_data: f64, output_data: f64, packet_size: f64) -> Result<u64, CostError> {
    if !(packet_size > 0.0) || !packet_size.is_finite() {
        return Err(CostError::InvalidArgument("packet_size must be > 0"));
    }
    if !(input_data >= 0.0) || !(output_data >= 0.0) {
        return Err(CostError::InvalidArgument("data sizes must be >= 0"));
    }
    Ok(frames(input_data, packet_size) + frames(output_data, packet_size))
}

/// Seconds to move `input_data` and `output_data` KB over a channel of
/// `bandwidth` Mbps.
pub fn data_transfer_time(input_data: f64, output_data: f64, bandwidth: f64) -> Result<f64, CostError> {
    if !(bandwidth > 0.0) {
        return Err(CostError::InvalidArgument("bandwidth must be > 0"));
    }
    Ok(kb_to_megabits(input_data) / bandwidth + kb_to_megabits(output_data) / bandwidth)
}

pub fn execution_time_estimate(task: &TaskSpec, node: &NodeSpec, transfer_time: f64) -> f64 {
    task.size / node.processing_power + transfer_time
}

pub fn energy_estimate(task: &TaskSpec, node: &NodeSpec, packet_size: f64) -> Result<f64, CostError> {
    let packets = packet_count(task.input_data, task.output_data, packet_size)?;
    Ok(node.proc_energy_rate * (task.size / node.processing_power)
        + node.tx_energy_per_packet * packets as f64)
}

/// How a candidate node is reached from the node holding the input data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reach {
    /// The data is already there.
    Local,
    /// Bottleneck bandwidth (Mbps) of the route.
    Remote(f64),
    Unreachable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEstimate {
    /// Seconds, transfer included.
    pub execution_time: f64,
    pub transfer_time: f64,
    pub energy: f64,
    pub packets: u64,
}

/// All four estimates for `task` on `node`. Unreachable nodes get infinite
/// transfer and execution time.
pub fn estimate(task: &TaskSpec, node: &NodeSpec, reach: Reach, packet_size: f64) -> Result<CostEstimate, CostError> {
    let transfer_time = match reach {
        Reach::Local => 0.0,
        Reach::Remote(bw) => data_transfer_time(task.input_data, task.output_data, bw)?,
        Reach::Unreachable => f64::INFINITY,
    };
    Ok(CostEstimate {
        execution_time: execution_time_estimate(task, node, transfer_time),
        transfer_time,
        energy: energy_estimate(task, node, packet_size)?,
        packets: packet_count(task.input_data, task.output_data, packet_size)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NodeSpec;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn packet_count_examples() {
        assert_eq!(packet_count(1500.0, 750.0, 1.5), Ok(1500));
        assert_eq!(packet_count(0.0, 0.0, 1.5), Ok(0));
        assert_eq!(packet_count(1.6, 0.0, 1.5), Ok(2));
        assert_eq!(packet_count(0.3, 0.0, 0.1), Ok(3));
    }

    #[test]
    fn packet_count_rejects_bad_packet_size() {
        assert!(packet_count(1.0, 1.0, 0.0).is_err());
        assert!(packet_count(1.0, 1.0, -1.5).is_err());
        assert!(packet_count(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn transfer_time_examples() {
        assert_eq!(data_transfer_time(0.0, 0.0, 250.0), Ok(0.0));
        // 30000 KB = 240 Mb; 240 / 250.
        let expected = (30_000.0 * 8.0 / 1000.0) / 250.0;
        assert!(close(data_transfer_time(30_000.0, 0.0, 250.0).unwrap(), expected));
        assert!(close(expected, 0.96));
        // 2 x 80 Mb over 100 Mbps.
        assert!(close(data_transfer_time(10_000.0, 10_000.0, 100.0).unwrap(), 1.6));
        assert!(data_transfer_time(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn execution_time_examples() {
        let task = TaskSpec::new(1, "t", 100.0, 0.0, 0.0, 10.0);
        let node = NodeSpec::basic(1, 50.0);
        assert_eq!(execution_time_estimate(&task, &node, 0.0), 2.0);
        assert!(close(execution_time_estimate(&task, &node, 0.96), 2.96));
    }

    #[test]
    fn energy_examples() {
        let task = TaskSpec::new(1, "t", 100.0, 1500.0, 0.0, 10.0);
        let zero = NodeSpec::basic(1, 50.0);
        assert_eq!(energy_estimate(&task, &zero, 1.5), Ok(0.0));

        let node = NodeSpec {
            proc_energy_rate: 1.5,
            tx_energy_per_packet: 0.002,
            ..NodeSpec::basic(1, 50.0)
        };
        // 1.5 * 2 s + 0.002 * 1000 packets
        assert!(close(energy_estimate(&task, &node, 1.5).unwrap(), 5.0));

        let local = TaskSpec::new(2, "t", 100.0, 0.0, 0.0, 10.0);
        assert_eq!(energy_estimate(&local, &node, 1.5), Ok(1.5 * 100.0 / 50.0));
    }

    #[test]
    fn estimate_respects_reach() {
        let task = TaskSpec::new(1, "t", 100.0, 30_000.0, 0.0, 10.0);
        let node = NodeSpec::basic(1, 50.0);
        let local = estimate(&task, &node, Reach::Local, 1.5).unwrap();
        assert_eq!(local.transfer_time, 0.0);
        assert_eq!(local.execution_time, 2.0);
        assert_eq!(local.packets, 20_000);
        let remote = estimate(&task, &node, Reach::Remote(250.0), 1.5).unwrap();
        assert!(close(remote.execution_time, 2.96));
        assert!(remote.execution_time >= remote.transfer_time);
        let far = estimate(&task, &node, Reach::Unreachable, 1.5).unwrap();
        assert!(far.execution_time.is_infinite());
    }

    proptest! {
        #[test]
        fn energy_is_monotone_in_task_shape(
            size in 0.1f64..1e4, extra in 0.0f64..1e4,
            input in 0.0f64..1e5, output in 0.0f64..1e5, more in 0.0f64..1e5,
            a in 0.0f64..10.0, b in 0.0f64..0.1, pkt in 0.1f64..10.0, power in 1.0f64..1e4,
        ) {
            let node = NodeSpec { proc_energy_rate: a, tx_energy_per_packet: b, ..NodeSpec::basic(1, power) };
            let base = TaskSpec::new(1, "t", size, input, output, 1.0);
            let e0 = energy_estimate(&base, &node, pkt).unwrap();
            for bigger in [
                TaskSpec { size: size + extra, ..base.clone() },
                TaskSpec { input_data: input + more, ..base.clone() },
                TaskSpec { output_data: output + more, ..base.clone() },
            ] {
                prop_assert!(energy_estimate(&bigger, &node, pkt).unwrap() >= e0);
            }
        }

        #[test]
        fn execution_time_non_increasing_in_power(
            size in 0.1f64..1e4, p in 1.0f64..1e4, dp in 0.0f64..1e4, dtt in 0.0f64..100.0,
        ) {
            let task = TaskSpec::new(1, "t", size, 0.0, 0.0, 1.0);
            let slow = NodeSpec::basic(1, p);
            let fast = NodeSpec::basic(2, p + dp);
            prop_assert!(execution_time_estimate(&task, &fast, dtt) <= execution_time_estimate(&task, &slow, dtt));
        }

        #[test]
        fn transfer_time_is_additive(a in 0.0f64..1e6, b in 0.0f64..1e6, bw in 0.1f64..1e4) {
            let whole = data_transfer_time(a, b, bw).unwrap();
            let parts = data_transfer_time(a, 0.0, bw).unwrap() + data_transfer_time(0.0, b, bw).unwrap();
            prop_assert!((whole - parts).abs() <= 1e-12 * whole.abs().max(1e-300));
        }

        #[test]
        fn packet_count_is_symmetric(x in 0.0f64..1e6, y in 0.0f64..1e6, p in 0.01f64..100.0) {
            prop_assert_eq!(packet_count(x, y, p), packet_count(y, x, p));
        }
    }
}
