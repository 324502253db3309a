//! Shared fixtures for the benchmarks.

use jamroute_core::{generate_topology, MessageSpec, QosParams, Topology, TopologyConfig};

/// Reference-field topology with `nodes` nodes and 17 jammers at 0.1 W.
pub fn fixture(nodes: usize, seed: u64) -> Topology {
    generate_topology(&TopologyConfig::reference(nodes, 17, seed), 0.1).expect("reference field generates")
}

/// Path-loss 2, 0.1 bit/s/Hz, 10 % outage budget, 15 W cap.
pub fn reference_qos() -> QosParams {
    QosParams::new(0.1, 2.0, 0.1, 15.0).expect("valid parameters")
}

/// L/ρ = 1 s at the reference rate.
pub fn reference_message() -> MessageSpec {
    MessageSpec::new(0.1, 0.1).expect("valid message")
}
