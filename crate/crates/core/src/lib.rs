//! Minimum-energy multi-hop routing in jammed wireless ad-hoc networks, with
//! and without a vehicle on a straight road acting as a store-carry-forward
//! relay.
//!
//! - [`topo`]: random topologies, road geometry and the plane split.
//! - [`channel`]: SIR outage under Rayleigh fading and its Monte Carlo check.
//! - [`power`]: outage targets to transmit powers and energies.
//! - [`planner`]: the hop-indexed dynamic programs, the exhaustive oracle and
//!   route auditing.
//! - [`expt`]: configuration files, seeded runs and parameter sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod expt;
pub mod planner;
pub mod power;
pub mod topo;

pub use channel::{
    approx_link_outage, end_to_end_outage, link_outage, mc_link_outage, sir_threshold, InterferenceProfile,
    JammerLink, LinkGeometry, QosParams,
};
pub use error::{Error, Result};
pub use planner::{
    audit_route, baseline_dp_table, brute_force_plan, plan_plane_a, plan_plane_b, plan_with_vehicle,
    plan_without_vehicle, select_handoff, AuditReport, DpTable, Endpoint, Handoff, HandoffRule, Hop, HopSplit,
    PlanMode, PlannerOptions, RoutePlan,
};
pub use power::{
    link_energy, min_power_for_outage, per_link_target, MessageSpec, PowerSolveResult, SolverMode, SolverOptions,
};
pub use topo::{
    discretize_road, distance, generate_topology, handoff_candidates, plane_of, Area, Jammer, Node, Plane, Point,
    PointCount, RoadLine, Topology, TopologyConfig,
};
