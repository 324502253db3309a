use serde::{Deserialize, Serialize};

use crate::channel::{end_to_end_outage, link_outage, LinkGeometry, QosParams};
use crate::power::{link_energy, MessageSpec};
use crate::topo::{Point, Topology};

use super::{Endpoint, RoutePlan};

/// Slack on the end-to-end outage check.
pub const OUTAGE_SLACK: f64 = 1e-9;
/// Relative tolerance on the energy total.
pub const ENERGY_RTOL: f64 = 1e-9;

/// Independent recomputation of a plan from geometry and hop powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub chain_ok: bool,
    pub outage_ok: bool,
    pub power_ok: bool,
    pub energy_ok: bool,
    pub recomputed_outage: f64,
    pub recomputed_energy_j: f64,
    pub failures: Vec<String>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.chain_ok && self.outage_ok && self.power_ok && self.energy_ok
    }
}

fn position(topology: &Topology, e: &Endpoint) -> Option<Point> {
    match *e {
        Endpoint::Node(id) => topology.node(id).map(|n| n.pos()),
        Endpoint::Road([x, y]) => Some(Point::new(x, y)),
    }
}

/// Re-derives every counted hop's outage and energy and checks the plan
/// against the outage budget, the power cap and its own energy total.
pub fn audit_route(plan: &RoutePlan, topology: &Topology, q: &QosParams, msg: &MessageSpec) -> AuditReport {
    let mut failures = Vec::new();

    let mut chain_ok = !plan.hops.is_empty();
    if let (Some(first), Some(last)) = (plan.hops.first(), plan.hops.last()) {
        if first.from != Endpoint::Node(topology.source_id) {
            failures.push("route does not start at the source".to_string());
            chain_ok = false;
        }
        if last.to != Endpoint::Node(topology.dest_id) {
            failures.push("route does not end at the destination".to_string());
            chain_ok = false;
        }
    } else {
        failures.push("route has no hops".to_string());
    }
    for (i, pair) in plan.hops.windows(2).enumerate() {
        if pair[0].to != pair[1].from {
            failures.push(format!("hop {} does not continue from hop {}", i + 1, i));
            chain_ok = false;
        }
    }

    let mut power_ok = true;
    let mut outage_ok = true;
    let mut outages = Vec::new();
    let mut energy = 0.0;
    for (i, hop) in plan.hops.iter().enumerate().filter(|(_, h)| h.counted) {
        if !matches!(hop.from, Endpoint::Node(_)) {
            failures.push(format!("counted hop {i} is not transmitted by a node"));
            chain_ok = false;
        }
        if !(hop.power_w > 0.0) || hop.power_w > q.p_max {
            failures.push(format!("hop {i} power {} W outside (0, {}]", hop.power_w, q.p_max));
            power_ok = false;
        }
        let (Some(tx), Some(rx)) = (position(topology, &hop.from), position(topology, &hop.to)) else {
            failures.push(format!("hop {i} references an unknown node"));
            chain_ok = false;
            continue;
        };
        let link = LinkGeometry::between(tx, rx, &topology.jammers);
        match link_outage(hop.power_w, &link, q) {
            Ok(p) => outages.push(p),
            Err(_) => {
                outages.push(1.0);
                outage_ok = false;
            }
        }
        energy += link_energy(hop.power_w, msg);
    }

    let recomputed_outage = end_to_end_outage(&outages);
    if recomputed_outage > q.outage_budget + OUTAGE_SLACK {
        failures.push(format!(
            "end-to-end outage {recomputed_outage} exceeds budget {}",
            q.outage_budget
        ));
        outage_ok = false;
    }
    let scale = energy.abs().max(plan.total_energy_j.abs()).max(f64::MIN_POSITIVE);
    let energy_ok = (energy - plan.total_energy_j).abs() <= ENERGY_RTOL * scale;
    if !energy_ok {
        failures.push(format!(
            "recomputed energy {energy} J differs from plan total {} J",
            plan.total_energy_j
        ));
    }

    AuditReport {
        chain_ok,
        outage_ok,
        power_ok,
        energy_ok,
        recomputed_outage,
        recomputed_energy_j: energy,
        failures,
    }
}
