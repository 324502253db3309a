//! Minimum-energy route planning.
//!
//! With a vehicle on the road, a route is split into `n` hops in plane A
//! (the last one an uplink to the vehicle at a road point), a zero-energy
//! carry along the road, and `m − n` hops in plane B starting at a node the
//! vehicle hands the message to. Every counted hop gets the same outage share
//! `1 − (1 − T)^(1/m)`, so for fixed `m` each plane is an independent
//! hop-indexed dynamic program; the outer loop searches all `(m, n)`.
//!
//! The baseline does the same over all nodes without the vehicle.

mod audit;
mod dp;
mod network;
mod oracle;

use serde::{Deserialize, Serialize};

use crate::channel::{end_to_end_outage, LinkGeometry, QosParams};
use crate::error::{Error, Result};
use crate::power::{min_power_for_outage, per_link_target, MessageSpec, SolverOptions};
use crate::topo::{Jammer, Point, Topology};

pub use audit::{audit_route, AuditReport};
pub use dp::DpTable;
pub use oracle::{brute_force_plan, DEFAULT_SEQUENCE_LIMIT};

use network::{scan_handoff, Network};

/// How the uplink road point is chosen for a plane-A node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HandoffRule {
    /// Road point needing the least transmit power at the per-link target.
    #[default]
    MinPower,
    /// Road point with the largest outage at the power cap (literal argmax
    /// reading; kept for comparison only).
    MaxOutage,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlannerOptions {
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub handoff_rule: HandoffRule,
    /// Upper bound on the total hop count, on top of `N − 1`.
    #[serde(default)]
    pub max_hops: Option<usize>,
}

/// A hop endpoint: a node id or a road position `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Endpoint {
    Node(usize),
    Road([f64; 2]),
}

impl Endpoint {
    pub fn road(p: Point) -> Self {
        Endpoint::Road([p.x, p.y])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hop {
    pub from: Endpoint,
    pub to: Endpoint,
    pub power_w: f64,
    pub outage: f64,
    pub energy_j: f64,
    /// Whether the hop is a node transmission charged to the network and to
    /// the outage budget. Vehicle carry and delivery hops are not.
    pub counted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HopSplit {
    pub m: usize,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanMode {
    Vehicle,
    Baseline,
}

impl PlanMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            PlanMode::Vehicle => "vehicle",
            PlanMode::Baseline => "baseline",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutePlan {
    pub mode: PlanMode,
    pub hops: Vec<Hop>,
    pub total_energy_j: f64,
    pub hop_split: Option<HopSplit>,
    pub handoff_point: Option<Point>,
    pub per_link_target: f64,
    pub end_to_end_outage: f64,
}

impl RoutePlan {
    /// Number of counted hops, i.e. `m`.
    pub fn hop_count(&self) -> usize {
        self.hops.iter().filter(|h| h.counted).count()
    }

    fn finish(mode: PlanMode, hops: Vec<Hop>, hop_split: Option<HopSplit>, handoff_point: Option<Point>, target: f64) -> Self {
        let total_energy_j = hops.iter().filter(|h| h.counted).map(|h| h.energy_j).sum();
        let outages: Vec<f64> = hops.iter().filter(|h| h.counted).map(|h| h.outage).collect();
        RoutePlan {
            mode,
            hops,
            total_energy_j,
            hop_split,
            handoff_point,
            per_link_target: target,
            end_to_end_outage: end_to_end_outage(&outages),
        }
    }
}

/// Uplink choice of a plane-A node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Handoff {
    pub road_index: usize,
    pub point: Point,
    pub power: f64,
}

/// Best `n`-hop route from the source to the vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneAPath {
    pub cost: f64,
    /// Node ids from the source to the uplinking node.
    pub nodes: Vec<usize>,
    /// Powers of the node-to-node hops.
    pub powers: Vec<f64>,
    pub handoff: Handoff,
}

/// Best `k`-hop route from a handoff candidate to the destination.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneBPath {
    pub cost: f64,
    /// Node ids from the handoff candidate to the destination.
    pub nodes: Vec<usize>,
    pub powers: Vec<f64>,
}

fn check_target(target: f64) -> Result<()> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::domain(format!("per-link target must lie in (0, 1), got {target}")));
    }
    Ok(())
}

/// Chooses the road point for the uplink from `from`, scanning `road_points`
/// in order.
pub fn select_handoff(
    from: Point,
    road_points: &[Point],
    jammers: &[Jammer],
    per_link_target: f64,
    q: &QosParams,
    opts: &PlannerOptions,
) -> Result<Option<Handoff>> {
    check_target(per_link_target)?;
    q.validate()?;
    opts.solver.validate(q.p_max)?;
    let profiles: Vec<Vec<f64>> = road_points
        .iter()
        .map(|r| {
            let mut w = Vec::with_capacity(jammers.len());
            crate::channel::push_weights(&mut w, &LinkGeometry::between(from, *r, jammers), q.alpha);
            w
        })
        .collect();
    Ok(
        scan_handoff(road_points.len(), |r| profiles[r].as_slice(), per_link_target, q, opts).map(|(r, power)| Handoff {
            road_index: r,
            point: road_points[r],
            power,
        }),
    )
}

/// Per-`m` state shared by the vehicle planners.
struct VehicleStage {
    dp_a: DpTable,
    dp_b: DpTable,
    links_a: network::LinkTable,
    links_b: network::LinkTable,
    handoffs: Vec<Option<Handoff>>,
    dst_local: usize,
}

impl VehicleStage {
    fn build(net: &Network, target: f64, hops_a: usize, hops_b: usize) -> Self {
        let links_a = net.link_table(&net.plane_a, target);
        let links_b = net.link_table(&net.plane_b, target);
        let handoffs = net.plane_a.iter().map(|&u| net.handoff(u, target)).collect();
        let src_local = net.plane_a.iter().position(|&i| i == net.src).expect("source in plane A");
        let dst_local = net.plane_b.iter().position(|&i| i == net.dst).expect("destination in plane B");
        let theta_local: Vec<usize> = net
            .theta
            .iter()
            .map(|t| net.plane_b.iter().position(|i| i == t).expect("candidates are in plane B"))
            .collect();
        let ids_a = net.plane_a.iter().map(|&i| net.id(i)).collect();
        let ids_b = net.plane_b.iter().map(|&i| net.id(i)).collect();
        VehicleStage {
            dp_a: DpTable::run(ids_a, &[src_local], &links_a, net.duration, hops_a),
            dp_b: DpTable::run(ids_b, &theta_local, &links_b, net.duration, hops_b),
            links_a,
            links_b,
            handoffs,
            dst_local,
        }
    }

    /// Cheapest `n`-hop route into the vehicle: `(cost, uplinking local index)`.
    fn best_a(&self, n: usize, duration: f64) -> Option<(f64, usize)> {
        let mut best: Option<(f64, usize)> = None;
        for (u, handoff) in self.handoffs.iter().enumerate() {
            let Some(handoff) = handoff else { continue };
            let before = self.dp_a.cost_local(u, n - 1);
            if !before.is_finite() {
                continue;
            }
            let cost = before + handoff.power * duration;
            if best.is_none_or(|(c, _)| cost < c) {
                best = Some((cost, u));
            }
        }
        best
    }

    fn cost_b(&self, k: usize) -> f64 {
        self.dp_b.cost_local(self.dst_local, k)
    }

    fn path_a(&self, net: &Network, n: usize, u: usize) -> PlaneAPath {
        let walk = self.dp_a.walk_local(u, n - 1).expect("finite cost has a walk");
        let powers = walk.windows(2).map(|w| self.links_a.power(w[0], w[1]).expect("walk uses feasible links")).collect();
        PlaneAPath {
            cost: self.best_a(n, net.duration).map(|(c, _)| c).unwrap_or(f64::INFINITY),
            nodes: walk.iter().map(|&i| net.id(net.plane_a[i])).collect(),
            powers,
            handoff: self.handoffs[u].expect("chosen node has a handoff"),
        }
    }

    fn path_b(&self, net: &Network, k: usize) -> Option<PlaneBPath> {
        let walk = self.dp_b.walk_local(self.dst_local, k)?;
        let powers = walk.windows(2).map(|w| self.links_b.power(w[0], w[1]).expect("walk uses feasible links")).collect();
        Some(PlaneBPath {
            cost: self.cost_b(k),
            nodes: walk.iter().map(|&i| net.id(net.plane_b[i])).collect(),
            powers,
        })
    }
}

/// Algorithm for plane A: cheapest `n`-hop route from the source to the
/// vehicle, the last hop being the uplink. `None` when infeasible.
pub fn plan_plane_a(
    topology: &Topology,
    n: usize,
    per_link_target: f64,
    q: &QosParams,
    msg: &MessageSpec,
    opts: &PlannerOptions,
) -> Result<Option<PlaneAPath>> {
    if n == 0 {
        return Err(Error::domain("plane-A hop count must be at least 1"));
    }
    check_target(per_link_target)?;
    let net = Network::new(topology, q, msg, opts)?;
    let stage = VehicleStage::build(&net, per_link_target, n - 1, 0);
    Ok(stage.best_a(n, net.duration).map(|(_, u)| stage.path_a(&net, n, u)))
}

/// Algorithm for plane B: cheapest `k`-hop route from any handoff candidate
/// to the destination. The vehicle's own transmission is not included.
pub fn plan_plane_b(
    topology: &Topology,
    k: usize,
    per_link_target: f64,
    q: &QosParams,
    msg: &MessageSpec,
    opts: &PlannerOptions,
) -> Result<Option<PlaneBPath>> {
    if k == 0 {
        return Err(Error::domain("plane-B hop count must be at least 1"));
    }
    check_target(per_link_target)?;
    let net = Network::new(topology, q, msg, opts)?;
    let stage = VehicleStage::build(&net, per_link_target, 0, k);
    Ok(stage.path_b(&net, k))
}

fn node_hop(net: &Network, from: usize, to: usize, power: f64) -> Hop {
    Hop {
        from: Endpoint::Node(net.id(from)),
        to: Endpoint::Node(net.id(to)),
        power_w: power,
        outage: net.link_outage(from, to, power),
        energy_j: power * net.duration,
        counted: true,
    }
}

/// Builds the vehicle plan from its pieces; shared by the DP and the oracle.
fn assemble_vehicle(net: &Network, split: HopSplit, target: f64, a: &PlaneAPath, b: &PlaneBPath) -> RoutePlan {
    let index = |id: usize| net.topo.index_of(id).expect("plan ids exist");
    let mut hops = Vec::with_capacity(split.m + 2);
    for (w, &power) in a.nodes.windows(2).zip(&a.powers) {
        hops.push(node_hop(net, index(w[0]), index(w[1]), power));
    }
    let uplinker = index(*a.nodes.last().expect("plane-A walk starts at the source"));
    let pickup = a.handoff;
    hops.push(Hop {
        from: Endpoint::Node(net.id(uplinker)),
        to: Endpoint::road(pickup.point),
        power_w: pickup.power,
        outage: net.uplink_outage(uplinker, pickup.road_index, pickup.power),
        energy_j: pickup.power * net.duration,
        counted: true,
    });

    let sigma = index(b.nodes[0]);
    let drop = net.delivery_point(sigma);
    let drop_point = net.topo.road_points[drop];
    if drop != pickup.road_index {
        hops.push(Hop {
            from: Endpoint::road(pickup.point),
            to: Endpoint::road(drop_point),
            power_w: 0.0,
            outage: 0.0,
            energy_j: 0.0,
            counted: false,
        });
    }
    // The vehicle has no power cap; record what it would need at the same share.
    let vehicle_q = net.q.with_p_max(f64::INFINITY);
    let delivery = LinkGeometry::between(drop_point, net.pos(sigma), &net.topo.jammers);
    let solved = min_power_for_outage(target, &delivery, &vehicle_q, &net.opts.solver).expect("validated inputs");
    hops.push(Hop {
        from: Endpoint::road(drop_point),
        to: Endpoint::Node(net.id(sigma)),
        power_w: solved.power().unwrap_or(f64::INFINITY),
        outage: solved.achieved_outage(),
        energy_j: 0.0,
        counted: false,
    });

    for (w, &power) in b.nodes.windows(2).zip(&b.powers) {
        hops.push(node_hop(net, index(w[0]), index(w[1]), power));
    }
    RoutePlan::finish(PlanMode::Vehicle, hops, Some(split), Some(pickup.point), target)
}

fn assemble_baseline(net: &Network, target: f64, nodes: &[usize], powers: &[f64]) -> RoutePlan {
    let index = |id: usize| net.topo.index_of(id).expect("plan ids exist");
    let hops = nodes
        .windows(2)
        .zip(powers)
        .map(|(w, &p)| node_hop(net, index(w[0]), index(w[1]), p))
        .collect();
    RoutePlan::finish(PlanMode::Baseline, hops, None, None, target)
}

/// Full search over hop splits `(m, n)`, `m = 2 … N − 1`, with the vehicle
/// relaying between the planes. `None` when no split is feasible.
pub fn plan_with_vehicle(topology: &Topology, q: &QosParams, msg: &MessageSpec, opts: &PlannerOptions) -> Result<Option<RoutePlan>> {
    let net = Network::new(topology, q, msg, opts)?;
    let mut best: Option<(f64, HopSplit, f64, usize, VehicleStage)> = None;
    for m in 2..=net.hop_limit() {
        let target = per_link_target(q.outage_budget, m)?;
        let stage = VehicleStage::build(&net, target, m - 2, m - 1);
        let mut stage_best: Option<(f64, usize, usize)> = None;
        for n in 1..m {
            let Some((cost_a, u)) = stage.best_a(n, net.duration) else { continue };
            let cost_b = stage.cost_b(m - n);
            if !cost_b.is_finite() {
                continue;
            }
            let total = cost_a + cost_b;
            if stage_best.is_none_or(|(c, _, _)| total < c) {
                stage_best = Some((total, n, u));
            }
        }
        if let Some((total, n, u)) = stage_best {
            if best.as_ref().is_none_or(|(c, ..)| total < *c) {
                best = Some((total, HopSplit { m, n }, target, u, stage));
            }
        }
    }
    Ok(best.map(|(_, split, target, u, stage)| {
        let a = stage.path_a(&net, split.n, u);
        let b = stage.path_b(&net, split.m - split.n).expect("feasible split has a plane-B walk");
        assemble_vehicle(&net, split, target, &a, &b)
    }))
}

/// Hop-indexed table over all nodes from the source, at a fixed per-link target.
pub fn baseline_dp_table(
    topology: &Topology,
    hops: usize,
    per_link_target: f64,
    q: &QosParams,
    msg: &MessageSpec,
    opts: &PlannerOptions,
) -> Result<DpTable> {
    check_target(per_link_target)?;
    let net = Network::new(topology, q, msg, opts)?;
    let all: Vec<usize> = (0..net.node_count()).collect();
    let links = net.link_table(&all, per_link_target);
    let ids = all.iter().map(|&i| net.id(i)).collect();
    Ok(DpTable::run(ids, &[net.src], &links, net.duration, hops))
}

/// Minimum-energy route without the vehicle, `m = 1 … N − 1` hops over all nodes.
pub fn plan_without_vehicle(topology: &Topology, q: &QosParams, msg: &MessageSpec, opts: &PlannerOptions) -> Result<Option<RoutePlan>> {
    let net = Network::new(topology, q, msg, opts)?;
    let all: Vec<usize> = (0..net.node_count()).collect();
    let ids: Vec<usize> = all.iter().map(|&i| net.id(i)).collect();
    let mut best: Option<(f64, f64, Vec<usize>, Vec<f64>)> = None;
    for m in 1..=net.hop_limit() {
        let target = per_link_target(q.outage_budget, m)?;
        let links = net.link_table(&all, target);
        let table = DpTable::run(ids.clone(), &[net.src], &links, net.duration, m);
        let cost = table.cost_local(net.dst, m);
        if !cost.is_finite() || best.as_ref().is_some_and(|(c, ..)| cost >= *c) {
            continue;
        }
        let walk = table.walk_local(net.dst, m).expect("finite cost has a walk");
        let powers = walk.windows(2).map(|w| links.power(w[0], w[1]).expect("feasible")).collect();
        best = Some((cost, target, walk.iter().map(|&i| net.id(i)).collect(), powers));
    }
    Ok(best.map(|(_, target, nodes, powers)| assemble_baseline(&net, target, &nodes, &powers)))
}

#[cfg(test)]
mod tests;
