use crate::channel::{outage_from_weights, push_weights, LinkGeometry, QosParams};
use crate::error::{Error, Result};
use crate::power::{power_bounds, solve_weights, MessageSpec, PowerSolveResult, SolverOptions, SolverMode};
use crate::topo::{nearest_plane_b, Plane, Point, Topology};

use super::{Handoff, HandoffRule, PlannerOptions};

/// Precomputed interference weights for every node pair and every
/// node → road-point link of one topology. Link powers at a given per-link
/// target are solved from these without touching the geometry again.
pub(crate) struct Network<'a> {
    pub topo: &'a Topology,
    pub q: QosParams,
    pub duration: f64,
    pub opts: PlannerOptions,
    jammer_count: usize,
    pair_weights: Vec<f64>,
    road_weights: Vec<f64>,
    pub plane_a: Vec<usize>,
    pub plane_b: Vec<usize>,
    /// Node index of the nearest plane-B node, per road point.
    pub nearest_b: Vec<usize>,
    /// Handoff candidates as node indices, ascending.
    pub theta: Vec<usize>,
    pub src: usize,
    pub dst: usize,
}

impl<'a> Network<'a> {
    pub fn new(topo: &'a Topology, q: &QosParams, msg: &MessageSpec, opts: &PlannerOptions) -> Result<Self> {
        q.validate()?;
        opts.solver.validate(q.p_max)?;
        let src = topo
            .index_of(topo.source_id)
            .ok_or_else(|| Error::config("source id not present in topology"))?;
        let dst = topo
            .index_of(topo.dest_id)
            .ok_or_else(|| Error::config("destination id not present in topology"))?;
        if topo.nodes[src].plane != Plane::A || topo.nodes[dst].plane != Plane::B {
            return Err(Error::config("source must lie in plane A and destination in plane B"));
        }
        if topo.road_points.is_empty() {
            return Err(Error::config("topology has no road points"));
        }

        let n = topo.nodes.len();
        let jammer_count = topo.jammers.len();
        let mut pair_weights = Vec::with_capacity(n * n * jammer_count);
        for tx in &topo.nodes {
            for rx in &topo.nodes {
                let link = LinkGeometry::between(tx.pos(), rx.pos(), &topo.jammers);
                push_weights(&mut pair_weights, &link, q.alpha);
            }
        }
        let mut road_weights = Vec::with_capacity(n * topo.road_points.len() * jammer_count);
        for tx in &topo.nodes {
            for r in &topo.road_points {
                let link = LinkGeometry::between(tx.pos(), *r, &topo.jammers);
                push_weights(&mut road_weights, &link, q.alpha);
            }
        }

        let plane_a = (0..n).filter(|&i| topo.nodes[i].plane == Plane::A).collect();
        let plane_b = (0..n).filter(|&i| topo.nodes[i].plane == Plane::B).collect();
        let nearest_b: Vec<usize> = nearest_plane_b(topo)
            .into_iter()
            .map(|id| topo.index_of(id).expect("nearest node exists"))
            .collect();
        let mut theta = nearest_b.clone();
        theta.sort_unstable();
        theta.dedup();

        Ok(Network {
            topo,
            q: *q,
            duration: msg.tx_duration(),
            opts: *opts,
            jammer_count,
            pair_weights,
            road_weights,
            plane_a,
            plane_b,
            nearest_b,
            theta,
            src,
            dst,
        })
    }

    pub fn node_count(&self) -> usize {
        self.topo.nodes.len()
    }

    pub fn id(&self, index: usize) -> usize {
        self.topo.nodes[index].id
    }

    pub fn pos(&self, index: usize) -> Point {
        self.topo.nodes[index].pos()
    }

    /// Largest hop count the outer loops may try: `N − 1`, optionally capped.
    pub fn hop_limit(&self) -> usize {
        let limit = self.node_count().saturating_sub(1);
        self.opts.max_hops.map_or(limit, |cap| cap.min(limit))
    }

    fn pair(&self, tx: usize, rx: usize) -> &[f64] {
        let start = (tx * self.node_count() + rx) * self.jammer_count;
        &self.pair_weights[start..start + self.jammer_count]
    }

    fn road(&self, tx: usize, r: usize) -> &[f64] {
        let start = (tx * self.topo.road_points.len() + r) * self.jammer_count;
        &self.road_weights[start..start + self.jammer_count]
    }

    fn solve(&self, target: f64, weights: &[f64]) -> Option<f64> {
        solve_weights(target, weights, self.q.gamma, self.q.p_max, &self.opts.solver).power()
    }

    /// Minimum feasible power for `tx → rx`; self-links are never feasible.
    pub fn link_power(&self, tx: usize, rx: usize, target: f64) -> Option<f64> {
        if tx == rx {
            return None;
        }
        self.solve(target, self.pair(tx, rx))
    }

    pub fn link_outage(&self, tx: usize, rx: usize, power: f64) -> f64 {
        outage_from_weights(self.pair(tx, rx), power, self.q.gamma)
    }

    pub fn uplink_outage(&self, tx: usize, r: usize, power: f64) -> f64 {
        outage_from_weights(self.road(tx, r), power, self.q.gamma)
    }

    /// Square table of link powers among `members` (node indices).
    pub fn link_table(&self, members: &[usize], target: f64) -> LinkTable {
        let k = members.len();
        let mut power = Vec::with_capacity(k * k);
        for &tx in members {
            for &rx in members {
                power.push(self.link_power(tx, rx, target));
            }
        }
        LinkTable { size: k, power }
    }

    pub fn handoff(&self, tx: usize, target: f64) -> Option<Handoff> {
        let points = &self.topo.road_points;
        scan_handoff(points.len(), |r| self.road(tx, r), target, &self.q, &self.opts).map(|(r, power)| Handoff {
            road_index: r,
            point: points[r],
            power,
        })
    }

    /// Road point the vehicle delivers from: among the points whose nearest
    /// plane-B node is `sigma`, the one closest to it.
    pub fn delivery_point(&self, sigma: usize) -> usize {
        let target = self.pos(sigma);
        let mut best: Option<(f64, usize)> = None;
        for (r, &nearest) in self.nearest_b.iter().enumerate() {
            if nearest != sigma {
                continue;
            }
            let d = self.topo.road_points[r].distance(&target);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, r));
            }
        }
        best.expect("sigma is a handoff candidate").1
    }
}

/// Powers (watts) of the links among a node subset, in subset-local indices.
pub(crate) struct LinkTable {
    size: usize,
    power: Vec<Option<f64>>,
}

impl LinkTable {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn power(&self, from: usize, to: usize) -> Option<f64> {
        self.power[from * self.size + to]
    }
}

/// Picks the road point for an uplink according to `opts.handoff_rule`.
/// Returns the road-point index and the solved power.
pub(crate) fn scan_handoff<'w>(
    count: usize,
    weights: impl Fn(usize) -> &'w [f64],
    target: f64,
    q: &QosParams,
    opts: &PlannerOptions,
) -> Option<(usize, f64)> {
    let solver: &SolverOptions = &opts.solver;
    let solve = |w: &[f64]| solve_weights(target, w, q.gamma, q.p_max, solver);
    match opts.handoff_rule {
        HandoffRule::MinPower => {
            // Any point whose lower power bound exceeds the best guaranteed
            // upper bound cannot win, so it is not solved.
            let gamma_weight = |r: usize| q.gamma * weights(r).iter().sum::<f64>();
            let mut bound = f64::INFINITY;
            for r in 0..count {
                let gw = gamma_weight(r);
                let upper = if gw == 0.0 {
                    solver.power_floor
                } else {
                    let (_, up) = power_bounds(target, gw);
                    if up <= q.p_max {
                        up
                    } else {
                        f64::INFINITY
                    }
                };
                bound = bound.min(upper);
            }
            let bound = bound * (1.0 + 1e-6);
            let mut best: Option<(usize, f64)> = None;
            for r in 0..count {
                let gw = gamma_weight(r);
                let lower = if gw == 0.0 { solver.power_floor } else { power_bounds(target, gw).0 };
                if lower > bound {
                    continue;
                }
                if let PowerSolveResult::Feasible { power, .. } = solve(weights(r)) {
                    if best.is_none_or(|(_, p)| power < p) {
                        best = Some((r, power));
                    }
                }
            }
            best
        }
        HandoffRule::MaxOutage => {
            let reference = if q.p_max.is_finite() { q.p_max } else { 1.0 };
            let mut best: Option<(usize, f64, f64)> = None;
            for r in 0..count {
                if let PowerSolveResult::Feasible { power, .. } = solve(weights(r)) {
                    let w = weights(r);
                    let outage = match solver.mode {
                        SolverMode::Exact => outage_from_weights(w, reference, q.gamma),
                        SolverMode::Approx => crate::channel::approx_outage_from_weights(w, reference, q.gamma),
                    };
                    if best.is_none_or(|(_, _, o)| outage > o) {
                        best = Some((r, power, outage));
                    }
                }
            }
            best.map(|(r, p, _)| (r, p))
        }
    }
}
