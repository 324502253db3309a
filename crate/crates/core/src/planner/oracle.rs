//! Exhaustive enumeration over hop sequences. Exponential; only for checking
//! the dynamic programs on small instances.

use std::collections::HashMap;

use crate::channel::{LinkGeometry, QosParams};
use crate::error::{Error, Result};
use crate::power::{min_power_for_outage, per_link_target, MessageSpec};
use crate::topo::{handoff_candidates, Plane, Topology};

use super::network::Network;
use super::{assemble_baseline, assemble_vehicle, select_handoff, Handoff, HopSplit, PlaneAPath, PlaneBPath, PlannerOptions, RoutePlan};

/// Default cap on the number of enumerated sequences.
pub const DEFAULT_SEQUENCE_LIMIT: u128 = 10_000_000;

/// Node sequence, per-hop powers and energy of one enumerated walk.
type Walk = (Vec<usize>, Vec<f64>, f64);

fn pow_sat(base: usize, exp: usize) -> u128 {
    (base as u128).checked_pow(exp as u32).unwrap_or(u128::MAX)
}

/// Link powers at one per-link target, solved on demand from raw geometry.
struct LinkOracle<'a> {
    topo: &'a Topology,
    q: &'a QosParams,
    opts: &'a PlannerOptions,
    target: f64,
    cache: HashMap<(usize, usize), Option<f64>>,
}

impl<'a> LinkOracle<'a> {
    fn power(&mut self, from: usize, to: usize) -> Result<Option<f64>> {
        if from == to {
            return Ok(None);
        }
        if let Some(p) = self.cache.get(&(from, to)) {
            return Ok(*p);
        }
        let tx = self.topo.node(from).expect("id from topology").pos();
        let rx = self.topo.node(to).expect("id from topology").pos();
        let link = LinkGeometry::between(tx, rx, &self.topo.jammers);
        let p = min_power_for_outage(self.target, &link, self.q, &self.opts.solver)?.power();
        self.cache.insert((from, to), p);
        Ok(p)
    }
}

/// Every walk with exactly `hops` hops from `start` through `members`,
/// optionally pinned to end at `end`: `(ids, powers, energy)`.
fn walks(
    links: &mut LinkOracle,
    members: &[usize],
    start: usize,
    end: Option<usize>,
    hops: usize,
    duration: f64,
) -> Result<Vec<Walk>> {
    let mut out = Vec::new();
    let mut stack = vec![(vec![start], Vec::new(), 0.0)];
    while let Some((seq, powers, cost)) = stack.pop() {
        if seq.len() == hops + 1 {
            if end.is_none_or(|e| e == *seq.last().unwrap()) {
                out.push((seq, powers, cost));
            }
            continue;
        }
        let last = *seq.last().unwrap();
        for &next in members {
            if hops == seq.len() && end.is_some_and(|e| e != next) {
                continue;
            }
            let Some(p) = links.power(last, next)? else { continue };
            let mut s = seq.clone();
            s.push(next);
            let mut ps = powers.clone();
            ps.push(p);
            stack.push((s, ps, cost + p * duration));
        }
    }
    // Deterministic order regardless of stack discipline.
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// Globally optimal plan by enumerating every hop sequence with the same
/// semantics as the planners (walks, no self-links, equal outage shares and,
/// with the vehicle, the same uplink scan and candidate set). `max_m` bounds
/// the total hop count.
pub fn brute_force_plan(
    topology: &Topology,
    q: &QosParams,
    msg: &MessageSpec,
    max_m: usize,
    with_vehicle: bool,
    opts: &PlannerOptions,
    sequence_limit: u128,
) -> Result<Option<RoutePlan>> {
    let net = Network::new(topology, q, msg, opts)?;
    let duration = msg.tx_duration();
    let all: Vec<usize> = topology.nodes.iter().map(|n| n.id).collect();
    let plane_a: Vec<usize> = topology.nodes_in(Plane::A).map(|n| n.id).collect();
    let plane_b: Vec<usize> = topology.nodes_in(Plane::B).map(|n| n.id).collect();
    let theta = handoff_candidates(topology);

    let sequences: u128 = if with_vehicle {
        (2..=max_m)
            .flat_map(|m| (1..m).map(move |n| (m, n)))
            .map(|(m, n)| {
                pow_sat(plane_a.len(), n - 1)
                    .saturating_mul(theta.len() as u128)
                    .saturating_mul(pow_sat(plane_b.len(), m - n - 1))
            })
            .fold(0u128, u128::saturating_add)
    } else {
        (1..=max_m).map(|m| pow_sat(all.len(), m - 1)).fold(0u128, u128::saturating_add)
    };
    if sequences > sequence_limit {
        return Err(Error::InstanceTooLarge { sequences, limit: sequence_limit });
    }

    let new_links = |target| LinkOracle { topo: topology, q, opts, target, cache: HashMap::new() };

    if !with_vehicle {
        let mut best: Option<(f64, f64, Vec<usize>, Vec<f64>)> = None;
        for m in 1..=max_m {
            let target = per_link_target(q.outage_budget, m)?;
            let mut links = new_links(target);
            for (seq, powers, cost) in walks(&mut links, &all, topology.source_id, Some(topology.dest_id), m, duration)? {
                if best.as_ref().is_none_or(|(c, ..)| cost < *c) {
                    best = Some((cost, target, seq, powers));
                }
            }
        }
        return Ok(best.map(|(_, target, nodes, powers)| assemble_baseline(&net, target, &nodes, &powers)));
    }

    let mut best: Option<(f64, HopSplit, f64, PlaneAPath, PlaneBPath)> = None;
    for m in 2..=max_m {
        let target = per_link_target(q.outage_budget, m)?;
        let mut links = new_links(target);
        let mut handoffs: HashMap<usize, Option<Handoff>> = HashMap::new();
        for n in 1..m {
            let mut a_side = Vec::new();
            for (seq, powers, cost) in walks(&mut links, &plane_a, topology.source_id, None, n - 1, duration)? {
                let u = *seq.last().unwrap();
                let handoff = match handoffs.get(&u) {
                    Some(h) => *h,
                    None => {
                        let from = topology.node(u).expect("plane-A id").pos();
                        let h = select_handoff(from, &topology.road_points, &topology.jammers, target, q, opts)?;
                        handoffs.insert(u, h);
                        h
                    }
                };
                if let Some(h) = handoff {
                    let total = cost + h.power * duration;
                    a_side.push(PlaneAPath { cost: total, nodes: seq, powers, handoff: h });
                }
            }
            let mut b_side = Vec::new();
            for &sigma in &theta {
                for (seq, powers, cost) in walks(&mut links, &plane_b, sigma, Some(topology.dest_id), m - n, duration)? {
                    b_side.push(PlaneBPath { cost, nodes: seq, powers });
                }
            }
            for a in &a_side {
                for b in &b_side {
                    let total = a.cost + b.cost;
                    if best.as_ref().is_none_or(|(c, ..)| total < *c) {
                        best = Some((total, HopSplit { m, n }, target, a.clone(), b.clone()));
                    }
                }
            }
        }
    }
    Ok(best.map(|(_, split, target, a, b)| assemble_vehicle(&net, split, target, &a, &b)))
}
