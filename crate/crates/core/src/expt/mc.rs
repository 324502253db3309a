use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{link_outage, mc_link_outage, LinkGeometry};
use crate::error::{Error, Result};
use crate::power::min_power_for_outage;

use super::config::ExperimentConfig;

pub const MC_LINKS: usize = 50;
pub const MIN_MC_SAMPLES: usize = 10_000;
/// Per-link targets are drawn uniformly from this range.
pub const MC_TARGET_RANGE: (f64, f64) = (0.02, 0.5);

// Kept apart from the streams used for topology rejection sampling.
const MC_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McLink {
    pub from: usize,
    pub to: usize,
    pub power_w: f64,
    pub closed_form: f64,
    pub monte_carlo: f64,
    pub deviation: f64,
    /// `4·√(p(1−p)/samples)` at the closed-form `p`.
    pub clt_bound: f64,
}

impl McLink {
    pub fn within_bound(&self) -> bool {
        self.deviation <= self.clt_bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub seed: u64,
    pub samples: usize,
    pub links: Vec<McLink>,
    pub max_deviation: f64,
}

impl McReport {
    pub fn all_within_bound(&self) -> bool {
        self.links.iter().all(McLink::within_bound)
    }
}

pub fn clt_bound(p: f64, samples: usize) -> f64 {
    4.0 * (p * (1.0 - p) / samples as f64).sqrt()
}

/// Compares simulated and closed-form outage on random node pairs of the
/// seeded topology. Each link transmits at the uncapped power that meets a
/// random target, so the checked outages are spread over a useful range.
pub fn run_mc_validation(config: &ExperimentConfig, seed: u64, samples: usize) -> Result<McReport> {
    if samples < MIN_MC_SAMPLES {
        return Err(Error::config(format!("Monte Carlo validation needs at least {MIN_MC_SAMPLES} samples")));
    }
    config.validate()?;
    let topology = config.topology_for(seed)?;
    let q = config.qos_params()?.with_p_max(f64::INFINITY);
    let opts = config.solver.solver;
    let n = topology.nodes.len();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(MC_STREAM);
    let mut links = Vec::with_capacity(MC_LINKS);
    for _ in 0..MC_LINKS {
        let i = rng.random_range(0..n);
        let j = (i + rng.random_range(1..n)) % n;
        let target = rng.random_range(MC_TARGET_RANGE.0..MC_TARGET_RANGE.1);
        let mc_seed: u64 = rng.random();
        let (tx, rx) = (&topology.nodes[i], &topology.nodes[j]);
        let link = LinkGeometry::between(tx.pos(), rx.pos(), &topology.jammers);
        let power = min_power_for_outage(target, &link, &q, &opts)?
            .power()
            .expect("uncapped solve is always feasible");
        let closed_form = link_outage(power, &link, &q)?;
        let monte_carlo = mc_link_outage(power, &link, &q, samples, mc_seed)?;
        links.push(McLink {
            from: tx.id,
            to: rx.id,
            power_w: power,
            closed_form,
            monte_carlo,
            deviation: (monte_carlo - closed_form).abs(),
            clt_bound: clt_bound(closed_form, samples),
        });
    }
    let max_deviation = links.iter().map(|l| l.deviation).fold(0.0, f64::max);
    Ok(McReport { seed, samples, links, max_deviation })
}
