//! Link outage under Rayleigh fading with jammer interference (SIR only, no
//! thermal noise), its exponential approximation, end-to-end composition,
//! and a Monte Carlo fading simulator used to validate the closed form.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::topo::{Jammer, Point};

/// Above this many jammers the interference product is accumulated in log space.
const LOG_SPACE_THRESHOLD: usize = 64;

/// SIR decoding threshold for a throughput of `rho` bits/s/Hz: `2^rho − 1`.
pub fn sir_threshold(rho: f64) -> Result<f64> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(Error::domain(format!("throughput must be non-negative, got {rho}")));
    }
    Ok(rho.exp2() - 1.0)
}

/// Quality-of-service and hardware parameters shared by every link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QosParams {
    /// Minimum throughput, bits/s/Hz.
    pub rho: f64,
    /// SIR threshold, always `2^rho − 1`.
    pub gamma: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// End-to-end outage budget `T`.
    pub outage_budget: f64,
    /// Per-node transmit power cap in watts; `f64::INFINITY` lifts the cap.
    pub p_max: f64,
}

impl QosParams {
    pub fn new(rho: f64, alpha: f64, outage_budget: f64, p_max: f64) -> Result<Self> {
        let q = QosParams {
            rho,
            gamma: sir_threshold(rho)?,
            alpha,
            outage_budget,
            p_max,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 2.0 && self.alpha.is_finite()) {
            return Err(Error::domain(format!("path-loss exponent must be >= 2, got {}", self.alpha)));
        }
        if !(self.outage_budget > 0.0 && self.outage_budget < 1.0) {
            return Err(Error::domain(format!(
                "outage budget must lie in (0, 1), got {}",
                self.outage_budget
            )));
        }
        if !(self.p_max > 0.0) {
            return Err(Error::domain(format!("P_max must be positive, got {}", self.p_max)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::domain(format!("invalid SIR threshold {}", self.gamma)));
        }
        Ok(())
    }

    pub fn with_p_max(self, p_max: f64) -> Self {
        QosParams { p_max, ..self }
    }

    pub fn with_outage_budget(self, outage_budget: f64) -> Self {
        QosParams { outage_budget, ..self }
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        QosParams { alpha, ..self }
    }
}

/// One interfering jammer as seen from a receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JammerLink {
    pub power_w: f64,
    /// Jammer-to-receiver distance, meters.
    pub distance: f64,
}

/// Geometry of a single transmitter → receiver link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGeometry {
    pub tx_rx_distance: f64,
    pub jammers: Vec<JammerLink>,
}

impl LinkGeometry {
    pub fn new(tx_rx_distance: f64, jammers: Vec<JammerLink>) -> Result<Self> {
        if !(tx_rx_distance > 0.0 && tx_rx_distance.is_finite()) {
            return Err(Error::domain(format!("link distance must be positive, got {tx_rx_distance}")));
        }
        if let Some(j) = jammers
            .iter()
            .find(|j| !(j.distance > 0.0) || !(j.power_w >= 0.0) || !j.power_w.is_finite())
        {
            return Err(Error::domain(format!(
                "jammer link needs positive distance and non-negative power, got {j:?}"
            )));
        }
        Ok(LinkGeometry { tx_rx_distance, jammers })
    }

    /// Geometry of `tx → rx` with every jammer measured to the receiver.
    ///
    /// Unlike [`LinkGeometry::new`] this does not validate; coincident points
    /// produce zero distances, which the outage formulas map to certain outage.
    pub fn between(tx: Point, rx: Point, jammers: &[Jammer]) -> Self {
        LinkGeometry {
            tx_rx_distance: tx.distance(&rx),
            jammers: jammers
                .iter()
                .map(|j| JammerLink { power_w: j.power_w, distance: j.pos().distance(&rx) })
                .collect(),
        }
    }
}

/// Per-jammer interference weights `P_k · (d / d_k)^α` of a link.
///
/// The outage of the link at transmit power `P` depends on the geometry only
/// through these weights, so planners compute them once per link.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InterferenceProfile {
    pub weights: Vec<f64>,
}

impl InterferenceProfile {
    pub fn new(link: &LinkGeometry, alpha: f64) -> Self {
        let mut weights = Vec::with_capacity(link.jammers.len());
        push_weights(&mut weights, link, alpha);
        InterferenceProfile { weights }
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn outage(&self, power: f64, gamma: f64) -> f64 {
        outage_from_weights(&self.weights, power, gamma)
    }

    pub fn approx_outage(&self, power: f64, gamma: f64) -> f64 {
        approx_outage_from_weights(&self.weights, power, gamma)
    }
}

pub(crate) fn push_weights(out: &mut Vec<f64>, link: &LinkGeometry, alpha: f64) {
    let d = link.tx_rx_distance;
    out.extend(link.jammers.iter().map(|j| {
        if j.power_w == 0.0 {
            0.0
        } else {
            j.power_w * (d / j.distance).powf(alpha)
        }
    }));
}

/// Exact outage from precomputed weights: `1 − ∏ 1 / (1 + γ w_k / P)`.
pub(crate) fn outage_from_weights(weights: &[f64], power: f64, gamma: f64) -> f64 {
    if weights.len() > LOG_SPACE_THRESHOLD {
        let log_prod: f64 = weights.iter().map(|w| (gamma * w / power).ln_1p()).sum();
        -(-log_prod).exp_m1()
    } else {
        let prod: f64 = weights.iter().map(|w| 1.0 + gamma * w / power).product();
        1.0 - prod.recip()
    }
}

pub(crate) fn approx_outage_from_weights(weights: &[f64], power: f64, gamma: f64) -> f64 {
    let exponent: f64 = weights.iter().map(|w| gamma * w / power).sum();
    -(-exponent).exp_m1()
}

fn check_power(power: f64) -> Result<()> {
    if !(power > 0.0) {
        return Err(Error::domain(format!("transmit power must be positive, got {power}")));
    }
    Ok(())
}

/// Closed-form Rayleigh outage probability of a link transmitting at `power`.
pub fn link_outage(power: f64, link: &LinkGeometry, q: &QosParams) -> Result<f64> {
    check_power(power)?;
    Ok(InterferenceProfile::new(link, q.alpha).outage(power, q.gamma))
}

/// `1 − exp(−γ d^α / P · Σ P_k d_k^−α)`, an upper bound on [`link_outage`].
pub fn approx_link_outage(power: f64, link: &LinkGeometry, q: &QosParams) -> Result<f64> {
    check_power(power)?;
    Ok(InterferenceProfile::new(link, q.alpha).approx_outage(power, q.gamma))
}

/// Fraction of `samples` independent fading draws in which the SIR at the
/// receiver falls below `γ`. Every |h|² is unit-mean exponential.
pub fn mc_link_outage(power: f64, link: &LinkGeometry, q: &QosParams, samples: usize, seed: u64) -> Result<f64> {
    check_power(power)?;
    if samples == 0 {
        return Err(Error::domain("Monte Carlo needs at least one sample"));
    }
    let signal_gain = power * link.tx_rx_distance.powf(-q.alpha);
    let jammer_gains: Vec<f64> = link
        .jammers
        .iter()
        .map(|j| j.power_w * j.distance.powf(-q.alpha))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outages = 0usize;
    for _ in 0..samples {
        let h: f64 = Exp1.sample(&mut rng);
        let signal = signal_gain * h;
        let interference: f64 = jammer_gains
            .iter()
            .map(|g| {
                let hk: f64 = Exp1.sample(&mut rng);
                g * hk
            })
            .sum();
        // SIR < γ, written without the division so an interference-free
        // receiver never counts as an outage.
        if signal < q.gamma * interference {
            outages += 1;
        }
    }
    Ok(outages as f64 / samples as f64)
}

/// Outage of a chain of independent links: `1 − ∏ (1 − p_i)`.
pub fn end_to_end_outage(per_link_outages: &[f64]) -> f64 {
    1.0 - per_link_outages.iter().map(|p| 1.0 - p).product::<f64>()
}
