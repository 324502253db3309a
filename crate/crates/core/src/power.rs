//! Outage targets to transmit powers and energies.

use serde::{Deserialize, Serialize};

use crate::channel::{approx_outage_from_weights, outage_from_weights, InterferenceProfile, LinkGeometry, QosParams};
use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_POWER_FLOOR: f64 = 1e-6;

/// Per-link outage that makes `m` equal links compose to exactly `t`:
/// `1 − (1 − t)^(1/m)`.
pub fn per_link_target(t: f64, m: usize) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::domain(format!("outage budget must lie in (0, 1), got {t}")));
    }
    if m == 0 {
        return Err(Error::domain("hop count must be at least 1"));
    }
    Ok(-((-t).ln_1p() / m as f64).exp_m1())
}

/// Which outage model the power solver inverts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMode {
    /// Bisection on the exact closed form.
    #[default]
    Exact,
    /// Analytic inversion of the exponential approximation. Never under-powers
    /// a link with respect to the exact model.
    Approx,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative width at which bisection stops.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Power assigned to links that see no interference at all.
    #[serde(default = "default_floor")]
    pub power_floor: f64,
    #[serde(default)]
    pub mode: SolverMode,
}

fn default_tol() -> f64 {
    DEFAULT_TOLERANCE
}

fn default_floor() -> f64 {
    DEFAULT_POWER_FLOOR
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: DEFAULT_TOLERANCE, power_floor: DEFAULT_POWER_FLOOR, mode: SolverMode::Exact }
    }
}

impl SolverOptions {
    pub fn validate(&self, p_max: f64) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::domain(format!("solver tolerance must lie in (0, 1), got {}", self.tol)));
        }
        if !(self.power_floor > 0.0 && self.power_floor < p_max) {
            return Err(Error::domain(format!(
                "power floor must lie in (0, P_max), got {}",
                self.power_floor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerSolveResult {
    Feasible { power: f64, achieved_outage: f64 },
    /// Even `P_max` leaves the link above target.
    Infeasible { outage_at_cap: f64 },
}

impl PowerSolveResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self, PowerSolveResult::Feasible { .. })
    }

    pub fn power(&self) -> Option<f64> {
        match *self {
            PowerSolveResult::Feasible { power, .. } => Some(power),
            PowerSolveResult::Infeasible { .. } => None,
        }
    }

    pub fn achieved_outage(&self) -> f64 {
        match *self {
            PowerSolveResult::Feasible { achieved_outage, .. } => achieved_outage,
            PowerSolveResult::Infeasible { outage_at_cap } => outage_at_cap,
        }
    }
}

fn check_target(target: f64) -> Result<()> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::domain(format!("outage target must lie in (0, 1), got {target}")));
    }
    Ok(())
}

/// Smallest transmit power (to within `opts.tol`, relative) that keeps the
/// link outage at or below `target` without exceeding `q.p_max`.
pub fn min_power_for_outage(
    target: f64,
    link: &LinkGeometry,
    q: &QosParams,
    opts: &SolverOptions,
) -> Result<PowerSolveResult> {
    check_target(target)?;
    opts.validate(q.p_max)?;
    let profile = InterferenceProfile::new(link, q.alpha);
    Ok(solve_weights(target, &profile.weights, q.gamma, q.p_max, opts))
}

/// Bracketing bounds for the exact inversion, from
/// `X/(1+X) ≤ outage ≤ 1 − e^−X` with `X = γ Σw / P`.
pub(crate) fn power_bounds(target: f64, gamma_weight: f64) -> (f64, f64) {
    let lower = gamma_weight * (1.0 - target) / target;
    let upper = gamma_weight / -(-target).ln_1p();
    (lower, upper)
}

/// Solver core over precomputed interference weights. Inputs must be valid.
pub(crate) fn solve_weights(target: f64, weights: &[f64], gamma: f64, p_max: f64, opts: &SolverOptions) -> PowerSolveResult {
    let gamma_weight = gamma * weights.iter().sum::<f64>();
    if gamma_weight == 0.0 {
        // No interference and no noise: any positive power works.
        return PowerSolveResult::Feasible { power: opts.power_floor, achieved_outage: 0.0 };
    }
    if !gamma_weight.is_finite() {
        return PowerSolveResult::Infeasible { outage_at_cap: 1.0 };
    }
    let exact = |p: f64| outage_from_weights(weights, p, gamma);
    let (lower, upper) = power_bounds(target, gamma_weight);

    match opts.mode {
        SolverMode::Approx => {
            if upper > p_max {
                PowerSolveResult::Infeasible { outage_at_cap: approx_outage_from_weights(weights, p_max, gamma) }
            } else {
                PowerSolveResult::Feasible { power: upper, achieved_outage: exact(upper) }
            }
        }
        SolverMode::Exact => {
            if p_max.is_finite() {
                let at_cap = exact(p_max);
                if at_cap > target {
                    return PowerSolveResult::Infeasible { outage_at_cap: at_cap };
                }
            }
            let mut hi = upper.min(p_max);
            let mut guard = 0;
            while exact(hi) > target && guard < 64 {
                // Rounding at the approximation bound; nudge upward.
                hi *= 1.0 + opts.tol;
                guard += 1;
            }
            let mut lo = lower.min(hi);
            while hi - lo > opts.tol * hi {
                let mid = (lo * hi).sqrt();
                if mid <= lo || mid >= hi {
                    break;
                }
                if exact(mid) <= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            PowerSolveResult::Feasible { power: hi, achieved_outage: exact(hi) }
        }
    }
}

/// Message size and rate; fixes the airtime of every transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MessageSpec {
    pub bits: f64,
    pub rho: f64,
}

impl MessageSpec {
    pub fn new(bits: f64, rho: f64) -> Result<Self> {
        if !(bits > 0.0 && bits.is_finite()) {
            return Err(Error::domain(format!("message length must be positive, got {bits}")));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::domain(format!("rate must be positive to define airtime, got {rho}")));
        }
        Ok(MessageSpec { bits, rho })
    }

    /// Seconds on air, `L / ρ`.
    pub fn tx_duration(&self) -> f64 {
        self.bits / self.rho
    }
}

/// Transmit energy in joules: `P · L / ρ`.
pub fn link_energy(power: f64, msg: &MessageSpec) -> f64 {
    power * msg.tx_duration()
}
