use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::channel::QosParams;
use crate::error::{Error, Result};
use crate::planner::PlannerOptions;
use crate::power::MessageSpec;
use crate::topo::{generate_topology, Topology, TopologyConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologySection {
    #[serde(flatten)]
    pub layout: TopologyConfig,
    pub jammer_power_w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QosSection {
    pub rho: f64,
    pub alpha: f64,
    pub outage_budget: f64,
    pub p_max_w: f64,
    /// Lifts the per-node power cap entirely.
    #[serde(default)]
    pub p_max_infinite: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MessageSection {
    pub bits: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "T")]
    OutageBudget,
    #[serde(rename = "P_max")]
    PowerCap,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::OutageBudget => "T",
            SweepAxis::PowerCap => "P_max",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSection {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// One experiment: how to obtain topologies, the link parameters, and
/// optionally a one-dimensional sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub topology: TopologySection,
    /// Use this saved topology instead of generating one per seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology_file: Option<PathBuf>,
    pub qos: QosSection,
    pub message: MessageSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub solver: PlannerOptions,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

const BUNDLED: &[(&str, &str)] = &[
    ("reference_alpha2", include_str!("../../configs/reference_alpha2.json")),
    ("reference_alpha3", include_str!("../../configs/reference_alpha3.json")),
    ("t_sweep_alpha2", include_str!("../../configs/t_sweep_alpha2.json")),
    ("t_sweep_alpha4", include_str!("../../configs/t_sweep_alpha4.json")),
    ("t_sweep_alpha6", include_str!("../../configs/t_sweep_alpha6.json")),
    ("pmax_sweep_alpha2", include_str!("../../configs/pmax_sweep_alpha2.json")),
    ("small_oracle", include_str!("../../configs/small_oracle.json")),
];

impl ExperimentConfig {
    /// Names accepted by [`ExperimentConfig::bundled`].
    pub fn bundled_names() -> impl Iterator<Item = &'static str> {
        BUNDLED.iter().map(|(name, _)| *name)
    }

    /// One of the configurations shipped with the crate.
    pub fn bundled(name: &str) -> Result<Self> {
        let (_, text) = BUNDLED
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::config(format!("no bundled configuration named {name:?}")))?;
        let config: ExperimentConfig = parse_json(text, name)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.topology_file.is_none() {
            self.topology.layout.validate()?;
        }
        if !(self.topology.jammer_power_w >= 0.0 && self.topology.jammer_power_w.is_finite()) {
            return Err(Error::config("jammer_power_w must be non-negative"));
        }
        let q = self.qos_params()?;
        self.message_spec()?;
        self.solver.solver.validate(q.p_max)?;
        if self.seeds.is_empty() {
            return Err(Error::config("at least one seed is required"));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::config("sweep values must be sorted ascending without repeats"));
            }
            for &v in &sweep.values {
                let ok = match sweep.axis {
                    SweepAxis::OutageBudget => v > 0.0 && v < 1.0,
                    SweepAxis::PowerCap => v > 0.0,
                };
                if !ok {
                    return Err(Error::config(format!("sweep value {v} outside the {} domain", sweep.axis.as_str())));
                }
            }
        }
        Ok(())
    }

    pub fn qos_params(&self) -> Result<QosParams> {
        let p_max = if self.qos.p_max_infinite { f64::INFINITY } else { self.qos.p_max_w };
        QosParams::new(self.qos.rho, self.qos.alpha, self.qos.outage_budget, p_max)
    }

    pub fn message_spec(&self) -> Result<MessageSpec> {
        MessageSpec::new(self.message.bits, self.qos.rho)
    }

    /// The topology for `seed`: the saved one if configured, else a fresh draw.
    pub fn topology_for(&self, seed: u64) -> Result<Topology> {
        match &self.topology_file {
            Some(path) => load_topology(path),
            None => {
                let layout = TopologyConfig { rng_seed: seed, ..self.topology.layout.clone() };
                generate_topology(&layout, self.topology.jammer_power_w)
            }
        }
    }
}

fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

pub(crate) fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    parse_json(&read(path)?, &path.display().to_string())
}

pub(crate) fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.display().to_string(), source })?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = load_json(path.as_ref())?;
    config.validate()?;
    Ok(config)
}

pub fn save_config(path: impl AsRef<Path>, config: &ExperimentConfig) -> Result<()> {
    save_json(path.as_ref(), config)
}

pub fn load_topology(path: impl AsRef<Path>) -> Result<Topology> {
    let topology: Topology = load_json(path.as_ref())?;
    topology.validate()?;
    Ok(topology)
}

pub fn save_topology(path: impl AsRef<Path>, topology: &Topology) -> Result<()> {
    save_json(path.as_ref(), topology)
}
