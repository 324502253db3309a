use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::channel::QosParams;
use crate::error::{Error, Result};
use crate::planner::{audit_route, plan_with_vehicle, plan_without_vehicle, AuditReport, PlanMode, RoutePlan};
use crate::topo::Topology;

use super::config::{load_json, save_json, save_topology, ExperimentConfig, SweepAxis};

/// A plan as written to disk, including the infeasible case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDocument {
    pub seed: u64,
    pub mode: PlanMode,
    pub feasible: bool,
    pub plan: Option<RoutePlan>,
    pub audit: Option<AuditReport>,
}

pub fn save_plan(path: impl AsRef<Path>, doc: &PlanDocument) -> Result<()> {
    save_json(path.as_ref(), doc)
}

pub fn load_plan(path: impl AsRef<Path>) -> Result<PlanDocument> {
    load_json(path.as_ref())
}

/// Both plans for one seed, with their audits.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleRun {
    pub seed: u64,
    pub topology: Topology,
    pub vehicle: PlanDocument,
    pub baseline: PlanDocument,
}

impl SingleRun {
    pub fn any_feasible(&self) -> bool {
        self.vehicle.feasible || self.baseline.feasible
    }
}

pub fn topology_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("topology_seed{seed}.json"))
}

pub fn plan_path(dir: &Path, mode: PlanMode, seed: u64) -> PathBuf {
    dir.join(format!("plan_{}_seed{seed}.json", mode.as_str()))
}

pub fn sweep_csv_path(dir: &Path) -> PathBuf {
    dir.join("sweep.csv")
}

fn plan_mode(
    mode: PlanMode,
    topology: &Topology,
    q: &QosParams,
    config: &ExperimentConfig,
) -> Result<Option<RoutePlan>> {
    let msg = config.message_spec()?;
    match mode {
        PlanMode::Vehicle => plan_with_vehicle(topology, q, &msg, &config.solver),
        PlanMode::Baseline => plan_without_vehicle(topology, q, &msg, &config.solver),
    }
}

fn document(seed: u64, mode: PlanMode, plan: Option<RoutePlan>, topology: &Topology, config: &ExperimentConfig) -> Result<PlanDocument> {
    let q = config.qos_params()?;
    let msg = config.message_spec()?;
    let audit = plan.as_ref().map(|p| audit_route(p, topology, &q, &msg));
    Ok(PlanDocument { seed, mode, feasible: plan.is_some(), plan, audit })
}

/// Plans one seed in both modes without touching the filesystem.
pub fn plan_single(config: &ExperimentConfig, seed: u64) -> Result<SingleRun> {
    config.validate()?;
    let topology = config.topology_for(seed)?;
    let q = config.qos_params()?;
    let vehicle = plan_mode(PlanMode::Vehicle, &topology, &q, config)?;
    let baseline = plan_mode(PlanMode::Baseline, &topology, &q, config)?;
    let vehicle = document(seed, PlanMode::Vehicle, vehicle, &topology, config)?;
    let baseline = document(seed, PlanMode::Baseline, baseline, &topology, config)?;
    Ok(SingleRun { seed, topology, vehicle, baseline })
}

/// Plans one seed in both modes and writes the topology and both plan
/// documents to the output directory.
pub fn run_single(config: &ExperimentConfig, seed: u64) -> Result<SingleRun> {
    let run = plan_single(config, seed)?;
    let dir = &config.output_dir;
    save_topology(topology_path(dir, seed), &run.topology)?;
    save_plan(plan_path(dir, PlanMode::Vehicle, seed), &run.vehicle)?;
    save_plan(plan_path(dir, PlanMode::Baseline, seed), &run.baseline)?;
    Ok(run)
}

/// One CSV row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub seed: u64,
    pub axis: SweepAxis,
    pub value: f64,
    pub mode: PlanMode,
    pub energy_j: Option<f64>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub feasible: bool,
    /// Wall-clock planner time; only filled when timing is requested.
    pub runtime_s: Option<f64>,
}

pub const SWEEP_CSV_HEADER: &str = "seed,axis,value,mode,energy_j,m,n,feasible,runtime_s";

fn record(seed: u64, axis: SweepAxis, value: f64, mode: PlanMode, plan: Option<&RoutePlan>, runtime_s: Option<f64>) -> SweepRecord {
    SweepRecord {
        seed,
        axis,
        value,
        mode,
        energy_j: plan.map(|p| p.total_energy_j),
        m: plan.map(|p| p.hop_count()),
        n: plan.and_then(|p| p.hop_split).map(|s| s.n),
        feasible: plan.is_some(),
        runtime_s,
    }
}

/// Every seed × grid value × mode, with the topology fixed per seed. Rows
/// come back sorted by seed, value, then mode.
pub fn sweep_records(config: &ExperimentConfig, timing: bool) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::config("configuration has no sweep section"))?;
    let base = config.qos_params()?;
    let mut rows = Vec::with_capacity(config.seeds.len() * sweep.values.len() * 2);
    for &seed in &config.seeds {
        if sweep.values.is_empty() {
            continue;
        }
        let topology = config.topology_for(seed)?;
        for &value in &sweep.values {
            let q = match sweep.axis {
                SweepAxis::OutageBudget => base.with_outage_budget(value),
                SweepAxis::PowerCap => base.with_p_max(value),
            };
            q.validate()?;
            for mode in [PlanMode::Vehicle, PlanMode::Baseline] {
                let start = Instant::now();
                let plan = plan_mode(mode, &topology, &q, config)?;
                let runtime = timing.then(|| start.elapsed().as_secs_f64());
                rows.push(record(seed, sweep.axis, value, mode, plan.as_ref(), runtime));
            }
        }
    }
    rows.sort_by(|a, b| {
        a.seed
            .cmp(&b.seed)
            .then(a.value.total_cmp(&b.value))
            .then(a.mode.cmp(&b.mode))
    });
    Ok(rows)
}

pub fn write_sweep_csv(path: impl AsRef<Path>, rows: &[SweepRecord]) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io { path: path.display().to_string(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err)?;
    }
    let mut buf = format!("{SWEEP_CSV_HEADER}\n").into_bytes();
    {
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(&mut buf);
        for row in rows {
            writer.serialize(row)?;
        }
        writer.flush().map_err(io_err)?;
    }
    std::fs::write(path, buf).map_err(io_err)
}

/// Runs the configured sweep and writes `sweep.csv` into the output directory.
pub fn run_sweep(config: &ExperimentConfig, timing: bool) -> Result<Vec<SweepRecord>> {
    let rows = sweep_records(config, timing)?;
    write_sweep_csv(sweep_csv_path(&config.output_dir), &rows)?;
    Ok(rows)
}
