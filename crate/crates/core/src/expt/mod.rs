//! Experiment harness: configuration files, seeded single runs, parameter
//! sweeps to CSV and Monte Carlo checks of the outage formula.

mod config;
mod mc;
mod run;

pub use config::{
    load_config, load_topology, save_config, save_topology, ExperimentConfig, MessageSection, QosSection,
    SweepAxis, SweepSection, TopologySection,
};
pub use mc::{clt_bound, run_mc_validation, McLink, McReport, MC_LINKS, MC_TARGET_RANGE, MIN_MC_SAMPLES};
pub use run::{
    load_plan, plan_path, plan_single, run_single, run_sweep, save_plan, sweep_csv_path, sweep_records,
    topology_path, write_sweep_csv, PlanDocument, SingleRun, SweepRecord, SWEEP_CSV_HEADER,
};
